//! Vessel-aware data augmentation and evaluation for retinal fundus images.
//!
//! The crate provides, as a library first and a small CLI on top:
//!
//! * **Channel-wise random gamma correction** — an independent power law
//!   per RGB channel, covering a wide range of tonal quality
//!   ([`augment::cwrgc`]).
//! * **Channel-wise random vessel augmentation** — a per-channel blend
//!   toward a random intensity, weighted by a vessel attention map built
//!   from multi-angle top-hat morphology ([`augment::cwrva`],
//!   [`morphology`]).
//! * **Baseline augmentations** — random flips, per-channel Gaussian
//!   noise, HSV gamma correction — and a fixed-order, seeded pipeline
//!   composing everything reproducibly ([`augment::apply_pipeline`]).
//! * **Brightness/contrast/saturation jitter** and the deterministic
//!   30-dataset robustness sweep built from them ([`jitter`]).
//! * **Segmentation metrics** — exact Mann-Whitney AUC with full ROC
//!   curves, accuracy, specificity, sensitivity and F1 ([`metrics`]).
//! * **Dataset I/O** — PNG rasters, binary masks, 8/16-bit probability
//!   maps and line-oriented manifests with atomic writes ([`io`]).
//!
//! Every random decision flows through a seeded [`rng::RngStream`] with
//! per-image, per-sample and per-stage substreams, so runs are
//! byte-reproducible regardless of thread count.
//!
//! See the crate's `examples/` directory for one runnable example per
//! capability, and the `vesselaug` binary for batch use.

pub mod augment;
pub mod cli;
pub mod error;
pub mod image;
pub mod io;
pub mod jitter;
pub mod metrics;
pub mod morphology;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
pub use image::{BinaryPlane, Channel, FloatPlane, RgbImage, RgbReal, Sample};
pub use rng::RngStream;
