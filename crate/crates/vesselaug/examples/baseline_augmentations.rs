//! The baseline augmentations: random flips, per-channel Gaussian noise
//! and HSV gamma correction.
//!
//! ```bash
//! cargo run --release --example baseline_augmentations
//! ```

use vesselaug::augment::{random_flips, rgn, svgc, GammaRange, RGN_SIGMA, SVGC_RANGE};
use vesselaug::io::{save_image, save_mask};
use vesselaug::rng::RngStream;
use vesselaug::synthetic::synthetic_fundus;

fn main() -> vesselaug::Result<()> {
    let out = std::path::PathBuf::from("target/example-output/baseline_augmentations");
    let sample = synthetic_fundus(320, 320, 21);
    save_image(&sample.image, &out.join("original.png"))?;

    // flips move the ground-truth mask together with the image
    let mut rng = RngStream::new(3);
    let flipped = random_flips(&sample, &mut rng, 0.5);
    save_image(&flipped.image, &out.join("flipped.png"))?;
    save_mask(
        flipped.truth.as_ref().expect("synthetic sample has truth"),
        &out.join("flipped_truth.png"),
    )?;

    // Gaussian noise, standard deviation 20 on the 8-bit scale
    let mut rng = RngStream::new(4);
    let noisy = rgn(&sample.image, &mut rng, RGN_SIGMA)?;
    save_image(&noisy, &out.join("gaussian_noise.png"))?;

    // gamma correction of saturation and value in HSV space
    let mut rng = RngStream::new(5);
    let range = GammaRange::log_uniform(SVGC_RANGE.0, SVGC_RANGE.1);
    let recolored = svgc(&sample.image, &mut rng, &range)?;
    save_image(&recolored, &out.join("hsv_gamma.png"))?;

    println!("wrote {}", out.display());
    Ok(())
}
