//! Segmentation evaluation: exact AUC, ROC curve, and the threshold
//! metrics ACC/SP/SE/F1.
//!
//! Builds noisy probability maps from a synthetic ground truth and scores
//! them, pooled over the dataset and per image.
//!
//! ```bash
//! cargo run --release --example evaluate
//! ```

use vesselaug::image::FloatPlane;
use vesselaug::metrics::{evaluate_dataset, EvalPair};
use vesselaug::rng::RngStream;
use vesselaug::synthetic::synthetic_fundus;

fn main() -> vesselaug::Result<()> {
    let mut rng = RngStream::new(8);
    let mut pairs = Vec::new();
    for i in 0..3u64 {
        let sample = synthetic_fundus(160, 160, 200 + i);
        let truth = sample.truth.expect("synthetic sample has truth");
        // a plausible soft prediction: high on vessels, low elsewhere, with
        // noise pushing some pixels across the threshold
        let scores: Vec<f64> = truth
            .data()
            .iter()
            .map(|&v| {
                let base = if v { 0.8 } else { 0.2 };
                (base + rng.gaussian(0.0, 0.15).unwrap()).clamp(0.0, 1.0)
            })
            .collect();
        let prediction = FloatPlane::new(truth.width(), truth.height(), scores)?;
        pairs.push(EvalPair::new(prediction, truth, sample.fov)?);
    }

    let evaluation = evaluate_dataset(&pairs, 0.5)?;
    let fmt = |v: Option<f64>| v.map_or("undefined".into(), |x| format!("{x:.4}"));

    println!("image   auc     acc     sp      se      f1");
    for (i, m) in evaluation.per_image.iter().enumerate() {
        println!(
            "{i:<7} {} {:.4}  {}  {}  {}",
            fmt(m.auc),
            m.acc,
            fmt(m.sp),
            fmt(m.se),
            fmt(m.f1)
        );
    }
    let p = &evaluation.pooled;
    println!(
        "pooled  {:.4}  {:.4}  {}  {}  {}",
        p.auc,
        p.acc,
        fmt(p.sp),
        fmt(p.se),
        fmt(p.f1)
    );
    println!(
        "pooled ROC has {} points over {} evaluated pixels",
        p.roc.len(),
        p.counts.total()
    );
    Ok(())
}
