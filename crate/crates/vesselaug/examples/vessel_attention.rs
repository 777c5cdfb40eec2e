//! Vessel extraction with multi-angle top-hat morphology, and the
//! attention-weighted vessel augmentation built on it.
//!
//! A line structuring element longer than a vessel's width erases it under
//! opening whenever the line is not aligned with it; summing the top-hat
//! responses over angles equally distributed in [0, pi) and normalizing to
//! [0, 1] yields a rough vessel map without any annotations.
//!
//! ```bash
//! cargo run --release --example vessel_attention
//! ```

use vesselaug::augment::{attention_map, cwrva, source_plane, CwrvaParams, SourcePlane};
use vesselaug::io::{save_image, save_probability_map, ProbabilityDepth};
use vesselaug::morphology::{build_se_bank, normalize_minmax, top_hat_sum};
use vesselaug::synthetic::synthetic_fundus;

fn main() -> vesselaug::Result<()> {
    let out = std::path::PathBuf::from("target/example-output/vessel_attention");
    let sample = synthetic_fundus(320, 320, 11);
    save_image(&sample.image, &out.join("original.png"))?;

    // 12 angles in 15-degree steps, 15-pixel lines
    let bank = build_se_bank(12, 15)?;
    let inverted = source_plane(&sample.image, SourcePlane::InvertedGreen);
    let vessel_map = normalize_minmax(&top_hat_sum(&inverted, &bank));
    save_probability_map(
        &vessel_map,
        &out.join("vessel_map.png"),
        ProbabilityDepth::Eight,
    )?;

    // strong decay on green, none on blue: tints only the vessel pixels
    let params = CwrvaParams::new([0.6, 0.9, 0.0], 220.0 / 255.0, SourcePlane::InvertedGreen)?;
    let map = attention_map(&sample.image, &params, &bank);
    let augmented = cwrva(&sample.image, &map, params.disturb)?;
    save_image(&augmented, &out.join("vessels_disturbed.png"))?;

    let bright = vessel_map.data().iter().filter(|&&v| v > 0.5).count();
    println!(
        "vessel map: {} of {} pixels above 0.5",
        bright,
        vessel_map.data().len()
    );
    println!("wrote {}", out.display());
    Ok(())
}
