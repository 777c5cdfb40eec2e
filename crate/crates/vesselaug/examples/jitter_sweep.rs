//! Brightness/contrast/saturation jitter and the 30-dataset robustness
//! sweep.
//!
//! Varying each ratio from -0.5 to 0.5 in steps of 0.1 (skipping 0, which
//! is the untouched source) produces 10 datasets per kind, 30 in total.
//! Ground-truth masks are copied byte for byte.
//!
//! ```bash
//! cargo run --release --example jitter_sweep
//! ```

use vesselaug::io::{save_image, save_mask, DatasetManifest, ManifestEntry};
use vesselaug::jitter::{brightness, contrast, generate_sweep, saturation, SweepSpec};
use vesselaug::synthetic::synthetic_fundus;

fn main() -> vesselaug::Result<()> {
    let root = std::path::PathBuf::from("target/example-output/jitter_sweep");

    // single jitters on one image
    let sample = synthetic_fundus(256, 256, 55);
    save_image(&sample.image, &root.join("original.png"))?;
    save_image(&brightness(&sample.image, -0.3)?, &root.join("brighter.png"))?;
    save_image(&contrast(&sample.image, 0.4)?, &root.join("low_contrast.png"))?;
    save_image(&saturation(&sample.image, 0.8)?, &root.join("desaturated.png"))?;

    // a three-image source dataset
    let src = root.join("source");
    let mut entries = Vec::new();
    for i in 0..3u64 {
        let s = synthetic_fundus(128, 128, 100 + i);
        let id = format!("img{i}");
        save_image(&s.image, &src.join(format!("images/{id}.png")))?;
        save_mask(s.truth.as_ref().unwrap(), &src.join(format!("truth/{id}.png")))?;
        entries.push(ManifestEntry {
            id: id.clone(),
            image: format!("images/{id}.png"),
            truth: Some(format!("truth/{id}.png")),
            fov: None,
        });
    }
    let manifest = DatasetManifest {
        root: src.clone(),
        entries,
    };
    manifest.save(&src.join("manifest.txt"))?;

    // the full sweep
    let sweep = generate_sweep(&manifest, &SweepSpec::default(), &root.join("sweep"))?;
    println!("sweep datasets ({}):", sweep.entries.len());
    for entry in &sweep.entries {
        println!(
            "  {}  (kind={}, ratio={}, ok={})",
            entry.path,
            entry.kind,
            entry.ratio,
            entry.status.is_ok()
        );
    }
    println!("wrote {}", root.display());
    Ok(())
}
