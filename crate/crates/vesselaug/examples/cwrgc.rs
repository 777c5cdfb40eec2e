//! Channel-wise random gamma correction.
//!
//! Applies an independent power law to each RGB channel of a synthetic
//! fundus image, once with hand-picked exponents and once with exponents
//! drawn log-uniformly from the default [0.33, 3] range.
//!
//! ```bash
//! cargo run --release --example cwrgc
//! ```

use vesselaug::augment::{cwrgc, sample_cwrgc, CwrgcParams, GammaRange};
use vesselaug::io::save_image;
use vesselaug::rng::RngStream;
use vesselaug::synthetic::synthetic_fundus;

fn main() -> vesselaug::Result<()> {
    let out = std::path::PathBuf::from("target/example-output/cwrgc");
    let sample = synthetic_fundus(320, 320, 7);
    save_image(&sample.image, &out.join("original.png"))?;

    // fixed exponents: darken red, keep green, brighten blue
    let fixed = CwrgcParams::new([2.2, 1.0, 0.6])?;
    save_image(&cwrgc(&sample.image, &fixed)?, &out.join("fixed_gamma.png"))?;

    // three independently drawn variants
    let mut rng = RngStream::new(42);
    let range = GammaRange::log_uniform(0.33, 3.0);
    for i in 0..3 {
        let params = sample_cwrgc(&mut rng, &range)?;
        let img = cwrgc(&sample.image, &params)?;
        save_image(&img, &out.join(format!("random_{i}.png")))?;
        println!(
            "variant {i}: gamma = ({:.3}, {:.3}, {:.3})",
            params.gamma[0], params.gamma[1], params.gamma[2]
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
