//! Deterministic synthetic fundus images.
//!
//! Real fundus photographs cannot ship with the crate, so tests, examples
//! and quick CLI experiments use a generated stand-in: a dark frame around
//! a warm circular field of view, a bright optic disc, and a tree of dark
//! vessel curves of tapering width. The vessel centerline pixels double as
//! the ground-truth mask and the disc as the field-of-view mask.

use crate::image::{clamp_unit, quantize_sample, BinaryPlane, RgbImage, Sample};
use crate::rng::RngStream;

struct Canvas {
    width: u32,
    height: u32,
    channels: [Vec<f64>; 3],
    truth: Vec<bool>,
}

impl Canvas {
    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    fn stamp_vessel(&mut self, x: f64, y: f64, radius: f64, darkness: [f64; 3]) {
        let (w, h) = (self.width as i64, self.height as i64);
        let r = radius.ceil() as i64;
        let (cx, cy) = (x.round() as i64, y.round() as i64);
        for yy in (cy - r).max(0)..=(cy + r).min(h - 1) {
            for xx in (cx - r).max(0)..=(cx + r).min(w - 1) {
                let dx = xx as f64 - x;
                let dy = yy as f64 - y;
                if dx * dx + dy * dy <= radius * radius {
                    let i = self.idx(xx as u32, yy as u32);
                    for c in 0..3 {
                        self.channels[c][i] *= darkness[c];
                    }
                    self.truth[i] = true;
                }
            }
        }
    }
}

fn quadratic_bezier(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64), t: f64) -> (f64, f64) {
    let u = 1.0 - t;
    (
        u * u * p0.0 + 2.0 * u * t * p1.0 + t * t * p2.0,
        u * u * p0.1 + 2.0 * u * t * p1.1 + t * t * p2.1,
    )
}

/// Generate a fundus-like sample: image, vessel ground truth and
/// field-of-view mask. Identical `(width, height, seed)` always produce the
/// identical sample.
pub fn synthetic_fundus(width: u32, height: u32, seed: u64) -> Sample {
    let mut rng = RngStream::new(seed);
    let n = width as usize * height as usize;
    let mut canvas = Canvas {
        width,
        height,
        channels: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        truth: vec![false; n],
    };

    let cx = width as f64 / 2.0;
    let cy = height as f64 / 2.0;
    let fov_radius = 0.47 * width.min(height) as f64;

    // warm background with radial shading inside the field of view
    let base = [0.82, 0.46, 0.24];
    let mut fov = vec![false; n];
    for y in 0..height {
        for x in 0..width {
            let i = canvas.idx(x, y);
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let r = (dx * dx + dy * dy).sqrt();
            if r <= fov_radius {
                fov[i] = true;
                let shade = 1.0 - 0.30 * (r / fov_radius).powi(2);
                let ripple =
                    0.03 * ((x as f64 * 0.11).sin() * (y as f64 * 0.07).cos());
                for c in 0..3 {
                    canvas.channels[c][i] = clamp_unit(base[c] * shade + ripple);
                }
            } else {
                for c in 0..3 {
                    canvas.channels[c][i] = 0.015;
                }
            }
        }
    }

    // bright optic disc, offset from center
    let disc_angle = rng.range(-0.4, 0.4);
    let disc = (
        cx + 0.55 * fov_radius * disc_angle.cos(),
        cy + 0.55 * fov_radius * disc_angle.sin(),
    );
    let disc_radius = 0.14 * fov_radius;
    for y in 0..height {
        for x in 0..width {
            let dx = x as f64 - disc.0;
            let dy = y as f64 - disc.1;
            let d = (dx * dx + dy * dy).sqrt();
            if d < disc_radius {
                let i = canvas.idx(x, y);
                let lift = 0.25 * (1.0 - d / disc_radius);
                for c in 0..3 {
                    canvas.channels[c][i] = clamp_unit(canvas.channels[c][i] + lift);
                }
            }
        }
    }

    // vessel tree: curved branches from the disc toward the rim, tapering
    let darkness = [0.45, 0.30, 0.40];
    let branches = 7;
    for b in 0..branches {
        let spread = b as f64 / branches as f64 * std::f64::consts::TAU;
        let angle = spread + rng.range(-0.25, 0.25);
        let reach = fov_radius * rng.range(0.8, 0.98);
        let end = (cx + reach * angle.cos(), cy + reach * angle.sin());
        let mid_angle = angle + rng.range(-0.5, 0.5);
        let mid = (
            disc.0 + 0.5 * reach * mid_angle.cos(),
            disc.1 + 0.5 * reach * mid_angle.sin(),
        );
        let start_width = rng.range(1.4, 2.2);
        let steps = (2.0 * reach) as usize + 8;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let (px, py) = quadratic_bezier(disc, mid, end, t);
            let d = ((px - cx).powi(2) + (py - cy).powi(2)).sqrt();
            if d > fov_radius - 1.0 {
                break;
            }
            let radius = start_width * (1.0 - 0.6 * t);
            canvas.stamp_vessel(px, py, radius, darkness);
        }
    }

    // mild sensor noise
    for i in 0..n {
        if fov[i] {
            let noise = rng.range(-0.012, 0.012);
            for c in 0..3 {
                canvas.channels[c][i] = clamp_unit(canvas.channels[c][i] + noise);
            }
        }
    }

    let mut data = Vec::with_capacity(n * 3);
    for i in 0..n {
        for c in 0..3 {
            data.push(quantize_sample(canvas.channels[c][i]));
        }
    }
    let truth: Vec<bool> = canvas
        .truth
        .iter()
        .zip(&fov)
        .map(|(&t, &f)| t && f)
        .collect();

    Sample {
        image: RgbImage::from_raw(width, height, data).expect("buffer sized to dimensions"),
        truth: Some(BinaryPlane::new(width, height, truth).expect("buffer sized to dimensions")),
        fov: Some(BinaryPlane::new(width, height, fov).expect("buffer sized to dimensions")),
    }
}
