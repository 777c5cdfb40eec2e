//! Shared oracles and helpers for the integration suites.
//!
//! The oracles are deliberately naive, independent rewrites of the
//! definitions (double loops, pairwise counting) so they can catch errors
//! in the optimized implementations.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use vesselaug::image::{FloatPlane, RgbImage};
use vesselaug::metrics::RocPoint;
use vesselaug::morphology::{StructuringElement, StructuringElementBank};
use vesselaug::rng::RngStream;

fn clamp_coord(v: i64, hi: i64) -> usize {
    v.clamp(0, hi - 1) as usize
}

/// Windowed minimum over the element's offsets with edge replication,
/// written as a plain double loop.
pub fn oracle_erode(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    let (w, h) = (plane.width() as i64, plane.height() as i64);
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut best = f64::INFINITY;
            for &(dx, dy) in se.offsets() {
                let xx = clamp_coord(x + dx as i64, w);
                let yy = clamp_coord(y + dy as i64, h);
                let v = plane.data()[yy * w as usize + xx];
                if v < best {
                    best = v;
                }
            }
            out.push(best);
        }
    }
    FloatPlane::new(plane.width(), plane.height(), out).unwrap()
}

/// Windowed maximum with edge replication.
pub fn oracle_dilate(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    let (w, h) = (plane.width() as i64, plane.height() as i64);
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut best = f64::NEG_INFINITY;
            for &(dx, dy) in se.offsets() {
                let xx = clamp_coord(x + dx as i64, w);
                let yy = clamp_coord(y + dy as i64, h);
                let v = plane.data()[yy * w as usize + xx];
                if v > best {
                    best = v;
                }
            }
            out.push(best);
        }
    }
    FloatPlane::new(plane.width(), plane.height(), out).unwrap()
}

/// Opening oracle: replicate-border erosion, then for every target pixel a
/// full scan over all source pixels and offsets to find which eroded
/// values reach it (the adjoint maximum), written as a brute-force triple
/// loop.
pub fn oracle_open(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    let eroded = oracle_erode(plane, se);
    let (w, h) = (plane.width() as i64, plane.height() as i64);
    let mut out = vec![f64::NEG_INFINITY; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let v = eroded.data()[(y * w + x) as usize];
            for &(dx, dy) in se.offsets() {
                let xx = clamp_coord(x + dx as i64, w);
                let yy = clamp_coord(y + dy as i64, h);
                let cell = &mut out[yy * w as usize + xx];
                if v > *cell {
                    *cell = v;
                }
            }
        }
    }
    FloatPlane::new(plane.width(), plane.height(), out).unwrap()
}

pub fn oracle_top_hat(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    let opened = oracle_open(plane, se);
    let data = plane
        .data()
        .iter()
        .zip(opened.data())
        .map(|(&a, &b)| a - b)
        .collect();
    FloatPlane::new(plane.width(), plane.height(), data).unwrap()
}

pub fn oracle_top_hat_sum(plane: &FloatPlane, bank: &StructuringElementBank) -> FloatPlane {
    let mut acc = vec![0.0; plane.data().len()];
    for se in bank.elements() {
        let th = oracle_top_hat(plane, se);
        for (a, &v) in acc.iter_mut().zip(th.data()) {
            *a += v;
        }
    }
    FloatPlane::new(plane.width(), plane.height(), acc).unwrap()
}

/// Pairwise Mann-Whitney oracle: the fraction of (positive, negative)
/// pairs won, ties counted one half.
pub fn oracle_auc(scores: &[(f64, bool)]) -> f64 {
    let positives: Vec<f64> = scores.iter().filter(|(_, t)| *t).map(|(s, _)| *s).collect();
    let negatives: Vec<f64> = scores.iter().filter(|(_, t)| !t).map(|(s, _)| *s).collect();
    assert!(!positives.is_empty() && !negatives.is_empty());
    let mut numerator = 0.0;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                numerator += 1.0;
            } else if p == n {
                numerator += 0.5;
            }
        }
    }
    numerator / (positives.len() as f64 * negatives.len() as f64)
}

/// Trapezoidal area under a ROC polyline, accumulated with Neumaier
/// summation.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for pair in points.windows(2) {
        let term = (pair[1].fpr - pair[0].fpr) * (pair[0].tpr + pair[1].tpr) / 2.0;
        let t = sum + term;
        compensation += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    sum + compensation
}

/// Random plane with values in [0, 1).
pub fn random_plane(rng: &mut RngStream, width: u32, height: u32) -> FloatPlane {
    let data = (0..width as usize * height as usize)
        .map(|_| rng.unit())
        .collect();
    FloatPlane::new(width, height, data).unwrap()
}

/// Random 8-bit RGB image.
pub fn random_image(rng: &mut RngStream, width: u32, height: u32) -> RgbImage {
    let data = (0..width as usize * height as usize * 3)
        .map(|_| (rng.unit() * 256.0) as u8)
        .collect();
    RgbImage::from_raw(width, height, data).unwrap()
}

/// Write a synthetic dataset (images, truth and fov masks, manifest) under
/// `dir` and return its manifest.
pub fn write_toy_dataset(
    dir: &Path,
    count: u32,
    size: u32,
    seed: u64,
) -> vesselaug::io::DatasetManifest {
    use vesselaug::io::{save_image, save_mask, DatasetManifest, ManifestEntry};
    let mut entries = Vec::new();
    for i in 0..count {
        let sample = vesselaug::synthetic::synthetic_fundus(size, size, seed + u64::from(i));
        let id = format!("img{i:02}");
        save_image(&sample.image, &dir.join(format!("images/{id}.png"))).unwrap();
        save_mask(
            sample.truth.as_ref().unwrap(),
            &dir.join(format!("truth/{id}.png")),
        )
        .unwrap();
        save_mask(
            sample.fov.as_ref().unwrap(),
            &dir.join(format!("fov/{id}.png")),
        )
        .unwrap();
        entries.push(ManifestEntry {
            id: id.clone(),
            image: format!("images/{id}.png"),
            truth: Some(format!("truth/{id}.png")),
            fov: Some(format!("fov/{id}.png")),
        });
    }
    let manifest = DatasetManifest {
        root: dir.to_path_buf(),
        entries,
    };
    manifest.save(&dir.join("manifest.txt")).unwrap();
    manifest
}

/// Snapshot of a directory tree: relative path -> file bytes.
pub fn snapshot_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let entry = entry.unwrap();
            let path = entry.path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
