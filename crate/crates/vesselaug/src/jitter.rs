//! Brightness, contrast and saturation jitter, and the deterministic
//! 30-dataset robustness sweep built from them.
//!
//! The jitters are affine blends on normalized values:
//!
//! * brightness: `v * (1 - b)`
//! * contrast:   `v * (1 - c) + mean_gray(input) * c`
//! * saturation: `v * (1 - s) + gray(pixel) * s`
//!
//! with every output clamped to `[0, 1]` before quantization. The sweep
//! varies each ratio over `-0.5..=0.5` in steps of `0.1`; ratio 0 is the
//! untouched source dataset and is excluded, leaving 10 ratios per kind and
//! 30 datasets in total.

use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{Channel, RgbImage, RgbReal};
use crate::io::{
    load_image, save_image, DatasetManifest, ManifestEntry, SweepEntry, SweepManifest, SweepStatus,
};

/// The three jitter dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JitterKind {
    Brightness,
    Contrast,
    Saturation,
}

impl JitterKind {
    pub const ALL: [JitterKind; 3] = [
        JitterKind::Brightness,
        JitterKind::Contrast,
        JitterKind::Saturation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JitterKind::Brightness => "brightness",
            JitterKind::Contrast => "contrast",
            JitterKind::Saturation => "saturation",
        }
    }
}

impl FromStr for JitterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brightness" => Ok(JitterKind::Brightness),
            "contrast" => Ok(JitterKind::Contrast),
            "saturation" => Ok(JitterKind::Saturation),
            other => Err(Error::InvalidParameter(format!(
                "unknown jitter kind {other:?} (expected brightness, contrast or saturation)"
            ))),
        }
    }
}

impl std::fmt::Display for JitterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One jitter transform: a kind and its ratio in `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JitterParams {
    pub kind: JitterKind,
    pub ratio: f64,
}

impl JitterParams {
    pub fn new(kind: JitterKind, ratio: f64) -> Result<Self> {
        validate_ratio(kind.name(), ratio)?;
        Ok(JitterParams { kind, ratio })
    }
}

fn validate_ratio(what: &str, ratio: f64) -> Result<()> {
    if !(ratio.is_finite() && (-1.0..=1.0).contains(&ratio)) {
        return Err(Error::InvalidParameter(format!(
            "{what} jitter ratio must lie in [-1, 1], got {ratio}"
        )));
    }
    Ok(())
}

/// Brightness jitter on the float view: every sample scaled by `1 - b`,
/// clamped.
pub fn brightness_real(real: &RgbReal, b: f64) -> Result<RgbReal> {
    validate_ratio("brightness", b)?;
    real.map(|_, v| v * (1.0 - b)).clamp01()
}

/// Contrast jitter on the float view: blend toward the scalar mean gray of
/// the input, clamped.
pub fn contrast_real(real: &RgbReal, c: f64) -> Result<RgbReal> {
    validate_ratio("contrast", c)?;
    let gray = real.to_gray();
    if gray.data().is_empty() {
        return Err(Error::EmptyInput("contrast of an empty image".into()));
    }
    let mean = gray.data().iter().sum::<f64>() / gray.data().len() as f64;
    real.map(|_, v| v * (1.0 - c) + mean * c).clamp01()
}

/// Saturation jitter on the float view: per-pixel blend toward that pixel's
/// gray value, clamped.
pub fn saturation_real(real: &RgbReal, s: f64) -> Result<RgbReal> {
    validate_ratio("saturation", s)?;
    let gray = real.to_gray();
    let planes = Channel::ALL.map(|ch| {
        let p = real.plane(ch);
        let data = p
            .data()
            .iter()
            .zip(gray.data())
            .map(|(&v, &g)| v * (1.0 - s) + g * s)
            .collect();
        crate::image::FloatPlane::from_vec_unchecked(p.width(), p.height(), data)
    });
    RgbReal::from_planes(planes)?.clamp01()
}

pub fn brightness(img: &RgbImage, b: f64) -> Result<RgbImage> {
    Ok(brightness_real(&img.to_real(), b)?.quantize())
}

pub fn contrast(img: &RgbImage, c: f64) -> Result<RgbImage> {
    Ok(contrast_real(&img.to_real(), c)?.quantize())
}

pub fn saturation(img: &RgbImage, s: f64) -> Result<RgbImage> {
    Ok(saturation_real(&img.to_real(), s)?.quantize())
}

/// Apply the jitter selected by `params`.
pub fn apply_jitter(img: &RgbImage, params: &JitterParams) -> Result<RgbImage> {
    match params.kind {
        JitterKind::Brightness => brightness(img, params.ratio),
        JitterKind::Contrast => contrast(img, params.ratio),
        JitterKind::Saturation => saturation(img, params.ratio),
    }
}

/// Specification of a robustness sweep: the ratios to apply for each kind.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub ratios: Vec<f64>,
    pub kinds: Vec<JitterKind>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            ratios: (-5..=5)
                .filter(|&i| i != 0)
                .map(|i| f64::from(i) / 10.0)
                .collect(),
            kinds: JitterKind::ALL.to_vec(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.is_empty() || self.kinds.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one ratio and one kind".into(),
            ));
        }
        for &r in &self.ratios {
            validate_ratio("sweep", r)?;
        }
        Ok(())
    }

    /// All `(kind, ratio)` pairs, kind-major, in specification order.
    pub fn combinations(&self) -> Vec<(JitterKind, f64)> {
        self.kinds
            .iter()
            .flat_map(|&k| self.ratios.iter().map(move |&r| (k, r)))
            .collect()
    }
}

/// Directory name of one sweep dataset, e.g. `brightness_-0.3`.
pub fn dataset_name(kind: JitterKind, ratio: f64) -> String {
    format!("{}_{}", kind.name(), ratio)
}

/// Write one jittered copy of a dataset into `out_dir`.
///
/// Images are jittered and re-encoded under `images/`; ground-truth and
/// field-of-view masks are copied byte-for-byte under `truth/` and `fov/`.
/// A dataset manifest is written alongside.
pub fn generate_jittered_dataset(
    manifest: &DatasetManifest,
    params: &JitterParams,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    std::fs::create_dir_all(out_dir.join("images"))
        .map_err(|e| Error::io(out_dir.join("images"), e))?;
    let mut entries = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let img = load_image(&manifest.resolve(&entry.image))?;
        let jittered = apply_jitter(&img, params)?;
        let image_rel = format!("images/{}.png", entry.id);
        save_image(&jittered, &out_dir.join(&image_rel))?;

        let truth_rel = copy_mask(manifest, entry.truth.as_deref(), out_dir, "truth", &entry.id)?;
        let fov_rel = copy_mask(manifest, entry.fov.as_deref(), out_dir, "fov", &entry.id)?;
        entries.push(ManifestEntry {
            id: entry.id.clone(),
            image: image_rel,
            truth: truth_rel,
            fov: fov_rel,
        });
    }
    let out_manifest = DatasetManifest {
        root: out_dir.to_path_buf(),
        entries,
    };
    out_manifest.save(&out_dir.join("manifest.txt"))?;
    Ok(out_manifest)
}

fn copy_mask(
    manifest: &DatasetManifest,
    rel: Option<&str>,
    out_dir: &Path,
    sub: &str,
    id: &str,
) -> Result<Option<String>> {
    let Some(rel) = rel else { return Ok(None) };
    let src = manifest.resolve(rel);
    let ext = src
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("png")
        .to_string();
    let dst_rel = format!("{sub}/{id}.{ext}");
    let dst = out_dir.join(&dst_rel);
    if let Some(parent) = dst.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.to_path_buf(), e))?;
    }
    std::fs::copy(&src, &dst).map_err(|e| Error::io(src, e))?;
    Ok(Some(dst_rel))
}

/// Generate the full sweep under `out_root`: one dataset per `(kind, ratio)`
/// pair, each in a directory named by [`dataset_name`], plus a sweep
/// manifest listing them all.
///
/// Failures are recorded per dataset in the sweep manifest instead of
/// aborting the whole sweep.
pub fn generate_sweep(
    manifest: &DatasetManifest,
    spec: &SweepSpec,
    out_root: &Path,
) -> Result<SweepManifest> {
    spec.validate()?;
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root.to_path_buf(), e))?;
    let entries: Vec<SweepEntry> = spec
        .combinations()
        .into_par_iter()
        .map(|(kind, ratio)| {
            let name = dataset_name(kind, ratio);
            let params = JitterParams { kind, ratio };
            let status = match generate_jittered_dataset(manifest, &params, &out_root.join(&name)) {
                Ok(_) => SweepStatus::Ok,
                Err(e) => SweepStatus::Failed(e.to_string()),
            };
            SweepEntry {
                kind,
                ratio,
                path: name,
                status,
            }
        })
        .collect();
    let sweep = SweepManifest {
        root: out_root.to_path_buf(),
        entries,
    };
    sweep.save(&out_root.join("sweep.txt"))?;
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::mean_gray;

    fn gradient(w: u32, h: u32) -> RgbImage {
        let mut img = RgbImage::filled(w, h, [0, 0, 0]);
        for y in 0..h {
            for x in 0..w {
                // mid-range values so blends never clamp
                let v = 64 + ((x * 7 + y * 13) % 128) as u8;
                img.set_pixel(x, y, [v, v.wrapping_add(16), v.wrapping_sub(16)]);
            }
        }
        img
    }

    #[test]
    fn all_jitters_identity_at_zero() {
        let img = gradient(9, 7);
        assert_eq!(brightness(&img, 0.0).unwrap(), img);
        assert_eq!(contrast(&img, 0.0).unwrap(), img);
        assert_eq!(saturation(&img, 0.0).unwrap(), img);
    }

    #[test]
    fn brightness_one_is_black() {
        let img = gradient(5, 5);
        let out = brightness(&img, 1.0).unwrap();
        assert!(out.data().iter().all(|&s| s == 0));
    }

    #[test]
    fn brightness_clamps_high() {
        let img = RgbImage::filled(1, 1, [200, 200, 200]);
        let out = brightness(&img, -0.5).unwrap();
        // 200/255 * 1.5 > 1 -> clamps to 255
        assert_eq!(out.pixel(0, 0), [255, 255, 255]);
    }

    #[test]
    fn contrast_one_is_uniform_mean_gray() {
        let img = gradient(6, 6);
        let mean = mean_gray(&img).unwrap();
        let out = contrast(&img, 1.0).unwrap();
        let expected = crate::image::quantize_sample(mean);
        assert!(out.data().iter().all(|&s| s == expected));
    }

    #[test]
    fn contrast_blend_arithmetic() {
        // gray samples 0.2 and 0.8 -> mean gray 0.5; 0.2 blended halfway to
        // 0.5 is 0.35
        let mut img = RgbImage::filled(2, 1, [51, 51, 51]);
        img.set_pixel(1, 0, [204, 204, 204]);
        let real = contrast_real(&img.to_real(), 0.5).unwrap();
        assert!((real.plane(Channel::R).get(0, 0) - 0.35).abs() < 1e-12);
    }

    #[test]
    fn saturation_one_is_grayscale() {
        let img = gradient(6, 4);
        let out = saturation(&img, 1.0).unwrap();
        for px in out.data().chunks_exact(3) {
            assert_eq!(px[0], px[1]);
            assert_eq!(px[1], px[2]);
        }
    }

    #[test]
    fn saturation_fixed_on_achromatic() {
        let img = RgbImage::filled(4, 4, [99, 99, 99]);
        assert_eq!(saturation(&img, 0.8).unwrap(), img);
        assert_eq!(saturation(&img, -0.8).unwrap(), img);
    }

    #[test]
    fn out_of_range_ratios_error() {
        let img = gradient(2, 2);
        assert!(brightness(&img, 1.5).is_err());
        assert!(contrast(&img, -1.01).is_err());
        assert!(saturation(&img, f64::NAN).is_err());
    }

    #[test]
    fn contrast_and_saturation_preserve_mean_gray() {
        let img = gradient(16, 16);
        let real = img.to_real();
        let mean_in = real.to_gray().data().iter().sum::<f64>() / 256.0;
        for out in [
            contrast_real(&real, 0.7).unwrap(),
            saturation_real(&real, 0.6).unwrap(),
        ] {
            let mean_out = out.to_gray().data().iter().sum::<f64>() / 256.0;
            assert!((mean_out - mean_in).abs() < 1e-9);
        }
    }

    #[test]
    fn jitter_does_not_change_dimensions() {
        let img = gradient(11, 3);
        let out = apply_jitter(
            &img,
            &JitterParams::new(JitterKind::Contrast, 0.4).unwrap(),
        )
        .unwrap();
        assert_eq!((out.width(), out.height()), (11, 3));
    }

    #[test]
    fn default_sweep_has_thirty_combinations() {
        let spec = SweepSpec::default();
        let combos = spec.combinations();
        assert_eq!(combos.len(), 30);
        assert_eq!(spec.ratios.len(), 10);
        assert!(spec.ratios.iter().all(|&r| r != 0.0));
        assert_eq!(spec.ratios[0], -0.5);
        assert_eq!(*spec.ratios.last().unwrap(), 0.5);
    }

    #[test]
    fn dataset_names_carry_signed_ratio() {
        assert_eq!(
            dataset_name(JitterKind::Brightness, -0.3),
            "brightness_-0.3"
        );
        assert_eq!(dataset_name(JitterKind::Saturation, 0.1), "saturation_0.1");
    }
}
