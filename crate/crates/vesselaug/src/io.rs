//! Bit-exact raster and manifest I/O.
//!
//! The canonical raster format is PNG. All writes go through a
//! write-temp-then-rename helper so an interrupted run never leaves a
//! truncated file behind.
//!
//! Manifests are line-oriented text with an explicit version header.
//! A dataset manifest looks like
//!
//! ```text
//! vesselaug-manifest 1
//! # comment lines and blank lines are ignored
//! id=21	image=images/21.png	truth=truth/21.png	fov=fov/21.png
//! ```
//!
//! with tab-separated `key=value` fields (`id` and `image` required,
//! `truth` and `fov` optional). Paths are relative to the manifest's
//! directory. A sweep manifest (`vesselaug-sweep 1`) lists one generated
//! dataset per line with its jitter kind, ratio, directory and status.

use std::collections::HashSet;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{quantize_sample, BinaryPlane, FloatPlane, RgbImage};
use crate::jitter::JitterKind;

pub const MANIFEST_HEADER: &str = "vesselaug-manifest 1";
pub const SWEEP_HEADER: &str = "vesselaug-sweep 1";

/// Write `bytes` to `path` atomically (temp file in the same directory,
/// then rename). Parent directories are created as needed.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(|e| Error::io(parent.clone(), e))?;
    let mut tmp =
        tempfile::NamedTempFile::new_in(&parent).map_err(|e| Error::io(parent.clone(), e))?;
    tmp.write_all(bytes)
        .map_err(|e| Error::io(path.to_path_buf(), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path.to_path_buf(), e.error))?;
    Ok(())
}

fn decode(path: &Path) -> Result<image::DynamicImage> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path.to_path_buf(), io),
        other => Error::Decode {
            path: path.to_path_buf(),
            source: other,
        },
    })?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::UnsupportedRaster {
            path: path.to_path_buf(),
            reason: "image has a zero dimension".into(),
        });
    }
    Ok(img)
}

/// Load an 8-bit RGB image. Grayscale sources are promoted to three equal
/// channels; anything deeper or carrying alpha is rejected by name.
pub fn load_image(path: &Path) -> Result<RgbImage> {
    match decode(path)? {
        image::DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            RgbImage::from_raw(w, h, buf.into_raw())
        }
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            let data = buf.into_raw().iter().flat_map(|&v| [v, v, v]).collect();
            RgbImage::from_raw(w, h, data)
        }
        other => Err(Error::UnsupportedRaster {
            path: path.to_path_buf(),
            reason: format!(
                "color input must be 8-bit RGB or 8-bit gray, got {:?}",
                other.color()
            ),
        }),
    }
}

/// Save an image as 8-bit RGB PNG, atomically.
pub fn save_image(img: &RgbImage, path: &Path) -> Result<()> {
    let buf: image::ImageBuffer<image::Rgb<u8>, Vec<u8>> =
        image::ImageBuffer::from_raw(img.width(), img.height(), img.data().to_vec())
            .expect("raster length matches dimensions");
    let mut bytes = Vec::new();
    buf.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Encode {
            path: path.to_path_buf(),
            source: e,
        })?;
    atomic_write(path, &bytes)
}

/// A binary mask together with the number of source samples that were
/// neither 0 nor full-range and had to be thresholded.
#[derive(Clone, Debug)]
pub struct MaskLoad {
    pub plane: BinaryPlane,
    pub non_extremal: u64,
}

/// Load a binary mask: samples above half range map to 1, the rest to 0.
/// Multi-channel sources are accepted only when all channels agree.
pub fn load_binary_mask(path: &Path) -> Result<MaskLoad> {
    let (w, h, samples, max): (u32, u32, Vec<u32>, u32) = match decode(path)? {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            (w, h, buf.into_raw().iter().map(|&v| u32::from(v)).collect(), 255)
        }
        image::DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            (
                w,
                h,
                buf.into_raw().iter().map(|&v| u32::from(v)).collect(),
                65535,
            )
        }
        image::DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            let raw = buf.into_raw();
            let mut samples = Vec::with_capacity(raw.len() / 3);
            for (i, px) in raw.chunks_exact(3).enumerate() {
                if px[0] != px[1] || px[1] != px[2] {
                    return Err(Error::UnsupportedRaster {
                        path: path.to_path_buf(),
                        reason: format!(
                            "mask pixel {i} has disagreeing channels {:?}",
                            (px[0], px[1], px[2])
                        ),
                    });
                }
                samples.push(u32::from(px[0]));
            }
            (w, h, samples, 255)
        }
        other => {
            return Err(Error::UnsupportedRaster {
                path: path.to_path_buf(),
                reason: format!("mask must be single-channel, got {:?}", other.color()),
            })
        }
    };
    let half = max / 2;
    let non_extremal = samples.iter().filter(|&&v| v != 0 && v != max).count() as u64;
    let data = samples.iter().map(|&v| v > half).collect();
    Ok(MaskLoad {
        plane: BinaryPlane::new(w, h, data)?,
        non_extremal,
    })
}

/// Save a binary mask as an 8-bit gray PNG with samples 0 and 255.
pub fn save_mask(mask: &BinaryPlane, path: &Path) -> Result<()> {
    let data: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf: image::ImageBuffer<image::Luma<u8>, Vec<u8>> =
        image::ImageBuffer::from_raw(mask.width(), mask.height(), data)
            .expect("raster length matches dimensions");
    let mut bytes = Vec::new();
    buf.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Encode {
            path: path.to_path_buf(),
            source: e,
        })?;
    atomic_write(path, &bytes)
}

/// Bit depth of an encoded probability map. Sixteen bits keep the
/// quantization error of AUC computations below 1e-4.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProbabilityDepth {
    Eight,
    #[default]
    Sixteen,
}

/// Save a probability map (values in `[0, 1]`) as a single-channel PNG at
/// the requested depth.
pub fn save_probability_map(
    plane: &FloatPlane,
    path: &Path,
    depth: ProbabilityDepth,
) -> Result<()> {
    if let Some(v) = plane.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidParameter(format!(
            "probability map value {v} outside [0, 1]"
        )));
    }
    let mut bytes = Vec::new();
    match depth {
        ProbabilityDepth::Eight => {
            let data: Vec<u8> = plane.data().iter().map(|&v| quantize_sample(v)).collect();
            let buf: image::ImageBuffer<image::Luma<u8>, Vec<u8>> =
                image::ImageBuffer::from_raw(plane.width(), plane.height(), data)
                    .expect("raster length matches dimensions");
            buf.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        }
        ProbabilityDepth::Sixteen => {
            let data: Vec<u16> = plane
                .data()
                .iter()
                .map(|&v| (v * 65535.0).round() as u16)
                .collect();
            let buf: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
                image::ImageBuffer::from_raw(plane.width(), plane.height(), data)
                    .expect("raster length matches dimensions");
            buf.write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        }
    }
    .map_err(|e| Error::Encode {
        path: path.to_path_buf(),
        source: e,
    })?;
    atomic_write(path, &bytes)
}

/// Load a probability map from an 8- or 16-bit single-channel PNG, mapping
/// stored samples to `stored / (2^bits - 1)`.
pub fn load_probability_map(path: &Path) -> Result<FloatPlane> {
    match decode(path)? {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            let data = buf.into_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
            FloatPlane::new(w, h, data)
        }
        image::DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            let data = buf
                .into_raw()
                .iter()
                .map(|&v| f64::from(v) / 65535.0)
                .collect();
            FloatPlane::new(w, h, data)
        }
        other => Err(Error::UnsupportedRaster {
            path: path.to_path_buf(),
            reason: format!(
                "probability map must be single-channel gray, got {:?}",
                other.color()
            ),
        }),
    }
}

/// One dataset entry: an image with optional ground truth and
/// field-of-view mask, all relative to the manifest root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub image: String,
    pub truth: Option<String>,
    pub fov: Option<String>,
}

/// A dataset described by a manifest file.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Resolve a manifest-relative path against the manifest root.
    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        let root = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();
        let mut lines = numbered_lines(&text);
        expect_header(path, lines.next(), MANIFEST_HEADER)?;

        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, line) in lines {
            let mut id = None;
            let mut image = None;
            let mut truth = None;
            let mut fov = None;
            for field in line.split('\t') {
                let (key, value) = field.split_once('=').ok_or_else(|| Error::Manifest {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!("field {field:?} is not key=value"),
                })?;
                let slot = match key {
                    "id" => &mut id,
                    "image" => &mut image,
                    "truth" => &mut truth,
                    "fov" => &mut fov,
                    other => {
                        return Err(Error::Manifest {
                            path: path.to_path_buf(),
                            line: lineno,
                            message: format!("unknown field {other:?}"),
                        })
                    }
                };
                if slot.replace(value.to_string()).is_some() {
                    return Err(Error::Manifest {
                        path: path.to_path_buf(),
                        line: lineno,
                        message: format!("duplicate field {key:?}"),
                    });
                }
            }
            let id = id.ok_or_else(|| Error::Manifest {
                path: path.to_path_buf(),
                line: lineno,
                message: "missing required field \"id\"".into(),
            })?;
            let image = image.ok_or_else(|| Error::Manifest {
                path: path.to_path_buf(),
                line: lineno,
                message: "missing required field \"image\"".into(),
            })?;
            if !seen.insert(id.clone()) {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!("duplicate id {id:?}"),
                });
            }
            entries.push(ManifestEntry {
                id,
                image,
                truth,
                fov,
            });
        }
        Ok(DatasetManifest { root, entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut seen = HashSet::new();
        for entry in &self.entries {
            if !seen.insert(&entry.id) {
                return Err(Error::InvalidParameter(format!(
                    "manifest has duplicate id {:?}",
                    entry.id
                )));
            }
        }
        let mut text = String::from(MANIFEST_HEADER);
        text.push('\n');
        for entry in &self.entries {
            text.push_str(&format!("id={}\timage={}", entry.id, entry.image));
            if let Some(t) = &entry.truth {
                text.push_str(&format!("\ttruth={t}"));
            }
            if let Some(f) = &entry.fov {
                text.push_str(&format!("\tfov={f}"));
            }
            text.push('\n');
        }
        atomic_write(path, text.as_bytes())
    }
}

/// Outcome of generating one sweep dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SweepStatus {
    Ok,
    Failed(String),
}

impl SweepStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, SweepStatus::Ok)
    }
}

/// One generated sweep dataset: its jitter kind, ratio, directory relative
/// to the sweep root, and status.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub kind: JitterKind,
    pub ratio: f64,
    pub path: String,
    pub status: SweepStatus,
}

/// Manifest listing every dataset of a jitter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepManifest {
    pub root: PathBuf,
    pub entries: Vec<SweepEntry>,
}

impl SweepManifest {
    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        let root = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();
        let mut lines = numbered_lines(&text);
        expect_header(path, lines.next(), SWEEP_HEADER)?;

        let mut entries = Vec::new();
        for (lineno, line) in lines {
            let err = |message: String| Error::Manifest {
                path: path.to_path_buf(),
                line: lineno,
                message,
            };
            let mut kind = None;
            let mut ratio = None;
            let mut dir = None;
            let mut status = None;
            for field in line.split('\t') {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| err(format!("field {field:?} is not key=value")))?;
                match key {
                    "kind" => kind = Some(value.parse::<JitterKind>().map_err(|e| err(e.to_string()))?),
                    "ratio" => {
                        ratio = Some(value.parse::<f64>().map_err(|e| {
                            err(format!("ratio {value:?} is not a number: {e}"))
                        })?)
                    }
                    "path" => dir = Some(value.to_string()),
                    "status" => {
                        status = Some(match value.strip_prefix("failed:") {
                            Some(msg) => SweepStatus::Failed(msg.to_string()),
                            None if value == "ok" => SweepStatus::Ok,
                            None => return Err(err(format!("unknown status {value:?}"))),
                        })
                    }
                    other => return Err(err(format!("unknown field {other:?}"))),
                }
            }
            entries.push(SweepEntry {
                kind: kind.ok_or_else(|| err("missing required field \"kind\"".into()))?,
                ratio: ratio.ok_or_else(|| err("missing required field \"ratio\"".into()))?,
                path: dir.ok_or_else(|| err("missing required field \"path\"".into()))?,
                status: status.ok_or_else(|| err("missing required field \"status\"".into()))?,
            });
        }
        Ok(SweepManifest { root, entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::from(SWEEP_HEADER);
        text.push('\n');
        for e in &self.entries {
            let status = match &e.status {
                SweepStatus::Ok => "ok".to_string(),
                SweepStatus::Failed(msg) => {
                    format!("failed:{}", msg.replace(['\t', '\n'], " "))
                }
            };
            text.push_str(&format!(
                "kind={}\tratio={}\tpath={}\tstatus={}\n",
                e.kind, e.ratio, e.path, status
            ));
        }
        atomic_write(path, text.as_bytes())
    }
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn expect_header(path: &Path, first: Option<(usize, &str)>, header: &str) -> Result<()> {
    match first {
        Some((_, line)) if line.trim() == header => Ok(()),
        Some((lineno, line)) => Err(Error::Manifest {
            path: path.to_path_buf(),
            line: lineno,
            message: format!("expected header {header:?}, found {line:?}"),
        }),
        None => Err(Error::Manifest {
            path: path.to_path_buf(),
            line: 1,
            message: format!("empty file, expected header {header:?}"),
        }),
    }
}
