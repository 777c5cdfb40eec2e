//! Grayscale flat morphology with rotated linear structuring elements.
//!
//! The vessel response is the sum of white top-hat transforms taken over a
//! bank of line segments whose angles are equally distributed in `[0, pi)`.
//! A line longer than the vessel width and not aligned with it erases the
//! vessel under opening, so the top-hat lights up exactly there.

use crate::error::{Error, Result};
use crate::image::FloatPlane;

/// Flat line-segment structuring element centered at the origin.
///
/// Offsets are produced by stepping the dominant axis one pixel at a time
/// and rounding the other coordinate (Bresenham-style), which keeps the
/// segment symmetric about the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuringElement {
    offsets: Vec<(i32, i32)>,
    angle: f64,
    length: u32,
}

impl StructuringElement {
    /// Line segment of `length` pixels at `angle` radians. `length` must be
    /// odd and at least 3.
    pub fn line(angle: f64, length: u32) -> Result<Self> {
        if length < 3 || length % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "structuring element length must be odd and >= 3, got {length}"
            )));
        }
        let half = (length as i32 - 1) / 2;
        let (sin, cos) = angle.sin_cos();
        let mut offsets = Vec::with_capacity(length as usize);
        if cos.abs() >= sin.abs() {
            let slope = sin / cos;
            for t in -half..=half {
                offsets.push((t, (t as f64 * slope).round() as i32));
            }
        } else {
            let slope = cos / sin;
            for t in -half..=half {
                offsets.push(((t as f64 * slope).round() as i32, t));
            }
        }
        Ok(StructuringElement {
            offsets,
            angle,
            length,
        })
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn length(&self) -> u32 {
        self.length
    }
}

/// Bank of line elements at angles `k * pi / num_angles`, all sharing one
/// length.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuringElementBank {
    elements: Vec<StructuringElement>,
    num_angles: u32,
}

impl StructuringElementBank {
    pub fn elements(&self) -> &[StructuringElement] {
        &self.elements
    }

    pub fn num_angles(&self) -> u32 {
        self.num_angles
    }

    pub fn length(&self) -> u32 {
        self.elements[0].length()
    }
}

/// Build a bank of `num_angles` line elements of the given length.
pub fn build_se_bank(num_angles: u32, length: u32) -> Result<StructuringElementBank> {
    if num_angles < 1 {
        return Err(Error::InvalidParameter(
            "structuring element bank needs at least one angle".into(),
        ));
    }
    let elements = (0..num_angles)
        .map(|k| StructuringElement::line(k as f64 * std::f64::consts::PI / num_angles as f64, length))
        .collect::<Result<Vec<_>>>()?;
    Ok(StructuringElementBank {
        elements,
        num_angles,
    })
}

#[inline]
fn replicated(plane: &FloatPlane, x: i64, y: i64) -> f64 {
    let xx = x.clamp(0, plane.width() as i64 - 1) as u32;
    let yy = y.clamp(0, plane.height() as i64 - 1) as u32;
    plane.get(xx, yy)
}

fn neighborhood_fold(
    plane: &FloatPlane,
    se: &StructuringElement,
    pick: impl Fn(f64, f64) -> f64,
) -> FloatPlane {
    let (w, h) = (plane.width(), plane.height());
    let mut data = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = replicated(plane, x + se.offsets[0].0 as i64, y + se.offsets[0].1 as i64);
            for &(dx, dy) in &se.offsets[1..] {
                acc = pick(acc, replicated(plane, x + dx as i64, y + dy as i64));
            }
            data.push(acc);
        }
    }
    FloatPlane::from_vec_unchecked(w, h, data)
}

/// Per-pixel minimum over the element's offsets. Out-of-bounds samples
/// replicate the nearest edge pixel.
pub fn erode(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    neighborhood_fold(plane, se, f64::min)
}

/// Per-pixel maximum over the element's offsets, with edge replication.
pub fn dilate(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    neighborhood_fold(plane, se, f64::max)
}

/// Dilation adjoint to the replicate-border erosion: a scatter max over
/// the same clamped windows. Identical to [`dilate`] away from the border;
/// at the border it is the pairing that keeps the opening anti-extensive
/// and idempotent on a finite raster, which the plain clamped dilation is
/// not.
fn adjoint_dilate(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    let (w, h) = (plane.width() as i64, plane.height() as i64);
    let mut data = vec![f64::NEG_INFINITY; plane.data().len()];
    for y in 0..h {
        for x in 0..w {
            let v = plane.get(x as u32, y as u32);
            for &(dx, dy) in se.offsets() {
                let xx = (x + dx as i64).clamp(0, w - 1) as usize;
                let yy = (y + dy as i64).clamp(0, h - 1) as usize;
                let cell = &mut data[yy * w as usize + xx];
                if v > *cell {
                    *cell = v;
                }
            }
        }
    }
    FloatPlane::from_vec_unchecked(plane.width(), plane.height(), data)
}

/// Morphological opening: erosion followed by the erosion's adjoint
/// dilation. Anti-extensive and idempotent, border included.
pub fn open(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    adjoint_dilate(&erode(plane, se), se)
}

/// White top-hat: `plane - open(plane)`. Non-negative by anti-extensivity
/// of the opening.
pub fn top_hat(plane: &FloatPlane, se: &StructuringElement) -> FloatPlane {
    let opened = open(plane, se);
    let data = plane
        .data()
        .iter()
        .zip(opened.data())
        .map(|(&v, &o)| v - o)
        .collect();
    FloatPlane::from_vec_unchecked(plane.width(), plane.height(), data)
}

/// Sum of top-hat responses over every element of the bank, accumulated in
/// angle order so the result is reproducible.
pub fn top_hat_sum(plane: &FloatPlane, bank: &StructuringElementBank) -> FloatPlane {
    let mut acc = vec![0.0; plane.data().len()];
    for se in bank.elements() {
        let th = top_hat(plane, se);
        for (a, &v) in acc.iter_mut().zip(th.data()) {
            *a += v;
        }
    }
    FloatPlane::from_vec_unchecked(plane.width(), plane.height(), acc)
}

/// Scale and shift a plane so its minimum is 0 and its maximum is 1.
/// A constant plane maps to all zeros.
pub fn normalize_minmax(plane: &FloatPlane) -> FloatPlane {
    match plane.min_max() {
        Some((min, max)) if max > min => {
            let scale = max - min;
            let data = plane.data().iter().map(|&v| (v - min) / scale).collect();
            FloatPlane::from_vec_unchecked(plane.width(), plane.height(), data)
        }
        _ => FloatPlane::filled(plane.width(), plane.height(), 0.0),
    }
}
