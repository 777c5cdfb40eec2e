//! Core raster types and the pixel-level primitives shared by every other
//! module: color conversion, clamping, quantization and geometric flips.
//!
//! Storage is 8-bit; all arithmetic happens on a normalized `[0, 1]` float
//! view and results are re-quantized when an operation produces an image.

use crate::error::{Error, Result};

/// BT.601 luma weights used for RGB -> gray conversion.
pub const GRAY_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Color channel of an [`RgbImage`], ordered `R < G < B` so that iteration
/// over channels is deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    R,
    G,
    B,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::R, Channel::G, Channel::B];

    pub fn index(self) -> usize {
        match self {
            Channel::R => 0,
            Channel::G => 1,
            Channel::B => 2,
        }
    }
}

/// Normalize an 8-bit sample to `[0, 1]`.
#[inline]
pub fn normalize_sample(s: u8) -> f64 {
    f64::from(s) / 255.0
}

/// Quantize a normalized sample to 8 bits, rounding ties away from zero
/// (`0.5 * 255 = 127.5 -> 128`). The input must already be clamped to
/// `[0, 1]`.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    debug_assert!((0.0..=1.0).contains(&v), "quantize input out of range: {v}");
    (v * 255.0).round() as u8
}

/// Clamp a finite value to `[0, 1]`.
#[inline]
pub fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// 8-bit, 3-channel, row-major raster with channel order R, G, B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    /// Build an image from interleaved RGB bytes. The buffer length must be
    /// exactly `width * height * 3`.
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "rgb buffer holds {} bytes, {}x{} needs {expected}",
                data.len(),
                width,
                height
            )));
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        RgbImage {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    /// Stored 8-bit sample at `(x, y)` for `channel`.
    #[inline]
    pub fn sample8(&self, x: u32, y: u32, channel: Channel) -> u8 {
        self.data[self.offset(x, y) + channel.index()]
    }

    /// Normalized sample in `[0, 1]`.
    #[inline]
    pub fn sample(&self, x: u32, y: u32, channel: Channel) -> f64 {
        normalize_sample(self.sample8(x, y, channel))
    }

    #[inline]
    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    /// Normalized float view, one plane per channel.
    pub fn to_real(&self) -> RgbReal {
        let n = self.pixel_count();
        let mut planes = [
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        ];
        for px in self.data.chunks_exact(3) {
            for c in 0..3 {
                planes[c].push(normalize_sample(px[c]));
            }
        }
        RgbReal {
            planes: planes.map(|data| FloatPlane {
                width: self.width,
                height: self.height,
                data,
            }),
        }
    }

    pub fn flip_horizontal(&self) -> RgbImage {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set_pixel(self.width - 1 - x, y, self.pixel(x, y));
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> RgbImage {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set_pixel(x, self.height - 1 - y, self.pixel(x, y));
            }
        }
        out
    }
}

/// Single-channel raster of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatPlane {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl FloatPlane {
    /// Build a plane, rejecting buffers of the wrong length or holding
    /// non-finite values.
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "plane buffer holds {} values, {}x{} needs {expected}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("plane value {v}")));
        }
        Ok(FloatPlane {
            width,
            height,
            data,
        })
    }

    /// Internal constructor for buffers that are finite by construction.
    pub(crate) fn from_vec_unchecked(width: u32, height: u32, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize);
        FloatPlane {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Self {
        FloatPlane {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: f64) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    /// Minimum and maximum value, or `None` for an empty plane.
    pub fn min_max(&self) -> Option<(f64, f64)> {
        let mut it = self.data.iter();
        let first = *it.next()?;
        let mut min = first;
        let mut max = first;
        for &v in it {
            if v < min {
                min = v;
            }
            if v > max {
                max = v;
            }
        }
        Some((min, max))
    }

    /// Clamp every value to `[0, 1]`. NaN is rejected.
    pub fn clamp01(&self) -> Result<FloatPlane> {
        let mut data = Vec::with_capacity(self.data.len());
        for &v in &self.data {
            if v.is_nan() {
                return Err(Error::NonFinite("NaN in plane passed to clamp".into()));
            }
            data.push(clamp_unit(v));
        }
        Ok(FloatPlane {
            width: self.width,
            height: self.height,
            data,
        })
    }

    /// Quantize a plane already clamped to `[0, 1]` into 8-bit samples.
    pub fn quantize8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_sample(v)).collect()
    }

    pub fn flip_horizontal(&self) -> FloatPlane {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> FloatPlane {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, self.height - 1 - y, self.get(x, y));
            }
        }
        out
    }
}

/// Binary raster used for ground-truth vessel labels and field-of-view masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryPlane {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryPlane {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "mask buffer holds {} values, {}x{} needs {expected}",
                data.len(),
                width,
                height
            )));
        }
        Ok(BinaryPlane {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        BinaryPlane {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn flip_horizontal(&self) -> BinaryPlane {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> BinaryPlane {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, self.height - 1 - y, self.get(x, y));
            }
        }
        out
    }
}

/// Normalized float working view of an RGB image, one plane per channel.
///
/// Photometric operators do their arithmetic here and quantize back to
/// [`RgbImage`] at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbReal {
    planes: [FloatPlane; 3],
}

impl RgbReal {
    pub fn from_planes(planes: [FloatPlane; 3]) -> Result<Self> {
        let (w, h) = (planes[0].width(), planes[0].height());
        if planes.iter().any(|p| p.width() != w || p.height() != h) {
            return Err(Error::DimensionMismatch(
                "rgb planes disagree on dimensions".into(),
            ));
        }
        Ok(RgbReal { planes })
    }

    pub fn width(&self) -> u32 {
        self.planes[0].width()
    }

    pub fn height(&self) -> u32 {
        self.planes[0].height()
    }

    pub fn plane(&self, channel: Channel) -> &FloatPlane {
        &self.planes[channel.index()]
    }

    pub fn plane_mut(&mut self, channel: Channel) -> &mut FloatPlane {
        &mut self.planes[channel.index()]
    }

    /// Apply `f` to every sample of every channel.
    pub fn map(&self, mut f: impl FnMut(Channel, f64) -> f64) -> RgbReal {
        let planes = Channel::ALL.map(|c| {
            let p = self.plane(c);
            FloatPlane::from_vec_unchecked(
                p.width(),
                p.height(),
                p.data().iter().map(|&v| f(c, v)).collect(),
            )
        });
        RgbReal { planes }
    }

    /// Gray plane of this view using the BT.601 weights.
    pub fn to_gray(&self) -> FloatPlane {
        let n = self.planes[0].data().len();
        let mut data = Vec::with_capacity(n);
        for i in 0..n {
            let mut g = 0.0;
            for c in Channel::ALL {
                g += GRAY_WEIGHTS[c.index()] * self.planes[c.index()].data()[i];
            }
            data.push(g);
        }
        FloatPlane::from_vec_unchecked(self.width(), self.height(), data)
    }

    /// Clamp every channel to `[0, 1]`. NaN is rejected.
    pub fn clamp01(&self) -> Result<RgbReal> {
        let r = self.planes[0].clamp01()?;
        let g = self.planes[1].clamp01()?;
        let b = self.planes[2].clamp01()?;
        Ok(RgbReal { planes: [r, g, b] })
    }

    /// Quantize an already-clamped view back to 8-bit storage.
    pub fn quantize(&self) -> RgbImage {
        let n = self.planes[0].data().len();
        let mut data = Vec::with_capacity(n * 3);
        for i in 0..n {
            for c in 0..3 {
                data.push(quantize_sample(self.planes[c].data()[i]));
            }
        }
        RgbImage {
            width: self.width(),
            height: self.height(),
            data,
        }
    }
}

/// An image with its optional paired ground-truth and field-of-view masks.
///
/// Geometric augmentations must transform all three identically; photometric
/// ones touch only the image.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: RgbImage,
    pub truth: Option<BinaryPlane>,
    pub fov: Option<BinaryPlane>,
}

impl Sample {
    pub fn new(
        image: RgbImage,
        truth: Option<BinaryPlane>,
        fov: Option<BinaryPlane>,
    ) -> Result<Self> {
        let (w, h) = (image.width(), image.height());
        for (name, mask) in [("truth", &truth), ("fov", &fov)] {
            if let Some(m) = mask {
                if m.width() != w || m.height() != h {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} mask is {}x{}, image is {w}x{h}",
                        m.width(),
                        m.height()
                    )));
                }
            }
        }
        Ok(Sample { image, truth, fov })
    }

    pub fn image_only(image: RgbImage) -> Self {
        Sample {
            image,
            truth: None,
            fov: None,
        }
    }
}

/// Gray plane of an image: `0.299 R + 0.587 G + 0.114 B` on normalized
/// samples.
pub fn rgb_to_gray(img: &RgbImage) -> FloatPlane {
    let n = img.pixel_count();
    let mut data = Vec::with_capacity(n);
    for px in img.data().chunks_exact(3) {
        data.push(
            GRAY_WEIGHTS[0] * normalize_sample(px[0])
                + GRAY_WEIGHTS[1] * normalize_sample(px[1])
                + GRAY_WEIGHTS[2] * normalize_sample(px[2]),
        );
    }
    FloatPlane::from_vec_unchecked(img.width(), img.height(), data)
}

/// Mean of the gray plane over all pixels. Errors on an empty image.
pub fn mean_gray(img: &RgbImage) -> Result<f64> {
    if img.pixel_count() == 0 {
        return Err(Error::EmptyInput("mean of an empty image".into()));
    }
    let gray = rgb_to_gray(img);
    Ok(gray.data().iter().sum::<f64>() / gray.data().len() as f64)
}

/// RGB -> HSV using the hexcone model. `h` lies in `[0, 1)`, `s` and `v` in
/// `[0, 1]`.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        (((g - b) / delta).rem_euclid(6.0)) / 6.0
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    (h.rem_euclid(1.0), s, v)
}

/// HSV -> RGB, inverse of [`rgb_to_hsv`].
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = (h6.floor() as i64).clamp(0, 5);
    let f = h6 - sector as f64;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}
