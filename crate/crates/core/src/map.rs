//! Dense per-pixel grids and the neighborhood geometry shared by the kernels.
//!
//! Every map carries a validity mask next to its values. A valid entry is
//! always finite; readers translate non-finite sentinels into invalid pixels
//! before constructing a map.

use crate::error::{Error, Result};

/// Integer pixel coordinate, `x` along a row and `y` down the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Pixel { x, y }
    }
}

/// A dense 2-D grid of real values with a per-pixel validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

fn check_dims(width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    width
        .checked_mul(height)
        .ok_or(Error::InvalidDimensions { width, height })
}

impl ScalarMap {
    /// Fully valid map. Every value must be finite.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let len = check_dims(width, height)?;
        Self::with_mask(width, height, values, vec![true; len])
    }

    /// Map with an explicit mask. Values under invalid pixels are ignored and
    /// stored as 0.
    pub fn with_mask(
        width: usize,
        height: usize,
        mut values: Vec<f64>,
        valid: Vec<bool>,
    ) -> Result<Self> {
        let len = check_dims(width, height)?;
        if values.len() != len {
            return Err(Error::BufferLength {
                what: "values",
                expected: len,
                actual: values.len(),
            });
        }
        if valid.len() != len {
            return Err(Error::BufferLength {
                what: "mask",
                expected: len,
                actual: valid.len(),
            });
        }
        for (i, (v, &ok)) in values.iter_mut().zip(&valid).enumerate() {
            if !ok {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::NonFinite {
                    x: i % width,
                    y: i / width,
                    value: *v,
                });
            }
        }
        Ok(ScalarMap {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        let len = check_dims(width, height)?;
        Self::new(width, height, vec![value; len])
    }

    /// Builds a fully valid map from a function of `(x, y)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let len = check_dims(width, height)?;
        let mut values = Vec::with_capacity(len);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    /// Value at `(x, y)` if the pixel is valid.
    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        let i = self.index(x, y);
        self.valid[i].then(|| self.values[i])
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite { x, y, value });
        }
        let i = self.index(x, y);
        self.values[i] = value;
        self.valid[i] = true;
        Ok(())
    }

    pub fn invalidate(&mut self, x: usize, y: usize) {
        let i = self.index(x, y);
        self.values[i] = 0.0;
        self.valid[i] = false;
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn same_shape(&self, other: &ScalarMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn ensure_same_shape(&self, other: &ScalarMap) -> Result<()> {
        ensure_dims(self.width, self.height, other.width, other.height)
    }

    /// Applies `f` to every valid value; the mask is kept.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarMap> {
        let values = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| if ok { f(v) } else { 0.0 })
            .collect();
        ScalarMap::with_mask(self.width, self.height, values, self.valid.clone())
    }

    /// Pixel-wise binary operation. The output is valid only where both inputs are.
    pub fn zip_with(&self, other: &ScalarMap, f: impl Fn(f64, f64) -> f64) -> Result<ScalarMap> {
        self.ensure_same_shape(other)?;
        let valid: Vec<bool> = self
            .valid
            .iter()
            .zip(&other.valid)
            .map(|(&a, &b)| a && b)
            .collect();
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .zip(&valid)
            .map(|((&a, &b), &ok)| if ok { f(a, b) } else { 0.0 })
            .collect();
        ScalarMap::with_mask(self.width, self.height, values, valid)
    }

    pub fn add(&self, other: &ScalarMap) -> Result<ScalarMap> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarMap) -> Result<ScalarMap> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<ScalarMap> {
        self.map(|v| v * factor)
    }

    pub fn offset(&self, delta: f64) -> Result<ScalarMap> {
        self.map(|v| v + delta)
    }

    /// Restricts the mask to pixels that are also valid in `other`.
    pub fn masked_by(&self, other: &ScalarMap) -> Result<ScalarMap> {
        self.zip_with(other, |a, _| a)
    }

    pub fn stats(&self) -> Result<MapStats> {
        map_stats(self)
    }
}

pub(crate) fn ensure_dims(lw: usize, lh: usize, rw: usize, rh: usize) -> Result<()> {
    if lw != rw || lh != rh {
        return Err(Error::DimensionMismatch {
            left_w: lw,
            left_h: lh,
            right_w: rw,
            right_h: rh,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

/// Minimum, maximum and mean over the valid pixels.
pub fn map_stats(map: &ScalarMap) -> Result<MapStats> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&v, &ok) in map.values.iter().zip(&map.valid) {
        if ok {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NoValidPixels("map statistics"));
    }
    Ok(MapStats {
        min,
        max,
        mean: sum / count as f64,
        count,
    })
}

/// A dense image with 1 or 3 interleaved channels, intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(width, height)?;
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(format!(
                "image must have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = len * channels;
        if data.len() != expected {
            return Err(Error::BufferLength {
                what: "image data",
                expected,
                actual: data.len(),
            });
        }
        for (i, &v) in data.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                let p = i / channels;
                return Err(if v.is_finite() {
                    Error::InvalidParameter(format!(
                        "intensity {v} at ({}, {}) outside [0, 1]",
                        p % width,
                        p / width
                    ))
                } else {
                    Error::NonFinite {
                        x: p % width,
                        y: p / width,
                        value: v,
                    }
                });
            }
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    /// Single-channel image from a function of `(x, y)`; results are clamped to [0, 1].
    pub fn gray_from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let len = check_dims(width, height)?;
        let mut data = Vec::with_capacity(len);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, 1, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// One channel as a fully valid map.
    pub fn plane(&self, c: usize) -> ScalarMap {
        let values = self
            .data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect();
        ScalarMap::new(self.width, self.height, values).expect("image planes are finite")
    }

    pub(crate) fn ensure_same_shape(&self, w: usize, h: usize) -> Result<()> {
        ensure_dims(self.width, self.height, w, h)
    }
}

/// How taps falling outside the map are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Out-of-bounds taps are skipped.
    #[default]
    Shrink,
}

/// Square sampling window: `window` taps per side, `dilation` pixels apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodSpec {
    pub window: usize,
    pub dilation: usize,
    pub border: BorderPolicy,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        NeighborhoodSpec {
            window: 11,
            dilation: 1,
            border: BorderPolicy::Shrink,
        }
    }
}

impl NeighborhoodSpec {
    pub fn new(window: usize, dilation: usize) -> Result<Self> {
        let spec = NeighborhoodSpec {
            window,
            dilation,
            border: BorderPolicy::Shrink,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if self.dilation == 0 {
            return Err(Error::InvalidParameter("dilation must be >= 1".into()));
        }
        Ok(())
    }

    /// Largest offset from the center along either axis.
    pub fn radius(&self) -> usize {
        self.window / 2 * self.dilation
    }

    /// Maximum neighbor count, reached by interior pixels.
    pub fn max_taps(&self) -> usize {
        self.window * self.window - 1
    }

    /// `(dx, dy)` tap offsets in row-major order, center excluded.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let half = (self.window / 2) as isize;
        let step = self.dilation as isize;
        let mut out = Vec::with_capacity(self.max_taps());
        for j in -half..=half {
            for i in -half..=half {
                if i != 0 || j != 0 {
                    out.push((i * step, j * step));
                }
            }
        }
        out
    }
}

/// Applies `(dx, dy)` to `p`, returning `None` outside `width x height`.
#[inline]
pub fn offset_pixel(p: Pixel, dx: isize, dy: isize, width: usize, height: usize) -> Option<Pixel> {
    let x = p.x as isize + dx;
    let y = p.y as isize + dy;
    (x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
        .then(|| Pixel::new(x as usize, y as usize))
}

/// In-bounds taps of the window centered at `p`, row-major, excluding `p`.
pub fn neighborhood(p: Pixel, spec: &NeighborhoodSpec, width: usize, height: usize) -> Vec<Pixel> {
    debug_assert!(p.x < width && p.y < height);
    spec.offsets()
        .into_iter()
        .filter_map(|(dx, dy)| offset_pixel(p, dx, dy, width, height))
        .collect()
}

/// Unit step: 1 for `x >= 0`, else 0. Non-finite input is an error.
pub fn step(x: f64) -> Result<u8> {
    if !x.is_finite() {
        return Err(Error::NonFiniteStep(x));
    }
    Ok(u8::from(x >= 0.0))
}
