use crate::error::{Error, Result};
use crate::map::{ImageBuffer, ScalarMap};

/// Output of a horizontal warp.
#[derive(Debug, Clone)]
pub struct WarpResult<T> {
    pub warped: T,
    /// `∂warped/∂x` at the sample position, per pixel and channel, laid out like `warped`.
    /// The derivative w.r.t. the disparity is its negation.
    pub slope: Vec<f64>,
    /// False where `x - D(p)` falls outside `[0, width - 1]` or `D(p)` is invalid.
    pub visible: Vec<bool>,
}

/// Linear sample of `row` at `s`, with the slope of the interpolant.
///
/// Integer positions return the stored value exactly. Returns the two tap
/// indices and their weights so callers can check validity.
#[inline]
pub(crate) fn sample_row(row: &[f64], s: f64) -> (f64, f64, usize, f64) {
    let w = row.len();
    if w == 1 {
        return (row[0], 0.0, 0, 0.0);
    }
    let mut x0 = s.floor() as usize;
    if x0 >= w - 1 {
        x0 = w - 2;
    }
    let frac = s - x0 as f64;
    let slope = row[x0 + 1] - row[x0];
    let value = if frac == 0.0 {
        row[x0]
    } else if frac == 1.0 {
        row[x0 + 1]
    } else {
        row[x0] + frac * slope
    };
    (value, slope, x0, frac)
}

pub(crate) fn check_disparity(d: &ScalarMap) -> Result<()> {
    for y in 0..d.height() {
        for x in 0..d.width() {
            if let Some(v) = d.value(x, y) {
                if v < 0.0 {
                    return Err(Error::NegativeDisparity { x, y, value: v });
                }
            }
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn in_view(s: f64, width: usize) -> bool {
    s >= 0.0 && s <= (width - 1) as f64
}

/// Sources that can be resampled into the left view along rows.
pub trait HorizontalWarp: Sized {
    fn warp_horizontal(&self, disparity: &ScalarMap) -> Result<WarpResult<Self>>;
}

impl HorizontalWarp for ScalarMap {
    /// A warped pixel is valid only when visible and every tap with nonzero
    /// weight is valid.
    fn warp_horizontal(&self, disparity: &ScalarMap) -> Result<WarpResult<Self>> {
        self.ensure_same_shape(disparity)?;
        check_disparity(disparity)?;
        let (w, h) = (self.width(), self.height());
        let mut values = vec![0.0; w * h];
        let mut valid = vec![false; w * h];
        let mut slope = vec![0.0; w * h];
        let mut visible = vec![false; w * h];
        for y in 0..h {
            let row = &self.values()[y * w..(y + 1) * w];
            let mask = &self.mask()[y * w..(y + 1) * w];
            for x in 0..w {
                let i = y * w + x;
                let Some(d) = disparity.value(x, y) else {
                    continue;
                };
                let s = x as f64 - d;
                if !in_view(s, w) {
                    continue;
                }
                visible[i] = true;
                let (v, sl, x0, frac) = sample_row(row, s);
                let taps_ok = if w == 1 || frac == 0.0 {
                    mask[x0]
                } else if frac == 1.0 {
                    mask[x0 + 1]
                } else {
                    mask[x0] && mask[x0 + 1]
                };
                if taps_ok {
                    values[i] = v;
                    valid[i] = true;
                    slope[i] = if w > 1 && mask[x0] && mask[x0 + 1] { sl } else { 0.0 };
                }
            }
        }
        Ok(WarpResult {
            warped: ScalarMap::with_mask(w, h, values, valid)?,
            slope,
            visible,
        })
    }
}

impl HorizontalWarp for ImageBuffer {
    /// Invisible pixels hold the nearest in-view sample so the buffer stays
    /// within [0, 1]; callers must consult `visible`.
    fn warp_horizontal(&self, disparity: &ScalarMap) -> Result<WarpResult<Self>> {
        self.ensure_same_shape(disparity.width(), disparity.height())?;
        check_disparity(disparity)?;
        let (w, h, c) = (self.width(), self.height(), self.channels());
        let mut data = vec![0.0; w * h * c];
        let mut slope = vec![0.0; w * h * c];
        let mut visible = vec![false; w * h];
        let mut row = vec![0.0; w];
        for y in 0..h {
            for ch in 0..c {
                for (x, r) in row.iter_mut().enumerate() {
                    *r = self.get(x, y, ch);
                }
                for x in 0..w {
                    let i = y * w + x;
                    let d = disparity.value(x, y);
                    let s = x as f64 - d.unwrap_or(0.0);
                    let seen = d.is_some() && in_view(s, w);
                    if ch == 0 {
                        visible[i] = seen;
                    }
                    let (v, sl, _, _) = sample_row(&row, s.clamp(0.0, (w - 1) as f64));
                    data[i * c + ch] = v.clamp(0.0, 1.0);
                    slope[i * c + ch] = if seen { sl } else { 0.0 };
                }
            }
        }
        Ok(WarpResult {
            warped: ImageBuffer::new(w, h, c, data)?,
            slope,
            visible,
        })
    }
}

/// Resamples `src` at `(x - D(p), y)` with linear interpolation along `x`.
pub fn warp_horizontal<T: HorizontalWarp>(src: &T, disparity: &ScalarMap) -> Result<WarpResult<T>> {
    src.warp_horizontal(disparity)
}
