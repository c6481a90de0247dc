//! Local depth ranking loss.
//!
//! Each pixel is tied to the `k` most confident taps of a dilated window
//! around it. A pair is penalised only when its disparity ordering contradicts
//! the relative-depth ordering; the penalty `log(1 + |ΔD|)` is averaged with
//! weights `|ΔDt| / (1 + |ΔDt|)`.

use super::{prepare_grad, with_grad, LossValue};
use crate::error::{Error, Result};
use crate::map::{offset_pixel, NeighborhoodSpec, Pixel, ScalarMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdrParams {
    pub k: usize,
    pub spec: NeighborhoodSpec,
}

impl Default for LdrParams {
    fn default() -> Self {
        LdrParams {
            k: 8,
            spec: NeighborhoodSpec {
                window: 11,
                dilation: 2,
                ..NeighborhoodSpec::default()
            },
        }
    }
}

impl LdrParams {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.k == 0 || self.k > self.spec.max_taps() {
            return Err(Error::InvalidParameter(format!(
                "k must be in 1..={}, got {}",
                self.spec.max_taps(),
                self.k
            )));
        }
        Ok(())
    }
}

/// Reference taps per pixel, stored as flat pixel indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct References {
    width: usize,
    height: usize,
    starts: Vec<usize>,
    taps: Vec<u32>,
}

impl References {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Flat indices (`y * width + x`) of the references of pixel `i`.
    pub fn of_index(&self, i: usize) -> &[u32] {
        &self.taps[self.starts[i]..self.starts[i + 1]]
    }

    pub fn of(&self, p: Pixel) -> Vec<Pixel> {
        self.of_index(p.y * self.width + p.x)
            .iter()
            .map(|&t| Pixel::new(t as usize % self.width, t as usize / self.width))
            .collect()
    }
}

/// Picks, for every pixel, the `k` valid taps with the highest confidence.
/// Ties keep row-major window order; windows with fewer than `k` valid taps
/// use all of them.
pub fn select_references(confidence: &ScalarMap, params: &LdrParams) -> Result<References> {
    params.validate()?;
    let (w, h) = (confidence.width(), confidence.height());
    let offsets = params.spec.offsets();
    let mut starts = Vec::with_capacity(w * h + 1);
    let mut taps = Vec::with_capacity(w * h * params.k);
    let mut cand: Vec<(f64, u32)> = Vec::with_capacity(offsets.len());
    starts.push(0);
    for y in 0..h {
        for x in 0..w {
            cand.clear();
            for &(dx, dy) in &offsets {
                if let Some(q) = offset_pixel(Pixel::new(x, y), dx, dy, w, h) {
                    if let Some(c) = confidence.value(q.x, q.y) {
                        cand.push((c, (q.y * w + q.x) as u32));
                    }
                }
            }
            // stable: equal confidences stay in row-major order
            cand.sort_by(|a, b| b.0.total_cmp(&a.0));
            taps.extend(cand.iter().take(params.k).map(|&(_, t)| t));
            starts.push(taps.len());
        }
    }
    Ok(References {
        width: w,
        height: h,
        starts,
        taps,
    })
}

#[inline]
fn omega(dt: f64) -> f64 {
    dt.abs() / (1.0 + dt.abs())
}

#[inline]
fn nu(dd: f64) -> f64 {
    dd.abs().ln_1p()
}

pub fn ldr_loss(disparity: &ScalarMap, depth: &ScalarMap, refs: &References) -> Result<LossValue> {
    with_grad(disparity.width(), disparity.height(), |g| {
        ldr_loss_into(disparity, depth, refs, g)
    })
}

/// Penalty `φ(p)` and its weight sum over the inconsistent references of `p`.
#[inline]
fn penalty(p: usize, d: &[f64], t: &[f64], ok: &impl Fn(usize) -> bool, refs: &References) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for &r in refs.of_index(p) {
        let r = r as usize;
        if !ok(r) {
            continue;
        }
        let dd = d[p] - d[r];
        let dt = t[p] - t[r];
        if dd * dt < 0.0 {
            let wgt = omega(dt);
            num += wgt * nu(dd);
            den += wgt;
        }
    }
    if den == 0.0 {
        (0.0, 0.0)
    } else {
        (num / den, den)
    }
}

fn check_refs(disparity: &ScalarMap, depth: &ScalarMap, refs: &References) -> Result<()> {
    disparity.ensure_same_shape(depth)?;
    crate::map::ensure_dims(disparity.width(), disparity.height(), refs.width, refs.height)
}

/// Per-pixel penalty `φ`, valid where both maps are.
pub fn ldr_penalties(disparity: &ScalarMap, depth: &ScalarMap, refs: &References) -> Result<ScalarMap> {
    check_refs(disparity, depth, refs)?;
    let (d, t) = (disparity.values(), depth.values());
    let ok = |i: usize| disparity.mask()[i] && depth.mask()[i];
    let n = d.len();
    let values = (0..n)
        .map(|p| if ok(p) { penalty(p, d, t, &ok, refs).0 } else { 0.0 })
        .collect();
    ScalarMap::with_mask(disparity.width(), disparity.height(), values, (0..n).map(ok).collect())
}

/// Mean per-pixel ranking penalty over pixels valid in both maps.
///
/// The gradient holds the consistency indicators and the reference sets
/// fixed and differentiates `log(1 + |ΔD|)`.
pub fn ldr_loss_into(
    disparity: &ScalarMap,
    depth: &ScalarMap,
    refs: &References,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    check_refs(disparity, depth, refs)?;
    let n = disparity.len();
    prepare_grad(&mut grad, n)?;
    let d = disparity.values();
    let t = depth.values();
    let ok = |i: usize| disparity.mask()[i] && depth.mask()[i];

    let counted = (0..n).filter(|&i| ok(i)).count();
    if counted == 0 {
        return Ok(0.0);
    }
    let inv_n = 1.0 / counted as f64;
    let mut total = 0.0;
    for p in 0..n {
        if !ok(p) {
            continue;
        }
        let (phi, den) = penalty(p, d, t, &ok, refs);
        if den == 0.0 {
            continue;
        }
        total += phi;
        if let Some(g) = grad.as_deref_mut() {
            for &r in refs.of_index(p) {
                let r = r as usize;
                if !ok(r) {
                    continue;
                }
                let dd = d[p] - d[r];
                let dt = t[p] - t[r];
                if dd * dt < 0.0 {
                    let coeff = omega(dt) * dd.signum() / (1.0 + dd.abs()) / den * inv_n;
                    g[p] += coeff;
                    g[r] -= coeff;
                }
            }
        }
    }
    Ok(total * inv_n)
}
