//! Edge-aware smoothness terms on forward differences.
//!
//! A horizontal pair is `(x, y) -> (x + 1, y)` and a vertical pair
//! `(x, y) -> (x, y + 1)`; a pair counts when both endpoints are valid in
//! every map involved. Each direction is averaged over its own counted pairs
//! and the two directional means are added, so a unit ramp along `x` scores
//! exactly 1.

use super::{prepare_grad, with_grad, LossValue};
use crate::error::Result;
use crate::map::{ImageBuffer, ScalarMap};

/// Penalty of one forward difference: value and derivative w.r.t. `ΔD`.
trait PairPenalty {
    fn eval(&self, p: usize, q: usize, dd: f64) -> (f64, f64);
    fn pair_ok(&self, p: usize, q: usize) -> bool;
}

fn accumulate(
    disparity: &ScalarMap,
    penalty: &impl PairPenalty,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    let (w, h) = (disparity.width(), disparity.height());
    prepare_grad(&mut grad, w * h)?;
    let d = disparity.values();
    let mask = disparity.mask();
    let mut total = 0.0;
    for (dx, dy) in [(1usize, 0usize), (0, 1)] {
        let mut pairs = Vec::new();
        for y in 0..h - dy {
            for x in 0..w - dx {
                let p = y * w + x;
                let q = (y + dy) * w + x + dx;
                if mask[p] && mask[q] && penalty.pair_ok(p, q) {
                    pairs.push((p, q));
                }
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let inv_n = 1.0 / pairs.len() as f64;
        let mut sum = 0.0;
        for &(p, q) in &pairs {
            let (v, dv) = penalty.eval(p, q, d[q] - d[p]);
            sum += v;
            if let Some(g) = grad.as_deref_mut() {
                g[q] += dv * inv_n;
                g[p] -= dv * inv_n;
            }
        }
        total += sum * inv_n;
    }
    Ok(total)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

struct ImageGuided<'a> {
    image: &'a ImageBuffer,
}

impl PairPenalty for ImageGuided<'_> {
    fn eval(&self, p: usize, q: usize, dd: f64) -> (f64, f64) {
        let c = self.image.channels();
        let data = self.image.data();
        let edge = (0..c)
            .map(|ch| (data[q * c + ch] - data[p * c + ch]).abs())
            .sum::<f64>()
            / c as f64;
        let wgt = (-edge).exp();
        (dd.abs() * wgt, sign(dd) * wgt)
    }

    fn pair_ok(&self, _: usize, _: usize) -> bool {
        true
    }
}

struct DepthGuided<'a> {
    depth: &'a ScalarMap,
}

impl PairPenalty for DepthGuided<'_> {
    fn eval(&self, p: usize, q: usize, dd: f64) -> (f64, f64) {
        let t = self.depth.values();
        let wgt = (-(t[q] - t[p]).abs()).exp();
        (dd.abs() * wgt, sign(dd) * wgt)
    }

    fn pair_ok(&self, p: usize, q: usize) -> bool {
        self.depth.mask()[p] && self.depth.mask()[q]
    }
}

struct Dual<'a> {
    depth: &'a ScalarMap,
}

impl PairPenalty for Dual<'_> {
    fn eval(&self, p: usize, q: usize, dd: f64) -> (f64, f64) {
        let t = self.depth.values();
        let at = (t[q] - t[p]).abs();
        let ad = dd.abs();
        let e_t = (-at).exp();
        let e_d = (-ad).exp();
        // |ΔD| e^{-|ΔDt|} + |ΔDt| e^{-|ΔD|}
        (ad * e_t + at * e_d, sign(dd) * (e_t - at * e_d))
    }

    fn pair_ok(&self, p: usize, q: usize) -> bool {
        self.depth.mask()[p] && self.depth.mask()[q]
    }
}

/// Disparity smoothness weighted by image edges.
pub fn smoothness_image(disparity: &ScalarMap, image: &ImageBuffer) -> Result<LossValue> {
    with_grad(disparity.width(), disparity.height(), |g| {
        smoothness_image_into(disparity, image, g)
    })
}

pub fn smoothness_image_into(
    disparity: &ScalarMap,
    image: &ImageBuffer,
    grad: Option<&mut [f64]>,
) -> Result<f64> {
    image.ensure_same_shape(disparity.width(), disparity.height())?;
    accumulate(disparity, &ImageGuided { image }, grad)
}

/// Disparity smoothness weighted by relative-depth edges.
pub fn smoothness_depth(disparity: &ScalarMap, depth: &ScalarMap) -> Result<LossValue> {
    with_grad(disparity.width(), disparity.height(), |g| {
        smoothness_depth_into(disparity, depth, g)
    })
}

pub fn smoothness_depth_into(
    disparity: &ScalarMap,
    depth: &ScalarMap,
    grad: Option<&mut [f64]>,
) -> Result<f64> {
    disparity.ensure_same_shape(depth)?;
    accumulate(disparity, &DepthGuided { depth }, grad)
}

/// Depth-guided smoothness plus the dual term that penalises flat disparity
/// across relative-depth edges.
pub fn dds_loss(disparity: &ScalarMap, depth: &ScalarMap) -> Result<LossValue> {
    with_grad(disparity.width(), disparity.height(), |g| {
        dds_loss_into(disparity, depth, g)
    })
}

pub fn dds_loss_into(disparity: &ScalarMap, depth: &ScalarMap, grad: Option<&mut [f64]>) -> Result<f64> {
    disparity.ensure_same_shape(depth)?;
    accumulate(disparity, &Dual { depth }, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> ScalarMap {
        ScalarMap::from_fn(w, h, |x, _| x as f64).unwrap()
    }

    #[test]
    fn constant_disparity_is_smooth() {
        let d = ScalarMap::filled(6, 5, 3.0).unwrap();
        let img = ImageBuffer::gray_from_fn(6, 5, |x, y| ((x + y) % 3) as f64 / 2.0).unwrap();
        let t = ScalarMap::from_fn(6, 5, |x, y| (x * y) as f64).unwrap();
        assert_eq!(smoothness_image(&d, &img).unwrap().value, 0.0);
        assert_eq!(smoothness_depth(&d, &t).unwrap().value, 0.0);
        let flat = ScalarMap::filled(6, 5, 1.0).unwrap();
        assert_eq!(dds_loss(&d, &flat).unwrap().value, 0.0);
    }

    #[test]
    fn unit_ramp_scores_one() {
        let d = ramp(7, 4);
        let img = ImageBuffer::new(7, 4, 1, vec![0.3; 28]).unwrap();
        let flat = ScalarMap::filled(7, 4, 2.0).unwrap();
        assert_eq!(smoothness_image(&d, &img).unwrap().value, 1.0);
        assert_eq!(smoothness_depth(&d, &flat).unwrap().value, 1.0);
    }

    #[test]
    fn dual_term_fires_on_flat_disparity() {
        let d = ScalarMap::filled(7, 4, 2.0).unwrap();
        let t = ramp(7, 4);
        assert_eq!(dds_loss(&d, &t).unwrap().value, 1.0);
        assert_eq!(smoothness_depth(&d, &t).unwrap().value, 0.0);
    }

    #[test]
    fn invalid_pixels_drop_pairs() {
        let mut d = ramp(3, 1);
        d.invalidate(1, 0);
        let flat = ScalarMap::filled(3, 1, 0.0).unwrap();
        assert_eq!(smoothness_depth(&d, &flat).unwrap().value, 0.0);
    }
}
