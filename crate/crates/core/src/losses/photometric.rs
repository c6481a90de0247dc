//! SSIM + L1 reconstruction loss between the left image and the right image
//! resampled into the left view.
//!
//! SSIM statistics use the 3x3 window around each pixel, restricted to
//! in-bounds pixels that are themselves counted (valid disparity, in view).
//! Variances are population variances.

use super::warp::HorizontalWarp;
use super::{prepare_grad, with_grad, LossValue};
use crate::error::{Error, Result};
use crate::map::{ImageBuffer, ScalarMap};

pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
const SSIM_WEIGHT: f64 = 0.85;
const L1_WEIGHT: f64 = 0.15;

pub fn photometric_loss(left: &ImageBuffer, right: &ImageBuffer, disparity: &ScalarMap) -> Result<LossValue> {
    with_grad(disparity.width(), disparity.height(), |g| {
        photometric_loss_into(left, right, disparity, g)
    })
}

pub fn photometric_loss_into(
    left: &ImageBuffer,
    right: &ImageBuffer,
    disparity: &ScalarMap,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    let (w, h) = (disparity.width(), disparity.height());
    left.ensure_same_shape(w, h)?;
    right.ensure_same_shape(w, h)?;
    if left.channels() != right.channels() {
        return Err(Error::InvalidParameter(format!(
            "channel mismatch: {} vs {}",
            left.channels(),
            right.channels()
        )));
    }
    prepare_grad(&mut grad, w * h)?;
    let nc = left.channels();
    let warp = right.warp_horizontal(disparity)?;
    let counted = &warp.visible;
    let n = counted.iter().filter(|&&v| v).count();
    if n == 0 {
        return Err(Error::NoValidPixels("photometric loss has no visible pixels"));
    }
    let x = left.data();
    let y = warp.warped.data();

    // ∂(Σ ℓ)/∂Î per pixel and channel
    let mut dy = grad.as_ref().map(|_| vec![0.0; w * h * nc]);
    let mut total = 0.0;
    let mut taps = Vec::with_capacity(9);
    for py in 0..h {
        for px in 0..w {
            let p = py * w + px;
            if !counted[p] {
                continue;
            }
            taps.clear();
            for qy in py.saturating_sub(1)..(py + 2).min(h) {
                for qx in px.saturating_sub(1)..(px + 2).min(w) {
                    let q = qy * w + qx;
                    if counted[q] {
                        taps.push(q);
                    }
                }
            }
            let inv_n = 1.0 / taps.len() as f64;
            let mut ssim_sum = 0.0;
            let mut l1_sum = 0.0;
            for c in 0..nc {
                let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for &q in &taps {
                    let (a, b) = (x[q * nc + c], y[q * nc + c]);
                    sx += a;
                    sy += b;
                    sxx += a * a;
                    syy += b * b;
                    sxy += a * b;
                }
                let mx = sx * inv_n;
                let my = sy * inv_n;
                let vx = sxx * inv_n - mx * mx;
                let vy = syy * inv_n - my * my;
                let cxy = sxy * inv_n - mx * my;
                let num_a = 2.0 * mx * my + SSIM_C1;
                let num_b = 2.0 * cxy + SSIM_C2;
                let den_c = mx * mx + my * my + SSIM_C1;
                let den_d = vx + vy + SSIM_C2;
                let den = den_c * den_d;
                let ssim = num_a * num_b / den;
                ssim_sum += ssim;

                let diff = x[p * nc + c] - y[p * nc + c];
                l1_sum += diff.abs();

                if let Some(dy) = dy.as_mut() {
                    // ℓ = 0.85 (1 - mean_c S_c) / 2 + 0.15 mean_c |x - y|
                    let ds_scale = -SSIM_WEIGHT * 0.5 / nc as f64;
                    for &q in &taps {
                        let (a, b) = (x[q * nc + c], y[q * nc + c]);
                        let da = 2.0 * mx * inv_n;
                        let db = 2.0 * (a - mx) * inv_n;
                        let dc = 2.0 * my * inv_n;
                        let dd = 2.0 * (b - my) * inv_n;
                        let ds = (da * num_b + num_a * db) / den - ssim * (dc * den_d + den_c * dd) / den;
                        dy[q * nc + c] += ds_scale * ds;
                    }
                    dy[p * nc + c] += L1_WEIGHT / nc as f64 * -diff.signum() * f64::from(diff != 0.0);
                }
            }
            let mean_ssim = ssim_sum / nc as f64;
            let mean_l1 = l1_sum / nc as f64;
            total += SSIM_WEIGHT * (1.0 - mean_ssim) * 0.5 + L1_WEIGHT * mean_l1;
        }
    }
    let inv_count = 1.0 / n as f64;
    if let (Some(g), Some(dy)) = (grad, dy) {
        for (i, gi) in g.iter_mut().enumerate() {
            if !counted[i] {
                continue;
            }
            let mut acc = 0.0;
            for c in 0..nc {
                // ∂Î/∂D = -slope
                acc -= dy[i * nc + c] * warp.slope[i * nc + c];
            }
            *gi = acc * inv_count;
        }
    }
    Ok(total * inv_count)
}
