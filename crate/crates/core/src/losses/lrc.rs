use super::warp::HorizontalWarp;
use super::{prepare_grad, with_grad, LossValue};
use crate::error::{Error, Result};
use crate::map::ScalarMap;

/// Left-right consistency `|D - D̂r| / (D + D̂r)` averaged over pixels where
/// the warped right disparity is defined.
pub fn lrc_loss(disparity: &ScalarMap, right_disparity: &ScalarMap) -> Result<LossValue> {
    with_grad(disparity.width(), disparity.height(), |g| {
        lrc_loss_into(disparity, right_disparity, g)
    })
}

pub fn lrc_loss_into(
    disparity: &ScalarMap,
    right_disparity: &ScalarMap,
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    let (w, h) = (disparity.width(), disparity.height());
    prepare_grad(&mut grad, w * h)?;
    let warp = right_disparity.warp_horizontal(disparity)?;
    let warped = &warp.warped;

    let mut terms = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (Some(a), Some(b)) = (disparity.value(x, y), warped.value(x, y)) else {
                continue;
            };
            let sum = a + b;
            if !(sum > 0.0) {
                return Err(Error::NonPositiveDenominator { x, y, value: sum });
            }
            terms.push((y * w + x, a, b, sum));
        }
    }
    if terms.is_empty() {
        return Err(Error::NoValidPixels("left-right consistency has no counted pixels"));
    }
    let inv_n = 1.0 / terms.len() as f64;
    let mut total = 0.0;
    for &(i, a, b, sum) in &terms {
        let diff = a - b;
        let ell = diff.abs() / sum;
        total += ell;
        if let Some(g) = grad.as_deref_mut() {
            let sgn = if diff == 0.0 { 0.0 } else { diff.signum() };
            let d_a = sgn / sum - ell / sum;
            let d_b = -sgn / sum - ell / sum;
            // D̂r(p) moves with D(p) through the sampling position x - D(p)
            g[i] = (d_a - d_b * warp.slope[i]) * inv_n;
        }
    }
    Ok(total * inv_n)
}
