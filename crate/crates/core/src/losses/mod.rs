//! Unsupervised stereo loss terms with analytic gradients w.r.t. the left
//! disparity map.
//!
//! Each term comes in two forms: `*_into`, which writes `∂loss/∂D` into a
//! caller-owned buffer of `width * height` values, and a convenience wrapper
//! that allocates a [`LossValue`].

mod hybrid;
mod ldr;
mod lrc;
mod photometric;
mod smoothness;
mod warp;

pub use hybrid::{hybrid_loss, LossInputs, LossReport, LossWeights};
pub use ldr::{ldr_loss, ldr_loss_into, ldr_penalties, select_references, LdrParams, References};
pub use lrc::{lrc_loss, lrc_loss_into};
pub use photometric::{photometric_loss, photometric_loss_into, SSIM_C1, SSIM_C2};
pub use smoothness::{
    dds_loss, dds_loss_into, smoothness_depth, smoothness_depth_into, smoothness_image,
    smoothness_image_into,
};
pub use warp::{warp_horizontal, HorizontalWarp, WarpResult};

use crate::error::{Error, Result};
use crate::map::ScalarMap;

/// A loss value together with its gradient map.
#[derive(Debug, Clone)]
pub struct LossValue {
    pub value: f64,
    pub grad: ScalarMap,
}

pub(crate) fn with_grad(
    width: usize,
    height: usize,
    f: impl FnOnce(Option<&mut [f64]>) -> Result<f64>,
) -> Result<LossValue> {
    let mut grad = vec![0.0; width * height];
    let value = f(Some(&mut grad))?;
    Ok(LossValue {
        value,
        grad: ScalarMap::new(width, height, grad)?,
    })
}

/// Zeroes the gradient buffer after checking its length.
pub(crate) fn prepare_grad(grad: &mut Option<&mut [f64]>, len: usize) -> Result<()> {
    if let Some(g) = grad.as_deref_mut() {
        if g.len() != len {
            return Err(Error::BufferLength {
                what: "gradient",
                expected: len,
                actual: g.len(),
            });
        }
        g.fill(0.0);
    }
    Ok(())
}
