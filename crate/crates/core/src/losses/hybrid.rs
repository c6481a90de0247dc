use super::{
    dds_loss_into, ldr_loss_into, lrc_loss_into, photometric_loss_into, select_references,
    LdrParams,
};
use crate::voting::{confidence_map, DdcvParams};
use crate::error::{Error, Result};
use crate::map::{ImageBuffer, ScalarMap};

/// Weights of the consistency, ranking and dual-smoothness terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 0.1,
            lambda2: 0.1,
            lambda3: 0.1,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Everything the hybrid loss reads. Optional inputs may be omitted only when
/// the terms that need them carry zero weight.
#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a> {
    pub left: &'a ImageBuffer,
    pub right: &'a ImageBuffer,
    pub disparity: &'a ScalarMap,
    pub right_disparity: Option<&'a ScalarMap>,
    pub depth: Option<&'a ScalarMap>,
    /// Reference-selection confidence; computed with DDCV when absent.
    pub confidence: Option<&'a ScalarMap>,
}

#[derive(Debug, Clone)]
pub struct LossReport {
    pub photometric: f64,
    pub lrc: f64,
    pub ldr: f64,
    pub dds: f64,
    pub total: f64,
    pub weights: LossWeights,
    pub grad: Option<ScalarMap>,
}

/// Photometric loss plus the weighted consistency, ranking and dual
/// smoothness terms. Terms with zero weight and missing inputs report 0.
pub fn hybrid_loss(
    inputs: &LossInputs<'_>,
    weights: &LossWeights,
    ldr_params: &LdrParams,
    ddcv_params: &DdcvParams,
    with_grad: bool,
) -> Result<LossReport> {
    weights.validate()?;
    let d = inputs.disparity;
    let n = d.len();
    let mut grad = with_grad.then(|| vec![0.0; n]);
    let mut scratch = with_grad.then(|| vec![0.0; n]);

    let photometric = photometric_loss_into(inputs.left, inputs.right, d, grad.as_deref_mut())
        .map_err(|e| e.in_term("photometric"))?;

    let mut add_weighted = |lambda: f64, scratch: &Option<Vec<f64>>| {
        if let (Some(g), Some(s)) = (grad.as_mut(), scratch.as_ref()) {
            for (gi, si) in g.iter_mut().zip(s) {
                *gi += lambda * si;
            }
        }
    };

    let lrc = match (inputs.right_disparity, weights.lambda1 > 0.0) {
        (Some(dr), _) => {
            let v = lrc_loss_into(d, dr, scratch.as_deref_mut()).map_err(|e| e.in_term("lrc"))?;
            add_weighted(weights.lambda1, &scratch);
            v
        }
        (None, false) => 0.0,
        (None, true) => return Err(missing("right disparity", "lambda1")),
    };

    let (ldr, dds) = match (inputs.depth, weights.lambda2 > 0.0 || weights.lambda3 > 0.0) {
        (Some(depth), _) => {
            let owned;
            let conf = match inputs.confidence {
                Some(c) => c,
                None => {
                    owned = confidence_map(d, depth, ddcv_params).map_err(|e| e.in_term("ldr"))?;
                    &owned
                }
            };
            let refs = select_references(conf, ldr_params).map_err(|e| e.in_term("ldr"))?;
            let ldr = ldr_loss_into(d, depth, &refs, scratch.as_deref_mut())
                .map_err(|e| e.in_term("ldr"))?;
            add_weighted(weights.lambda2, &scratch);
            let dds = dds_loss_into(d, depth, scratch.as_deref_mut()).map_err(|e| e.in_term("dds"))?;
            add_weighted(weights.lambda3, &scratch);
            (ldr, dds)
        }
        (None, false) => (0.0, 0.0),
        (None, true) => return Err(missing("relative depth", "lambda2/lambda3")),
    };

    let total = photometric + weights.lambda1 * lrc + weights.lambda2 * ldr + weights.lambda3 * dds;
    let grad = match grad {
        Some(g) => Some(ScalarMap::new(d.width(), d.height(), g)?),
        None => None,
    };
    Ok(LossReport {
        photometric,
        lrc,
        ldr,
        dds,
        total,
        weights: *weights,
        grad,
    })
}

fn missing(what: &str, weight: &str) -> Error {
    Error::InvalidParameter(format!("{what} is required when {weight} > 0"))
}
