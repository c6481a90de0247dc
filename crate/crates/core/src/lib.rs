//! Disparity-depth consistency voting (DDCV) confidence estimation,
//! relative-depth-guided unsupervised stereo losses with analytic gradients,
//! and the disparity / confidence evaluation protocol.
//!
//! ```
//! use ddcv::{confidence_map, DdcvParams, ScalarMap};
//!
//! let d = ScalarMap::from_fn(16, 16, |x, y| 1.0 + x as f64 + 0.5 * y as f64).unwrap();
//! let depth = d.map(|v| 3.0 * v + 1.0).unwrap();
//! let c = confidence_map(&d, &depth, &DdcvParams::default()).unwrap();
//! assert!(c.values().iter().all(|&v| v == 1.0));
//! ```

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod voting;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod imgio;
pub mod losses;
pub mod map;
pub mod synth;

pub use voting::{confidence_map, global_scale, vote, vote_rc, vote_vc, DdcvParams, FormulaMode};
pub use error::{Error, Result};
pub use eval::{
    d1, disparity_metrics, epe, is_d1_outlier, optimal_auc, optimal_curve, pep, sparsification,
    time_per_megapixel, DisparityMetrics, SparsificationCurve, Timing,
};
pub use losses::{hybrid_loss, LdrParams, LossInputs, LossReport, LossValue, LossWeights};
pub use map::{neighborhood, step, BorderPolicy, ImageBuffer, NeighborhoodSpec, Pixel, ScalarMap};
pub use synth::{generate, Scene, SceneSpec};
