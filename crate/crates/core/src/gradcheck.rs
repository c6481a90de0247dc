//! Central finite-difference verification of the analytic loss gradients.
//!
//! Pixels whose perturbation could cross a kink of the piecewise-smooth
//! objectives (integer warp sample positions, view borders, `|·|` at zero,
//! ranking flips) are skipped; [`KINK_MARGIN`] is the exclusion distance.

use std::fmt;
use std::str::FromStr;

use crate::voting::{confidence_map, DdcvParams};
use crate::error::{Error, Result};
use crate::losses::{
    dds_loss_into, ldr_loss_into, lrc_loss_into, photometric_loss_into, select_references,
    smoothness_depth_into, smoothness_image_into, warp_horizontal, LdrParams, References,
};
use crate::map::{ImageBuffer, Pixel, ScalarMap};
use crate::synth::Lcg;

pub const KINK_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Photometric,
    Lrc,
    Ldr,
    SmoothImage,
    SmoothDepth,
    Dds,
}

impl Term {
    pub const ALL: [Term; 6] = [
        Term::Photometric,
        Term::Lrc,
        Term::Ldr,
        Term::SmoothImage,
        Term::SmoothDepth,
        Term::Dds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::Photometric => "photometric",
            Term::Lrc => "lrc",
            Term::Ldr => "ldr",
            Term::SmoothImage => "smooth-image",
            Term::SmoothDepth => "smooth-depth",
            Term::Dds => "dds",
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Term::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Term::ALL.iter().map(|t| t.name()).collect();
                Error::InvalidParameter(format!("unknown term '{s}' (expected one of: {})", names.join(", ")))
            })
    }
}

/// A random loss-evaluation problem. References are fixed at construction
/// from the DDCV confidence of `(disparity, depth)`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub left: ImageBuffer,
    pub right: ImageBuffer,
    pub disparity: ScalarMap,
    pub right_disparity: ScalarMap,
    pub depth: ScalarMap,
    pub references: References,
}

pub fn random_instance(seed: u64, width: usize, height: usize) -> Result<Instance> {
    if width < 4 || height < 4 {
        return Err(Error::InvalidParameter(format!(
            "gradcheck instance must be at least 4x4, got {width}x{height}"
        )));
    }
    let mut rng = Lcg::new(seed);
    let n = width * height;
    let image = |rng: &mut Lcg| {
        let data = (0..n * 3).map(|_| rng.next_f64()).collect();
        ImageBuffer::new(width, height, 3, data)
    };
    let left = image(&mut rng)?;
    let right = image(&mut rng)?;
    let max_d = (width as f64 / 8.0).max(1.0);
    let disparity = ScalarMap::from_fn(width, height, |_, _| rng.uniform(0.5, 0.5 + max_d))?;
    let right_disparity = ScalarMap::from_fn(width, height, |_, _| rng.uniform(0.5, 0.5 + max_d))?;
    let depth = ScalarMap::from_fn(width, height, |_, _| rng.uniform(-3.0, 3.0))?;
    let confidence = confidence_map(&disparity, &depth, &DdcvParams::default())?;
    let references = select_references(&confidence, &LdrParams::default())?;
    Ok(Instance {
        left,
        right,
        disparity,
        right_disparity,
        depth,
        references,
    })
}

impl Instance {
    /// Value of `term` at disparity `d`, optionally with its gradient.
    pub fn eval(&self, term: Term, d: &ScalarMap, grad: Option<&mut [f64]>) -> Result<f64> {
        match term {
            Term::Photometric => photometric_loss_into(&self.left, &self.right, d, grad),
            Term::Lrc => lrc_loss_into(d, &self.right_disparity, grad),
            Term::Ldr => ldr_loss_into(d, &self.depth, &self.references, grad),
            Term::SmoothImage => smoothness_image_into(d, &self.left, grad),
            Term::SmoothDepth => smoothness_depth_into(d, &self.depth, grad),
            Term::Dds => dds_loss_into(d, &self.depth, grad),
        }
    }

    /// Pixels at which `term` is differentiable with margin [`KINK_MARGIN`].
    pub fn differentiable(&self, term: Term) -> Result<Vec<usize>> {
        let (w, h) = (self.disparity.width(), self.disparity.height());
        let d = self.disparity.values();
        let m = KINK_MARGIN;
        let sample_ok = |i: usize| {
            let s = (i % w) as f64 - d[i];
            let frac = s - s.floor();
            s > m && s < (w - 1) as f64 - m && frac > m && frac < 1.0 - m
        };
        let mut ok = vec![true; w * h];
        match term {
            Term::Photometric => {
                let warped = warp_horizontal(&self.right, &self.disparity)?.warped;
                let c = self.left.channels();
                for (i, flag) in ok.iter_mut().enumerate() {
                    *flag = sample_ok(i)
                        && (0..c).all(|ch| (self.left.data()[i * c + ch] - warped.data()[i * c + ch]).abs() > m);
                }
            }
            Term::Lrc => {
                let warped = warp_horizontal(&self.right_disparity, &self.disparity)?.warped;
                for (i, flag) in ok.iter_mut().enumerate() {
                    *flag = sample_ok(i) && (d[i] - warped.values()[i]).abs() > m;
                }
            }
            Term::Ldr => {
                let t = self.depth.values();
                for p in 0..w * h {
                    for &r in self.references.of_index(p) {
                        let r = r as usize;
                        if ((t[p] - t[r]) * (d[p] - d[r])).abs() <= m {
                            ok[p] = false;
                            ok[r] = false;
                        }
                    }
                }
            }
            Term::SmoothImage | Term::SmoothDepth | Term::Dds => {
                for y in 0..h {
                    for x in 0..w {
                        let p = y * w + x;
                        for q in [(x + 1 < w).then(|| p + 1), (y + 1 < h).then(|| p + w)].into_iter().flatten() {
                            if (d[q] - d[p]).abs() <= m {
                                ok[p] = false;
                                ok[q] = false;
                            }
                        }
                    }
                }
            }
        }
        Ok((0..w * h).filter(|&i| ok[i]).collect())
    }
}

/// Denominator floor of [`relative_error`]. A central difference at
/// `h = 1e-4` on an O(1) loss resolves gradients only to about 1e-12, so
/// near-cancelled gradients below this floor are compared absolutely.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-7;

/// `|a - n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

#[derive(Debug, Clone)]
pub struct GradcheckConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// Upper bound on checked pixels per term.
    pub samples: usize,
    pub step: f64,
    pub tolerance: f64,
    /// Negates the analytic gradient of one term, to exercise failure reporting.
    pub inject_sign_flip: Option<Term>,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            seed: 0,
            width: 32,
            height: 32,
            samples: 128,
            step: 1e-4,
            tolerance: 1e-4,
            inject_sign_flip: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermCheck {
    pub term: Term,
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst: Option<Pixel>,
    pub passed: bool,
}

pub fn check_term(inst: &Instance, term: Term, config: &GradcheckConfig) -> Result<TermCheck> {
    if !(config.step > 0.0) || !config.step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {}",
            config.step
        )));
    }
    let base = &inst.disparity;
    let (w, n) = (base.width(), base.len());
    let mut analytic = vec![0.0; n];
    inst.eval(term, base, Some(&mut analytic))?;
    if config.inject_sign_flip == Some(term) {
        analytic.iter_mut().for_each(|g| *g = -*g);
    }

    let mut candidates = inst.differentiable(term)?;
    // partial Fisher-Yates: first `samples` entries are a uniform subset
    let mut rng = Lcg::new(config.seed ^ 0x9e37_79b9_7f4a_7c15 ^ term as u64);
    let take = config.samples.min(candidates.len());
    for i in 0..take {
        let j = i + rng.below(candidates.len() - i);
        candidates.swap(i, j);
    }
    candidates.truncate(take);
    candidates.sort_unstable();

    let mut worst: Option<(f64, usize)> = None;
    let mut probe = base.clone();
    for &i in &candidates {
        let (x, y) = (i % w, i / w);
        let v = base.values()[i];
        probe.set(x, y, v + config.step)?;
        let plus = inst.eval(term, &probe, None)?;
        probe.set(x, y, v - config.step)?;
        let minus = inst.eval(term, &probe, None)?;
        probe.set(x, y, v)?;
        let numeric = (plus - minus) / (2.0 * config.step);
        let err = relative_error(analytic[i], numeric);
        if worst.is_none_or(|(e, _)| err > e) {
            worst = Some((err, i));
        }
    }
    let max_rel_error = worst.map_or(0.0, |(e, _)| e);
    Ok(TermCheck {
        term,
        checked: candidates.len(),
        max_rel_error,
        worst: worst.map(|(_, i)| Pixel::new(i % w, i / w)),
        passed: !candidates.is_empty() && max_rel_error < config.tolerance,
    })
}

pub fn gradcheck(config: &GradcheckConfig) -> Result<Vec<TermCheck>> {
    let inst = random_instance(config.seed, config.width, config.height)?;
    Term::ALL.iter().map(|&t| check_term(&inst, t, config)).collect()
}
