//! Disparity accuracy metrics and confidence evaluation by sparsification.
//!
//! Only pixels valid in both the estimate and the ground truth are counted.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::map::ScalarMap;

/// Absolute errors over pixels valid in both maps, with their ground truth.
fn counted_errors(est: &ScalarMap, gt: &ScalarMap) -> Result<Vec<(usize, f64, f64)>> {
    est.ensure_same_shape(gt)?;
    let errs: Vec<_> = (0..est.len())
        .filter(|&i| est.mask()[i] && gt.mask()[i])
        .map(|i| (i, (est.values()[i] - gt.values()[i]).abs(), gt.values()[i]))
        .collect();
    if errs.is_empty() {
        return Err(Error::NoValidPixels("estimate and ground truth do not overlap"));
    }
    Ok(errs)
}

/// Mean absolute disparity error.
pub fn epe(est: &ScalarMap, gt: &ScalarMap) -> Result<f64> {
    let errs = counted_errors(est, gt)?;
    Ok(errs.iter().map(|e| e.1).sum::<f64>() / errs.len() as f64)
}

/// Percentage of pixels whose error exceeds `delta` pixels.
pub fn pep(est: &ScalarMap, gt: &ScalarMap, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {delta}")));
    }
    let errs = counted_errors(est, gt)?;
    let bad = errs.iter().filter(|e| e.1 > delta).count();
    Ok(100.0 * bad as f64 / errs.len() as f64)
}

/// True when the error exceeds both 3 px and 5% of the ground truth.
pub fn is_d1_outlier(est: f64, gt: f64) -> bool {
    let err = (est - gt).abs();
    err > 3.0 && err > 0.05 * gt
}

/// Percentage of D1 outliers.
pub fn d1(est: &ScalarMap, gt: &ScalarMap) -> Result<f64> {
    let errs = counted_errors(est, gt)?;
    let bad = errs
        .iter()
        .filter(|&&(_, err, g)| err > 3.0 && err > 0.05 * g)
        .count();
    Ok(100.0 * bad as f64 / errs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMetrics {
    pub epe: f64,
    /// `(delta, percentage)` in the order requested.
    pub pep: Vec<(f64, f64)>,
    pub d1: f64,
}

pub fn disparity_metrics(est: &ScalarMap, gt: &ScalarMap, deltas: &[f64]) -> Result<DisparityMetrics> {
    Ok(DisparityMetrics {
        epe: epe(est, gt)?,
        pep: deltas
            .iter()
            .map(|&d| pep(est, gt, d).map(|v| (d, v)))
            .collect::<Result<_>>()?,
        d1: d1(est, gt)?,
    })
}

/// Retained-subset EPE sampled at increasing density.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsificationCurve {
    /// `(density, epe)` with density in `(0, 1]`, strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub auc: f64,
}

pub const DEFAULT_STEPS: usize = 100;

/// Area under the sampled curve times 100. The segment `[0, 1/steps]` takes
/// the first sample's value; the rest is trapezoidal.
fn area(samples: &[(f64, f64)]) -> f64 {
    let mut a = samples[0].0 * samples[0].1;
    for pair in samples.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        a += (x1 - x0) * (y0 + y1) * 0.5;
    }
    100.0 * a
}

/// Builds the curve from errors already in retention order. The last sample
/// is the full-map EPE summed in row-major order.
fn curve_from_order(ordered: &[f64], full_epe: f64, steps: usize) -> SparsificationCurve {
    let n = ordered.len();
    let mut samples = Vec::with_capacity(steps);
    let mut prefix = 0.0;
    let mut taken = 0usize;
    for i in 1..=steps {
        let keep = (i * n).div_ceil(steps);
        while taken < keep {
            prefix += ordered[taken];
            taken += 1;
        }
        let value = if i == steps { full_epe } else { prefix / keep as f64 };
        samples.push((i as f64 / steps as f64, value));
    }
    let auc = area(&samples);
    SparsificationCurve { samples, auc }
}

fn check_steps(steps: usize, counted: usize) -> Result<()> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("steps must be >= 2, got {steps}")));
    }
    if counted < steps {
        return Err(Error::InvalidParameter(format!(
            "{counted} counted pixels is fewer than {steps} steps"
        )));
    }
    Ok(())
}

/// Adds pixels in descending confidence (ties in row-major order) and records
/// the EPE of the retained set at densities `i / steps`.
///
/// Pixels with invalid confidence are retained last.
pub fn sparsification(
    est: &ScalarMap,
    gt: &ScalarMap,
    confidence: &ScalarMap,
    steps: usize,
) -> Result<SparsificationCurve> {
    est.ensure_same_shape(confidence)?;
    let errs = counted_errors(est, gt)?;
    check_steps(steps, errs.len())?;
    let full = errs.iter().map(|e| e.1).sum::<f64>() / errs.len() as f64;
    let mut order: Vec<(f64, f64)> = errs
        .iter()
        .map(|&(i, err, _)| {
            let c = if confidence.mask()[i] {
                confidence.values()[i]
            } else {
                f64::NEG_INFINITY
            };
            (c, err)
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ordered: Vec<f64> = order.into_iter().map(|o| o.1).collect();
    Ok(curve_from_order(&ordered, full, steps))
}

/// Curve obtained by retaining pixels in ascending order of their true error.
pub fn optimal_curve(est: &ScalarMap, gt: &ScalarMap, steps: usize) -> Result<SparsificationCurve> {
    let errs = counted_errors(est, gt)?;
    check_steps(steps, errs.len())?;
    let full = errs.iter().map(|e| e.1).sum::<f64>() / errs.len() as f64;
    let mut ordered: Vec<f64> = errs.iter().map(|e| e.1).collect();
    ordered.sort_by(f64::total_cmp);
    Ok(curve_from_order(&ordered, full, steps))
}

/// Lower bound on the AUC of any confidence map for this estimate.
pub fn optimal_auc(est: &ScalarMap, gt: &ScalarMap, steps: usize) -> Result<f64> {
    optimal_curve(est, gt, steps).map(|c| c.auc)
}

/// Milliseconds per megapixel for a duration measured on `pixels` pixels.
pub fn ms_per_megapixel(ms: f64, pixels: usize) -> f64 {
    ms * 1e6 / pixels as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub median_ms: f64,
    pub ms_per_megapixel: f64,
    pub runs_ms: Vec<f64>,
}

/// Runs `kernel` `repetitions` times and reports the median wall-clock time,
/// also normalised to one megapixel.
pub fn time_per_megapixel<T>(pixels: usize, repetitions: usize, mut kernel: impl FnMut() -> T) -> Result<Timing> {
    if repetitions < 3 {
        return Err(Error::InvalidParameter(format!(
            "repetitions must be >= 3, got {repetitions}"
        )));
    }
    if pixels == 0 {
        return Err(Error::InvalidParameter("pixel count must be > 0".into()));
    }
    let mut runs_ms = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        std::hint::black_box(kernel());
        runs_ms.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mut sorted = runs_ms.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median_ms = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(Timing {
        median_ms,
        ms_per_megapixel: ms_per_megapixel(median_ms, pixels),
        runs_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(vals: &[f64]) -> ScalarMap {
        ScalarMap::new(vals.len(), 1, vals.to_vec()).unwrap()
    }

    #[test]
    fn epe_cases() {
        let gt = row(&[1.0, 2.0]);
        assert_eq!(epe(&gt, &gt).unwrap(), 0.0);
        assert_eq!(epe(&row(&[2.0, 5.0]), &gt).unwrap(), 2.0);
        let none = ScalarMap::with_mask(2, 1, vec![0.0; 2], vec![false; 2]).unwrap();
        assert!(matches!(epe(&gt, &none), Err(Error::NoValidPixels(_))));
    }

    #[test]
    fn pep_cases() {
        let gt = row(&[10.0, 10.0]);
        assert_eq!(pep(&gt, &gt, 3.0).unwrap(), 0.0);
        assert_eq!(pep(&row(&[12.0, 14.0]), &gt, 3.0).unwrap(), 50.0);
        assert_eq!(pep(&row(&[14.0, 6.0]), &gt, 3.0).unwrap(), 100.0);
        assert!(pep(&gt, &gt, 0.0).is_err());
    }

    #[test]
    fn d1_both_conditions() {
        assert!(!is_d1_outlier(12.0, 10.0));
        assert!(!is_d1_outlier(104.0, 100.0));
        assert!(is_d1_outlier(14.0, 10.0));
        let v = d1(&row(&[12.0, 104.0, 14.0, 50.0]), &row(&[10.0, 100.0, 10.0, 50.0])).unwrap();
        assert_eq!(v, 25.0);
    }

    #[test]
    fn four_pixel_curve() {
        let gt = row(&[0.0; 4]);
        let est = row(&[2.0, 0.0, 2.0, 0.0]);
        // confidence ranks errors ascending
        let conf = row(&[0.1, 0.9, 0.2, 0.8]);
        let c = sparsification(&est, &gt, &conf, 4).unwrap();
        let epes: Vec<f64> = c.samples.iter().map(|s| s.1).collect();
        assert_eq!(epes, vec![0.0, 0.0, 2.0 / 3.0, 1.0]);
        let expect = 100.0 * (0.0 + 0.25 * (0.0 + 0.0) / 2.0 + 0.25 * (0.0 + 2.0 / 3.0) / 2.0 + 0.25 * (2.0 / 3.0 + 1.0) / 2.0);
        assert!((c.auc - expect).abs() < 1e-12);
        assert_eq!(optimal_auc(&est, &gt, 4).unwrap(), c.auc);
    }

    #[test]
    fn constant_confidence_ends_at_full_epe() {
        let gt = row(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let est = row(&[1.5, 2.0, 0.0, 4.25, 9.0]);
        let conf = row(&[0.5; 5]);
        let c = sparsification(&est, &gt, &conf, 3).unwrap();
        assert_eq!(c.samples.last().unwrap().1, epe(&est, &gt).unwrap());
        assert_eq!(c.samples.last().unwrap().0, 1.0);
    }

    #[test]
    fn zero_error_optimal_auc() {
        let gt = row(&[1.0, 2.0, 3.0]);
        assert_eq!(optimal_auc(&gt, &gt, 3).unwrap(), 0.0);
    }

    #[test]
    fn step_validation() {
        let gt = row(&[1.0, 2.0, 3.0]);
        assert!(sparsification(&gt, &gt, &gt, 1).is_err());
        assert!(sparsification(&gt, &gt, &gt, 4).is_err());
    }

    #[test]
    fn normalisation() {
        assert_eq!(ms_per_megapixel(10.0, 1_000_000), 10.0);
        assert_eq!(ms_per_megapixel(2.5, 250_000), 10.0);
        assert!(time_per_megapixel(10, 2, || ()).is_err());
        let t = time_per_megapixel(1000, 3, || 1 + 1).unwrap();
        assert_eq!(t.runs_ms.len(), 3);
    }

    fn instance() -> impl Strategy<Value = (ScalarMap, ScalarMap, ScalarMap)> {
        proptest::collection::vec((0.0f64..20.0, 0.0f64..20.0, 0.0f64..1.0), 40).prop_map(|v| {
            let gt: Vec<f64> = v.iter().map(|t| t.0).collect();
            let est: Vec<f64> = v.iter().map(|t| t.1).collect();
            let conf: Vec<f64> = v.iter().map(|t| t.2).collect();
            (
                ScalarMap::new(8, 5, est).unwrap(),
                ScalarMap::new(8, 5, gt).unwrap(),
                ScalarMap::new(8, 5, conf).unwrap(),
            )
        })
    }

    proptest! {
        #[test]
        fn optimal_is_a_lower_bound((est, gt, conf) in instance(), steps in 2usize..40) {
            let c = sparsification(&est, &gt, &conf, steps).unwrap();
            let opt = optimal_auc(&est, &gt, steps).unwrap();
            prop_assert!(opt <= c.auc * (1.0 + 1e-12) + 1e-12);
            prop_assert_eq!(c.samples.last().unwrap().1, epe(&est, &gt).unwrap());
            prop_assert!(c.samples.windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn pep_non_increasing((est, gt, _c) in instance(), a in 0.1f64..5.0, b in 0.1f64..5.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(pep(&est, &gt, lo).unwrap() >= pep(&est, &gt, hi).unwrap());
        }

        #[test]
        fn reshuffle_invariance((est, gt, conf) in instance(), seed in any::<u64>()) {
            // confidences are distinct with probability 1
            let n = est.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut rng = crate::synth::Lcg::new(seed);
            for i in (1..n).rev() {
                perm.swap(i, rng.below(i + 1));
            }
            let shuffle = |m: &ScalarMap| {
                ScalarMap::new(8, 5, perm.iter().map(|&i| m.values()[i]).collect()).unwrap()
            };
            let (e2, g2, c2) = (shuffle(&est), shuffle(&gt), shuffle(&conf));
            prop_assert!((epe(&est, &gt).unwrap() - epe(&e2, &g2).unwrap()).abs() < 1e-12);
            prop_assert_eq!(d1(&est, &gt).unwrap(), d1(&e2, &g2).unwrap());
            prop_assert_eq!(pep(&est, &gt, 1.0).unwrap(), pep(&e2, &g2, 1.0).unwrap());
            let a = sparsification(&est, &gt, &conf, 10).unwrap();
            let b = sparsification(&e2, &g2, &c2, 10).unwrap();
            prop_assert!((a.auc - b.auc).abs() < 1e-9);
        }
    }
}
