//! Disparity-depth consistency voting.
//!
//! Every valid neighbor `q` of a pixel `p` casts a binary vote on `D(p)`. The
//! vote is positive when the disparity pair `(D(p), D(q))` agrees with the
//! relative-depth pair `(Dt(p), Dt(q))` both in ordering (ranking
//! consistency) and in magnitude class (variation consistency). The
//! confidence of `p` is the fraction of positive votes.
//!
//! Both checks only look at `|ΔD|`, `|ΔDt|` and the sign of `ΔD·ΔDt`, so
//! `v(p, q) == v(q, p)`. The kernel evaluates each unordered pair once and
//! credits both endpoints. Vote tallies are integers, which makes the result
//! independent of how rows are split across threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{NeighborhoodSpec, Pixel, ScalarMap};

/// Which reading of the variation-consistency check to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormulaMode {
    /// Flat disparity across a depth discontinuity, or a disparity jump
    /// inside a depth-stable region, votes negative.
    #[default]
    Prose,
    /// The closed-form step-function expression evaluated term by term.
    Literal,
}

impl std::str::FromStr for FormulaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prose" => Ok(FormulaMode::Prose),
            "literal" => Ok(FormulaMode::Literal),
            other => Err(Error::InvalidParameter(format!(
                "unknown formula mode '{other}' (expected prose or literal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdcvParams {
    pub spec: NeighborhoodSpec,
    /// Slack on the variation check, `> 1`.
    pub sigma: f64,
    /// Disparity change below which a pair counts as flat, in pixels.
    pub stable_disparity_threshold: f64,
    pub formula_mode: FormulaMode,
}

impl Default for DdcvParams {
    fn default() -> Self {
        DdcvParams {
            spec: NeighborhoodSpec::default(),
            sigma: 2.0,
            stable_disparity_threshold: 1.0,
            formula_mode: FormulaMode::Prose,
        }
    }
}

impl DdcvParams {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.spec.max_taps() > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "window {} too large",
                self.spec.window
            )));
        }
        if !(self.sigma > 1.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and > 1, got {}",
                self.sigma
            )));
        }
        if !(self.stable_disparity_threshold > 0.0) || !self.stable_disparity_threshold.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "stable disparity threshold must be > 0, got {}",
                self.stable_disparity_threshold
            )));
        }
        Ok(())
    }
}

/// Rows per work unit. Fixed so floating-point reductions do not depend on
/// the thread count.
const BAND_ROWS: usize = 16;

/// Per-pair thresholds derived from the global scale.
#[derive(Debug, Clone, Copy)]
struct Thresholds {
    gamma: f64,
    gamma_sigma: f64,
    sigma: f64,
    stable: f64,
    literal: bool,
}

impl Thresholds {
    fn new(gamma: f64, params: &DdcvParams) -> Self {
        Thresholds {
            gamma,
            gamma_sigma: gamma * params.sigma,
            sigma: params.sigma,
            stable: params.stable_disparity_threshold,
            literal: params.formula_mode == FormulaMode::Literal,
        }
    }
}

#[inline(always)]
fn rc_vote(dd: f64, dt: f64) -> bool {
    dd * dt >= 0.0
}

#[inline(always)]
fn vc_vote_prose(ad: f64, at: f64, th: &Thresholds) -> bool {
    // `at >= gamma*sigma` is `|ΔDt| / gamma >= sigma` without the division.
    let flat_at_edge = at >= th.gamma_sigma && ad < th.stable;
    let jump_in_flat = at <= th.gamma && ad > th.sigma;
    !(flat_at_edge || jump_in_flat)
}

#[inline(always)]
fn vc_vote_literal(ad: f64, at: f64, th: &Thresholds) -> bool {
    // Θ(Θ(at − γσ)·(1 − ad)) · Θ(Θ(γ − at)·(ad − σ)); Θ(0·x) = 1.
    let first = at < th.gamma_sigma || 1.0 - ad >= 0.0;
    let second = th.gamma - at < 0.0 || ad - th.sigma >= 0.0;
    first && second
}

/// Ranking-consistency vote: 1 when the two variations do not disagree in sign.
pub fn vote_rc(dd: f64, dt: f64) -> Result<u8> {
    if !dd.is_finite() || !dt.is_finite() {
        return Err(Error::NonFiniteStep(dd * dt));
    }
    // the product of finite values may overflow; only its sign matters
    Ok(u8::from(rc_vote(dd, dt)))
}

/// Variation-consistency vote for one pair under the given global scale.
pub fn vote_vc(dd: f64, dt: f64, gamma: f64, params: &DdcvParams) -> Result<u8> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "global scale must be finite and > 0, got {gamma}"
        )));
    }
    if !dd.is_finite() || !dt.is_finite() {
        return Err(Error::NonFiniteStep(if dd.is_finite() { dt } else { dd }));
    }
    let th = Thresholds::new(gamma, params);
    let ok = if th.literal {
        vc_vote_literal(dd.abs(), dt.abs(), &th)
    } else {
        vc_vote_prose(dd.abs(), dt.abs(), &th)
    };
    Ok(u8::from(ok))
}

/// Final vote of `q` on `p`: the product of both checks.
pub fn vote(
    p: Pixel,
    q: Pixel,
    disparity: &ScalarMap,
    depth: &ScalarMap,
    gamma: f64,
    params: &DdcvParams,
) -> Result<u8> {
    disparity.ensure_same_shape(depth)?;
    for px in [p, q] {
        if px.x >= disparity.width() || px.y >= disparity.height() {
            return Err(Error::InvalidParameter(format!("pixel {px:?} out of bounds")));
        }
    }
    let (Some(dp), Some(dq), Some(tp), Some(tq)) = (
        disparity.value(p.x, p.y),
        disparity.value(q.x, q.y),
        depth.value(p.x, p.y),
        depth.value(q.x, q.y),
    ) else {
        return Err(Error::InvalidParameter(
            "vote requires both pixels valid in both maps".into(),
        ));
    };
    let (dd, dt) = (dp - dq, tp - tq);
    Ok(vote_rc(dd, dt)? * vote_vc(dd, dt, gamma, params)?)
}

/// Disparity and depth with a joint mask, laid out for the span kernels.
struct Joint<'a> {
    width: usize,
    height: usize,
    d: &'a [f64],
    t: &'a [f64],
    ok: Vec<u8>,
    all_valid: bool,
}

impl<'a> Joint<'a> {
    fn new(disparity: &'a ScalarMap, depth: &'a ScalarMap) -> Result<Self> {
        disparity.ensure_same_shape(depth)?;
        let ok: Vec<u8> = disparity
            .mask()
            .iter()
            .zip(depth.mask())
            .map(|(&a, &b)| u8::from(a && b))
            .collect();
        let all_valid = ok.iter().all(|&v| v == 1);
        Ok(Joint {
            width: disparity.width(),
            height: disparity.height(),
            d: disparity.values(),
            t: depth.values(),
            ok,
            all_valid,
        })
    }

    /// Pairs between row `y` and row `y + dy` at horizontal offset `dx`,
    /// or `None` when no such pair is in bounds.
    #[inline]
    fn span(&self, y: usize, dx: isize, dy: isize) -> Option<Span> {
        let w = self.width as isize;
        let len = w - dx.abs();
        let qy = y + dy as usize;
        if len <= 0 || qy >= self.height {
            return None;
        }
        let (ps, qs) = if dx >= 0 { (0, dx as usize) } else { ((-dx) as usize, 0) };
        Some(Span {
            p0: y * self.width + ps,
            q0: qy * self.width + qs,
            len: len as usize,
        })
    }
}

/// `len` consecutive pairs `(p0 + i, q0 + i)`.
#[derive(Debug, Clone, Copy)]
struct Span {
    p0: usize,
    q0: usize,
    len: usize,
}

/// Offsets covering each unordered pair once: `dy > 0`, or `dy == 0, dx > 0`.
fn half_offsets(spec: &NeighborhoodSpec) -> Vec<(isize, isize)> {
    spec.offsets()
        .into_iter()
        .filter(|&(dx, dy)| dy > 0 || (dy == 0 && dx > 0))
        .collect()
}

// The span kernels come in a portable and an AVX2 flavor that produce
// bit-identical results: the scale sums use interleaved accumulators (lane
// `i % SCALE_LANES` over the first `len & !(SCALE_LANES - 1)` pairs), a fixed
// reduction tree and a sequential tail; the votes are exact.

const SCALE_LANES: usize = 16;

#[inline(always)]
fn scale_span_portable(j: &Joint<'_>, s: Span) -> (f64, f64) {
    let body = s.len & !(SCALE_LANES - 1);
    let mut num = [0.0f64; SCALE_LANES];
    let mut den = [0.0f64; SCALE_LANES];
    for c in (0..body).step_by(SCALE_LANES) {
        for k in 0..SCALE_LANES {
            let (p, q) = (s.p0 + c + k, s.q0 + c + k);
            if j.ok[p] & j.ok[q] == 1 {
                num[k] += (j.t[p] - j.t[q]).abs();
                den[k] += (j.d[p] - j.d[q]).abs();
            }
        }
    }
    let (tn, td) = scale_tail(j, s, body);
    (reduce_lanes(&num) + tn, reduce_lanes(&den) + td)
}

/// Fixed reduction tree over the scale accumulators, shared by both flavors.
#[inline(always)]
fn reduce_lanes(a: &[f64; SCALE_LANES]) -> f64 {
    let v: [f64; 4] = std::array::from_fn(|l| (a[l] + a[4 + l]) + (a[8 + l] + a[12 + l]));
    (v[0] + v[1]) + (v[2] + v[3])
}

#[inline(always)]
fn scale_tail(j: &Joint<'_>, s: Span, from: usize) -> (f64, f64) {
    let (mut num, mut den) = (0.0, 0.0);
    for i in from..s.len {
        let (p, q) = (s.p0 + i, s.q0 + i);
        if j.ok[p] & j.ok[q] == 1 {
            num += (j.t[p] - j.t[q]).abs();
            den += (j.d[p] - j.d[q]).abs();
        }
    }
    (num, den)
}

/// Packed tally increment: vote in the low 16 bits, pair count in the high.
#[inline(always)]
fn pack(vote: bool, ok: bool) -> u32 {
    u32::from(vote && ok) | (u32::from(ok) << 16)
}

#[inline(always)]
fn pair_vote<const LITERAL: bool>(dd: f64, dt: f64, th: &Thresholds) -> bool {
    let vc = if LITERAL {
        vc_vote_literal(dd.abs(), dt.abs(), th)
    } else {
        vc_vote_prose(dd.abs(), dt.abs(), th)
    };
    rc_vote(dd, dt) && vc
}

/// Adds the packed vote of every pair of `s` at both endpoints. Endpoint
/// `p0 + i` lands at `tally[lp + i]`, `q0 + i` at `tally[lq + i]`.
#[inline(always)]
fn vote_span_portable<const LITERAL: bool>(
    j: &Joint<'_>,
    s: Span,
    from: usize,
    tally: &mut [u32],
    (lp, lq): (usize, usize),
    th: &Thresholds,
) {
    for i in from..s.len {
        let (p, q) = (s.p0 + i, s.q0 + i);
        let ok = j.ok[p] & j.ok[q] == 1;
        let v = pack(pair_vote::<LITERAL>(j.d[p] - j.d[q], j.t[p] - j.t[q], th), ok);
        tally[lp + i] += v;
        tally[lq + i] += v;
    }
}

#[cfg(target_arch = "x86_64")]
mod avx2 {
    use std::arch::x86_64::*;

    use super::{reduce_lanes, scale_tail, vote_span_portable, Joint, Span, Thresholds, SCALE_LANES};

    #[inline(always)]
    unsafe fn joint_ok4(j: &Joint<'_>, p: usize, q: usize) -> i32 {
        let a = (j.ok.as_ptr().add(p) as *const u32).read_unaligned();
        let b = (j.ok.as_ptr().add(q) as *const u32).read_unaligned();
        (a & b) as i32
    }

    /// # Safety
    /// Requires AVX2 and a span inside the joint buffers.
    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn scale_span<const MASKED: bool>(j: &Joint<'_>, s: Span) -> (f64, f64) {
        let n = j.d.len();
        assert!(s.p0 + s.len <= n && s.q0 + s.len <= n);
        let body = s.len & !(SCALE_LANES - 1);
        let sign = _mm256_set1_pd(-0.0);
        let (d, t) = (j.d.as_ptr(), j.t.as_ptr());
        let mut acc_n = [_mm256_setzero_pd(); 4];
        let mut acc_d = [_mm256_setzero_pd(); 4];
        let mut i = 0;
        while i < body {
            for k in 0..4 {
                let (p, q) = (s.p0 + i + 4 * k, s.q0 + i + 4 * k);
                let mut at = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(t.add(p)), _mm256_loadu_pd(t.add(q))));
                let mut ad = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(d.add(p)), _mm256_loadu_pd(d.add(q))));
                if MASKED {
                    let ok = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(joint_ok4(j, p, q)));
                    let mask = _mm256_castsi256_pd(_mm256_sub_epi64(_mm256_setzero_si256(), ok));
                    at = _mm256_and_pd(at, mask);
                    ad = _mm256_and_pd(ad, mask);
                }
                acc_n[k] = _mm256_add_pd(acc_n[k], at);
                acc_d[k] = _mm256_add_pd(acc_d[k], ad);
            }
            i += SCALE_LANES;
        }
        let mut num = [0.0f64; SCALE_LANES];
        let mut den = [0.0f64; SCALE_LANES];
        for k in 0..4 {
            _mm256_storeu_pd(num.as_mut_ptr().add(4 * k), acc_n[k]);
            _mm256_storeu_pd(den.as_mut_ptr().add(4 * k), acc_d[k]);
        }
        let (tn, td) = scale_tail(j, s, body);
        (reduce_lanes(&num) + tn, reduce_lanes(&den) + td)
    }

    /// `VOTE_LANES[m][k]` is bit `k` of `m`.
    static VOTE_LANES: [[u32; 8]; 256] = {
        let mut t = [[0u32; 8]; 256];
        let mut m = 0;
        while m < 256 {
            let mut k = 0;
            while k < 8 {
                t[m][k] = ((m >> k) & 1) as u32;
                k += 1;
            }
            m += 1;
        }
        t
    };

    /// # Safety
    /// Requires AVX2 and spans inside the joint and tally buffers. `scratch`
    /// must hold at least `s.len` entries.
    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn vote_span<const LITERAL: bool, const MASKED: bool>(
        j: &Joint<'_>,
        s: Span,
        tally: &mut [u32],
        (lp, lq): (usize, usize),
        scratch: &mut [u32],
        th: &Thresholds,
    ) {
        let n = j.d.len();
        assert!(s.p0 + s.len <= n && s.q0 + s.len <= n);
        assert!(lp + s.len <= tally.len() && lq + s.len <= tally.len() && s.len <= scratch.len());
        let body = s.len & !7;
        // Destinations closer than one vector would make each update read a
        // partially stored vector; stage those spans in `scratch` instead.
        let direct = lp.abs_diff(lq) >= 8;
        let sign = _mm256_set1_pd(-0.0);
        let zero = _mm256_setzero_pd();
        let one = _mm256_set1_pd(1.0);
        let gamma = _mm256_set1_pd(th.gamma);
        let gamma_sigma = _mm256_set1_pd(th.gamma_sigma);
        let sigma = _mm256_set1_pd(th.sigma);
        let stable = _mm256_set1_pd(th.stable);
        let pair = _mm256_set1_epi32(1 << 16);
        let (d, t) = (j.d.as_ptr(), j.t.as_ptr());
        let quad = |p: usize, q: usize| -> i32 {
            let dd = _mm256_sub_pd(_mm256_loadu_pd(d.add(p)), _mm256_loadu_pd(d.add(q)));
            let dt = _mm256_sub_pd(_mm256_loadu_pd(t.add(p)), _mm256_loadu_pd(t.add(q)));
            let ad = _mm256_andnot_pd(sign, dd);
            let at = _mm256_andnot_pd(sign, dt);
            let rc = _mm256_cmp_pd(_mm256_mul_pd(dd, dt), zero, _CMP_GE_OQ);
            let vote = if LITERAL {
                let first = _mm256_or_pd(
                    _mm256_cmp_pd(at, gamma_sigma, _CMP_LT_OQ),
                    _mm256_cmp_pd(_mm256_sub_pd(one, ad), zero, _CMP_GE_OQ),
                );
                let second = _mm256_or_pd(
                    _mm256_cmp_pd(_mm256_sub_pd(gamma, at), zero, _CMP_LT_OQ),
                    _mm256_cmp_pd(_mm256_sub_pd(ad, sigma), zero, _CMP_GE_OQ),
                );
                _mm256_and_pd(rc, _mm256_and_pd(first, second))
            } else {
                let flat_at_edge = _mm256_and_pd(
                    _mm256_cmp_pd(at, gamma_sigma, _CMP_GE_OQ),
                    _mm256_cmp_pd(ad, stable, _CMP_LT_OQ),
                );
                let jump_in_flat = _mm256_and_pd(
                    _mm256_cmp_pd(at, gamma, _CMP_LE_OQ),
                    _mm256_cmp_pd(ad, sigma, _CMP_GT_OQ),
                );
                _mm256_andnot_pd(jump_in_flat, _mm256_andnot_pd(flat_at_edge, rc))
            };
            _mm256_movemask_pd(vote)
        };
        let out = tally.as_mut_ptr();
        let stage = scratch.as_mut_ptr();
        let mut i = 0;
        while i < body {
            let (p, q) = (s.p0 + i, s.q0 + i);
            let m = (quad(p, q) | (quad(p + 4, q + 4) << 4)) as usize;
            let votes = _mm256_loadu_si256(VOTE_LANES[m].as_ptr() as *const __m256i);
            let lanes = if MASKED {
                let a = (j.ok.as_ptr().add(p) as *const u64).read_unaligned();
                let b = (j.ok.as_ptr().add(q) as *const u64).read_unaligned();
                let ok = _mm256_cvtepu8_epi32(_mm_cvtsi64_si128((a & b) as i64));
                _mm256_or_si256(_mm256_and_si256(votes, ok), _mm256_slli_epi32(ok, 16))
            } else {
                _mm256_or_si256(votes, pair)
            };
            if direct {
                let a = out.add(lp + i) as *mut __m256i;
                _mm256_storeu_si256(a, _mm256_add_epi32(_mm256_loadu_si256(a), lanes));
                let b = out.add(lq + i) as *mut __m256i;
                _mm256_storeu_si256(b, _mm256_add_epi32(_mm256_loadu_si256(b), lanes));
            } else {
                _mm256_storeu_si256(stage.add(i) as *mut __m256i, lanes);
            }
            i += 8;
        }
        if !direct {
            for k in 0..body {
                tally[lp + k] += scratch[k];
            }
            for k in 0..body {
                tally[lq + k] += scratch[k];
            }
        }
        vote_span_portable::<LITERAL>(j, s, body, tally, (lp, lq), th);
    }
}

fn has_avx2() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        is_x86_feature_detected!("avx2")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

fn scale_span(j: &Joint<'_>, s: Span, simd: bool) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if simd {
        // SAFETY: `simd` is only set after runtime detection of AVX2; the
        // span comes from `Joint::span` and is asserted in bounds.
        return unsafe {
            if j.all_valid {
                avx2::scale_span::<false>(j, s)
            } else {
                avx2::scale_span::<true>(j, s)
            }
        };
    }
    let _ = simd;
    scale_span_portable(j, s)
}

fn vote_span(
    j: &Joint<'_>,
    s: Span,
    tally: &mut [u32],
    dst: (usize, usize),
    scratch: &mut [u32],
    th: &Thresholds,
    simd: bool,
) {
    #[cfg(target_arch = "x86_64")]
    if simd {
        // SAFETY: as in `scale_span`; tally and scratch bounds are asserted.
        unsafe {
            match (th.literal, j.all_valid) {
                (true, true) => avx2::vote_span::<true, false>(j, s, tally, dst, scratch, th),
                (true, false) => avx2::vote_span::<true, true>(j, s, tally, dst, scratch, th),
                (false, true) => avx2::vote_span::<false, false>(j, s, tally, dst, scratch, th),
                (false, false) => avx2::vote_span::<false, true>(j, s, tally, dst, scratch, th),
            }
        }
        return;
    }
    let _ = (simd, scratch);
    if th.literal {
        vote_span_portable::<true>(j, s, 0, tally, dst, th);
    } else {
        vote_span_portable::<false>(j, s, 0, tally, dst, th);
    }
}

fn global_scale_joint(joint: &Joint<'_>, spec: &NeighborhoodSpec, simd: bool) -> Result<f64> {
    let offsets = half_offsets(spec);
    let h = joint.height;
    let bands: Vec<(f64, f64)> = (0..h.div_ceil(BAND_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut num = 0.0;
            let mut den = 0.0;
            for y in b * BAND_ROWS..((b + 1) * BAND_ROWS).min(h) {
                for &(dx, dy) in &offsets {
                    if let Some(s) = joint.span(y, dx, dy) {
                        let (n, d) = scale_span(joint, s, simd);
                        num += n;
                        den += d;
                    }
                }
            }
            (num, den)
        })
        .collect();
    let (num, den) = bands
        .iter()
        .fold((0.0, 0.0), |(n, d), &(bn, bd)| (n + bn, d + bd));
    if !(den > 0.0) {
        return Err(Error::DegenerateDisparity);
    }
    Ok(num / den)
}

/// Ratio of summed absolute depth variation to summed absolute disparity
/// variation over every neighbor pair valid in both maps.
///
/// Fails with [`Error::DegenerateDisparity`] when the disparity never varies.
pub fn global_scale(disparity: &ScalarMap, depth: &ScalarMap, spec: &NeighborhoodSpec) -> Result<f64> {
    spec.validate()?;
    let joint = Joint::new(disparity, depth)?;
    global_scale_joint(&joint, spec, has_avx2())
}

/// Per-pixel confidence as the mean of neighbor votes.
///
/// Pixels invalid in either input are invalid in the output. A valid pixel
/// with no valid neighbor gets confidence 0.
pub fn confidence_map(disparity: &ScalarMap, depth: &ScalarMap, params: &DdcvParams) -> Result<ScalarMap> {
    confidence_map_with(disparity, depth, params, has_avx2())
}

fn confidence_map_with(
    disparity: &ScalarMap,
    depth: &ScalarMap,
    params: &DdcvParams,
    simd: bool,
) -> Result<ScalarMap> {
    params.validate()?;
    let joint = Joint::new(disparity, depth)?;
    let (w, h) = (joint.width, joint.height);
    if joint.ok.iter().all(|&v| v == 0) {
        return ScalarMap::with_mask(w, h, vec![0.0; w * h], vec![false; w * h]);
    }
    let gamma = global_scale_joint(&joint, &params.spec, simd)?;
    let th = Thresholds::new(gamma, params);
    let offsets = half_offsets(&params.spec);
    let radius = params.spec.radius();

    // Each band tallies its own rows plus the `radius` rows below, which
    // receive the symmetric half of each vote.
    let partials: Vec<(usize, Vec<u32>)> = (0..h.div_ceil(BAND_ROWS))
        .into_par_iter()
        .map(|b| {
            let y0 = b * BAND_ROWS;
            let y1 = ((b + 1) * BAND_ROWS).min(h);
            let base = y0 * w;
            let mut tally = vec![0u32; ((y1 + radius).min(h) - y0) * w];
            let mut scratch = vec![0u32; w];
            for y in y0..y1 {
                for &(dx, dy) in &offsets {
                    if let Some(s) = joint.span(y, dx, dy) {
                        let dst = (s.p0 - base, s.q0 - base);
                        vote_span(&joint, s, &mut tally, dst, &mut scratch, &th, simd);
                    }
                }
            }
            (base, tally)
        })
        .collect();

    let mut tally = vec![0u32; w * h];
    for (base, part) in partials {
        for (dst, src) in tally[base..base + part.len()].iter_mut().zip(&part) {
            *dst += src;
        }
    }

    let valid: Vec<bool> = joint.ok.iter().map(|&o| o == 1).collect();
    let values = tally
        .iter()
        .zip(&valid)
        .map(|(&t, &ok)| {
            let (votes, pairs) = (t & 0xffff, t >> 16);
            if ok && pairs > 0 {
                f64::from(votes) / f64::from(pairs)
            } else {
                0.0
            }
        })
        .collect();
    ScalarMap::with_mask(w, h, values, valid)
}
