//! C interface to the confidence, loss and evaluation kernels.
//!
//! Maps and images cross the boundary as opaque handles created by
//! `ddcv_map_new` / `ddcv_image_new` (or the file readers) and released with
//! the matching `_free`. Every fallible call returns a [`DdcvStatus`]; on
//! failure `ddcv_last_error_message` describes the error for the calling
//! thread. Gradient buffers are owned by the caller and must hold
//! `width * height` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ddcv::eval::{self, DEFAULT_STEPS};
use ddcv::imgio::{self, MapFormat};
use ddcv::losses::{self, LdrParams};
use ddcv::{
    DdcvParams, Error, FormulaMode, ImageBuffer, LossInputs, LossWeights, NeighborhoodSpec, ScalarMap,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdcvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateDisparity = 4,
    NoValidPixels = 5,
    Io = 6,
    Panic = 7,
}

/// Scalar map with a validity mask.
pub struct DdcvMap(ScalarMap);

/// Interleaved 1- or 3-channel image with intensities in [0, 1].
pub struct DdcvImage(ImageBuffer);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdcvConfidenceParams {
    pub window: usize,
    pub dilation: usize,
    pub sigma: f64,
    pub stable_disparity_threshold: f64,
    /// Non-zero selects the literal vote formula instead of the default.
    pub literal_formula: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdcvLdrParams {
    pub k: usize,
    pub window: usize,
    pub dilation: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdcvLossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DdcvLossReport {
    pub photometric: f64,
    pub lrc: f64,
    pub ldr: f64,
    pub dds: f64,
    pub total: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(DdcvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::DimensionMismatch { .. } => DdcvStatus::DimensionMismatch,
            Error::DegenerateDisparity => DdcvStatus::DegenerateDisparity,
            Error::NoValidPixels(_) => DdcvStatus::NoValidPixels,
            Error::Io { .. } | Error::Image { .. } | Error::Malformed { .. } => DdcvStatus::Io,
            _ => DdcvStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DdcvStatus::NullPointer, format!("{what} is null"))
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DdcvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DdcvStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            DdcvStatus::Panic
        }
    }
}

unsafe fn map_ref<'a>(p: *const DdcvMap, what: &str) -> Result<&'a ScalarMap, Failure> {
    p.as_ref().map(|m| &m.0).ok_or_else(|| null(what))
}

unsafe fn opt_map<'a>(p: *const DdcvMap) -> Option<&'a ScalarMap> {
    p.as_ref().map(|m| &m.0)
}

unsafe fn image_ref<'a>(p: *const DdcvImage, what: &str) -> Result<&'a ImageBuffer, Failure> {
    p.as_ref().map(|m| &m.0).ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DdcvStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

/// Optional caller-owned gradient buffer of `len` doubles.
unsafe fn grad_arg<'a>(p: *mut f64, len: usize) -> Option<&'a mut [f64]> {
    (!p.is_null()).then(|| std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

impl DdcvConfidenceParams {
    fn to_params(self) -> Result<DdcvParams, Failure> {
        Ok(DdcvParams {
            spec: NeighborhoodSpec::new(self.window, self.dilation)?,
            sigma: self.sigma,
            stable_disparity_threshold: self.stable_disparity_threshold,
            formula_mode: if self.literal_formula != 0 {
                FormulaMode::Literal
            } else {
                FormulaMode::Prose
            },
        })
    }
}

impl DdcvLdrParams {
    fn to_params(self) -> Result<LdrParams, Failure> {
        Ok(LdrParams {
            k: self.k,
            spec: NeighborhoodSpec::new(self.window, self.dilation)?,
        })
    }
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ddcv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ddcv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a map from `width * height` row-major values. `valid` may be null
/// (all valid) or point to `width * height` bytes, non-zero meaning valid.
///
/// # Safety
/// `values` (and `valid` if non-null) must be readable for `width * height`
/// elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_new(
    width: usize,
    height: usize,
    values: *const f64,
    valid: *const u8,
    out: *mut *mut DdcvMap,
) -> DdcvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if values.is_null() {
            return Err(null("values"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Failure(DdcvStatus::InvalidArgument, "map size overflows".into()))?;
        let v = std::slice::from_raw_parts(values, n).to_vec();
        let map = if valid.is_null() {
            ScalarMap::new(width, height, v)?
        } else {
            let m = std::slice::from_raw_parts(valid, n).iter().map(|&b| b != 0).collect();
            ScalarMap::with_mask(width, height, v, m)?
        };
        *out = boxed(DdcvMap(map));
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_free(map: *mut DdcvMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_width(map: *const DdcvMap) -> usize {
    opt_map(map).map_or(0, |m| m.width())
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_height(map: *const DdcvMap) -> usize {
    opt_map(map).map_or(0, |m| m.height())
}

/// Copies values (and optionally the mask as 0/1 bytes) into caller buffers
/// of `len` elements; `len` must equal `width * height`.
///
/// # Safety
/// `values` and `valid` (when non-null) must be writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_read_values(
    map: *const DdcvMap,
    values: *mut f64,
    valid: *mut u8,
    len: usize,
) -> DdcvStatus {
    guard(|| {
        let m = map_ref(map, "map")?;
        if len != m.len() {
            return Err(Error::BufferLength {
                what: "map buffer",
                expected: m.len(),
                actual: len,
            }
            .into());
        }
        if !values.is_null() {
            std::slice::from_raw_parts_mut(values, len).copy_from_slice(m.values());
        }
        if !valid.is_null() {
            let out = std::slice::from_raw_parts_mut(valid, len);
            for (o, &v) in out.iter_mut().zip(m.mask()) {
                *o = u8::from(v);
            }
        }
        Ok(())
    })
}

/// Reads a `.pfm` or 16-bit `.png` disparity map.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_load(path: *const c_char, out: *mut *mut DdcvMap) -> DdcvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let map = imgio::read_map(&path, MapFormat::from_path(&path)?)?;
        *out = boxed(DdcvMap(map));
        Ok(())
    })
}

/// Writes a map; the format follows the extension (`.pfm` or `.png`).
///
/// # Safety
/// `map` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ddcv_map_save(map: *const DdcvMap, path: *const c_char) -> DdcvStatus {
    guard(|| {
        let m = map_ref(map, "map")?;
        let path = path_arg(path)?;
        imgio::write_map(m, &path, MapFormat::from_path(&path)?)?;
        Ok(())
    })
}

/// Creates an image from `width * height * channels` interleaved intensities.
///
/// # Safety
/// `data` must be readable for `width * height * channels` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_image_new(
    width: usize,
    height: usize,
    channels: usize,
    data: *const f64,
    out: *mut *mut DdcvImage,
) -> DdcvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if data.is_null() {
            return Err(null("data"));
        }
        let n = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Failure(DdcvStatus::InvalidArgument, "image size overflows".into()))?;
        let v = std::slice::from_raw_parts(data, n).to_vec();
        *out = boxed(DdcvImage(ImageBuffer::new(width, height, channels, v)?));
        Ok(())
    })
}

/// Reads an 8- or 16-bit PNG/PNM image, normalized to [0, 1].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_image_load(path: *const c_char, out: *mut *mut DdcvImage) -> DdcvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        *out = boxed(DdcvImage(imgio::read_image(&path)?));
        Ok(())
    })
}

/// # Safety
/// `image` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddcv_image_free(image: *mut DdcvImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

#[no_mangle]
pub extern "C" fn ddcv_confidence_params_default() -> DdcvConfidenceParams {
    let d = DdcvParams::default();
    DdcvConfidenceParams {
        window: d.spec.window,
        dilation: d.spec.dilation,
        sigma: d.sigma,
        stable_disparity_threshold: d.stable_disparity_threshold,
        literal_formula: 0,
    }
}

#[no_mangle]
pub extern "C" fn ddcv_ldr_params_default() -> DdcvLdrParams {
    let d = LdrParams::default();
    DdcvLdrParams {
        k: d.k,
        window: d.spec.window,
        dilation: d.spec.dilation,
    }
}

#[no_mangle]
pub extern "C" fn ddcv_loss_weights_default() -> DdcvLossWeights {
    let d = LossWeights::default();
    DdcvLossWeights {
        lambda1: d.lambda1,
        lambda2: d.lambda2,
        lambda3: d.lambda3,
    }
}

/// Per-pixel confidence in [0, 1] of `disparity` against a relative `depth`.
/// `params` may be null for the defaults.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_confidence(
    disparity: *const DdcvMap,
    depth: *const DdcvMap,
    params: *const DdcvConfidenceParams,
    out: *mut *mut DdcvMap,
) -> DdcvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let p = params.as_ref().copied().unwrap_or_else(|| ddcv_confidence_params_default());
        let c = ddcv::confidence_map(map_ref(disparity, "disparity")?, map_ref(depth, "depth")?, &p.to_params()?)?;
        *out = boxed(DdcvMap(c));
        Ok(())
    })
}

/// Global depth-to-disparity variation ratio over `window`/`dilation` pairs.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_global_scale(
    disparity: *const DdcvMap,
    depth: *const DdcvMap,
    window: usize,
    dilation: usize,
    out: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec = NeighborhoodSpec::new(window, dilation)?;
        *out = ddcv::global_scale(map_ref(disparity, "disparity")?, map_ref(depth, "depth")?, &spec)?;
        Ok(())
    })
}

/// Photometric reconstruction loss of `left` against `right` warped by
/// `disparity`. `grad` may be null.
///
/// # Safety
/// Handles must be live; `grad` (if non-null) writable for `grad_len`
/// doubles; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_photometric_loss(
    left: *const DdcvImage,
    right: *const DdcvImage,
    disparity: *const DdcvMap,
    grad: *mut f64,
    grad_len: usize,
    value: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        *value = losses::photometric_loss_into(
            image_ref(left, "left")?,
            image_ref(right, "right")?,
            map_ref(disparity, "disparity")?,
            grad_arg(grad, grad_len),
        )?;
        Ok(())
    })
}

/// Left-right consistency loss.
///
/// # Safety
/// As for [`ddcv_photometric_loss`].
#[no_mangle]
pub unsafe extern "C" fn ddcv_lrc_loss(
    disparity: *const DdcvMap,
    right_disparity: *const DdcvMap,
    grad: *mut f64,
    grad_len: usize,
    value: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        *value = losses::lrc_loss_into(
            map_ref(disparity, "disparity")?,
            map_ref(right_disparity, "right_disparity")?,
            grad_arg(grad, grad_len),
        )?;
        Ok(())
    })
}

/// Local depth-ranking loss with references taken from `confidence`.
/// `params` may be null for the defaults.
///
/// # Safety
/// As for [`ddcv_photometric_loss`].
#[no_mangle]
pub unsafe extern "C" fn ddcv_ldr_loss(
    disparity: *const DdcvMap,
    depth: *const DdcvMap,
    confidence: *const DdcvMap,
    params: *const DdcvLdrParams,
    grad: *mut f64,
    grad_len: usize,
    value: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        let p = params.as_ref().copied().unwrap_or_else(|| ddcv_ldr_params_default());
        let refs = losses::select_references(map_ref(confidence, "confidence")?, &p.to_params()?)?;
        *value = losses::ldr_loss_into(
            map_ref(disparity, "disparity")?,
            map_ref(depth, "depth")?,
            &refs,
            grad_arg(grad, grad_len),
        )?;
        Ok(())
    })
}

/// Image-guided smoothness.
///
/// # Safety
/// As for [`ddcv_photometric_loss`].
#[no_mangle]
pub unsafe extern "C" fn ddcv_smoothness_image_loss(
    disparity: *const DdcvMap,
    image: *const DdcvImage,
    grad: *mut f64,
    grad_len: usize,
    value: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        *value = losses::smoothness_image_into(
            map_ref(disparity, "disparity")?,
            image_ref(image, "image")?,
            grad_arg(grad, grad_len),
        )?;
        Ok(())
    })
}

/// Depth-guided smoothness.
///
/// # Safety
/// As for [`ddcv_photometric_loss`].
#[no_mangle]
pub unsafe extern "C" fn ddcv_smoothness_depth_loss(
    disparity: *const DdcvMap,
    depth: *const DdcvMap,
    grad: *mut f64,
    grad_len: usize,
    value: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        *value = losses::smoothness_depth_into(
            map_ref(disparity, "disparity")?,
            map_ref(depth, "depth")?,
            grad_arg(grad, grad_len),
        )?;
        Ok(())
    })
}

/// Depth-guided smoothness plus the dual term.
///
/// # Safety
/// As for [`ddcv_photometric_loss`].
#[no_mangle]
pub unsafe extern "C" fn ddcv_dds_loss(
    disparity: *const DdcvMap,
    depth: *const DdcvMap,
    grad: *mut f64,
    grad_len: usize,
    value: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        *value = losses::dds_loss_into(
            map_ref(disparity, "disparity")?,
            map_ref(depth, "depth")?,
            grad_arg(grad, grad_len),
        )?;
        Ok(())
    })
}

/// Weighted total of all terms. `right_disparity`, `depth` and `confidence`
/// may be null when the terms that read them have zero weight (confidence
/// falls back to DDCV of disparity and depth). Null parameter pointers select
/// the defaults.
///
/// # Safety
/// As for [`ddcv_photometric_loss`]; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_hybrid_loss(
    left: *const DdcvImage,
    right: *const DdcvImage,
    disparity: *const DdcvMap,
    right_disparity: *const DdcvMap,
    depth: *const DdcvMap,
    confidence: *const DdcvMap,
    weights: *const DdcvLossWeights,
    ldr_params: *const DdcvLdrParams,
    confidence_params: *const DdcvConfidenceParams,
    grad: *mut f64,
    grad_len: usize,
    report: *mut DdcvLossReport,
) -> DdcvStatus {
    guard(|| {
        let report = out_ref(report, "report")?;
        let d = map_ref(disparity, "disparity")?;
        let w = weights.as_ref().copied().unwrap_or_else(|| ddcv_loss_weights_default());
        let lp = ldr_params.as_ref().copied().unwrap_or_else(|| ddcv_ldr_params_default());
        let cp = confidence_params
            .as_ref()
            .copied()
            .unwrap_or_else(|| ddcv_confidence_params_default());
        let inputs = LossInputs {
            left: image_ref(left, "left")?,
            right: image_ref(right, "right")?,
            disparity: d,
            right_disparity: opt_map(right_disparity),
            depth: opt_map(depth),
            confidence: opt_map(confidence),
        };
        let weights = LossWeights {
            lambda1: w.lambda1,
            lambda2: w.lambda2,
            lambda3: w.lambda3,
        };
        let grad = grad_arg(grad, grad_len);
        if let Some(g) = &grad {
            if g.len() != d.len() {
                return Err(Error::BufferLength {
                    what: "gradient",
                    expected: d.len(),
                    actual: g.len(),
                }
                .into());
            }
        }
        let r = ddcv::hybrid_loss(&inputs, &weights, &lp.to_params()?, &cp.to_params()?, grad.is_some())?;
        if let (Some(g), Some(rg)) = (grad, &r.grad) {
            g.copy_from_slice(rg.values());
        }
        *report = DdcvLossReport {
            photometric: r.photometric,
            lrc: r.lrc,
            ldr: r.ldr,
            dds: r.dds,
            total: r.total,
        };
        Ok(())
    })
}

/// Mean absolute disparity error over pixels valid in both maps.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_epe(est: *const DdcvMap, gt: *const DdcvMap, out: *mut f64) -> DdcvStatus {
    guard(|| {
        *out_ref(out, "out")? = eval::epe(map_ref(est, "est")?, map_ref(gt, "gt")?)?;
        Ok(())
    })
}

/// Percentage of pixels with error above `delta` pixels.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_pep(est: *const DdcvMap, gt: *const DdcvMap, delta: f64, out: *mut f64) -> DdcvStatus {
    guard(|| {
        *out_ref(out, "out")? = eval::pep(map_ref(est, "est")?, map_ref(gt, "gt")?, delta)?;
        Ok(())
    })
}

/// Percentage of D1 outliers (error above 3 px and 5 % of the truth).
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_d1(est: *const DdcvMap, gt: *const DdcvMap, out: *mut f64) -> DdcvStatus {
    guard(|| {
        *out_ref(out, "out")? = eval::d1(map_ref(est, "est")?, map_ref(gt, "gt")?)?;
        Ok(())
    })
}

/// Sparsification curve and its area. `steps` of 0 selects the default.
/// `epe` may be null or hold `steps` doubles for the curve values at
/// densities `i / steps`.
///
/// # Safety
/// Handles must be live; `epe` (if non-null) writable for `steps` doubles;
/// `auc` writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_sparsification(
    est: *const DdcvMap,
    gt: *const DdcvMap,
    confidence: *const DdcvMap,
    steps: usize,
    epe: *mut f64,
    auc: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let auc = out_ref(auc, "auc")?;
        let steps = if steps == 0 { DEFAULT_STEPS } else { steps };
        let curve = eval::sparsification(
            map_ref(est, "est")?,
            map_ref(gt, "gt")?,
            map_ref(confidence, "confidence")?,
            steps,
        )?;
        if !epe.is_null() {
            let out = std::slice::from_raw_parts_mut(epe, steps);
            for (o, s) in out.iter_mut().zip(&curve.samples) {
                *o = s.1;
            }
        }
        *auc = curve.auc;
        Ok(())
    })
}

/// Area under the curve obtained from the true errors; a lower bound for
/// [`ddcv_sparsification`]. `steps` of 0 selects the default.
///
/// # Safety
/// Handles must be live; `auc` writable.
#[no_mangle]
pub unsafe extern "C" fn ddcv_optimal_auc(
    est: *const DdcvMap,
    gt: *const DdcvMap,
    steps: usize,
    auc: *mut f64,
) -> DdcvStatus {
    guard(|| {
        let auc = out_ref(auc, "auc")?;
        let steps = if steps == 0 { DEFAULT_STEPS } else { steps };
        *auc = eval::optimal_auc(map_ref(est, "est")?, map_ref(gt, "gt")?, steps)?;
        Ok(())
    })
}
