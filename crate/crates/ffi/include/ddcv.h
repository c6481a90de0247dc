#ifndef DDCV_H
#define DDCV_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum DdcvStatus {
  DDCV_STATUS_OK = 0,
  DDCV_STATUS_NULL_POINTER = 1,
  DDCV_STATUS_INVALID_ARGUMENT = 2,
  DDCV_STATUS_DIMENSION_MISMATCH = 3,
  DDCV_STATUS_DEGENERATE_DISPARITY = 4,
  DDCV_STATUS_NO_VALID_PIXELS = 5,
  DDCV_STATUS_IO = 6,
  DDCV_STATUS_PANIC = 7,
} DdcvStatus;

/**
 * Interleaved 1- or 3-channel image with intensities in [0, 1].
 */
typedef struct DdcvImage DdcvImage;

/**
 * Scalar map with a validity mask.
 */
typedef struct DdcvMap DdcvMap;

typedef struct DdcvConfidenceParams {
  size_t window;
  size_t dilation;
  double sigma;
  double stable_disparity_threshold;
  /**
   * Non-zero selects the literal vote formula instead of the default.
   */
  uint8_t literal_formula;
} DdcvConfidenceParams;

typedef struct DdcvLdrParams {
  size_t k;
  size_t window;
  size_t dilation;
} DdcvLdrParams;

typedef struct DdcvLossWeights {
  double lambda1;
  double lambda2;
  double lambda3;
} DdcvLossWeights;

typedef struct DdcvLossReport {
  double photometric;
  double lrc;
  double ldr;
  double dds;
  double total;
} DdcvLossReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ddcv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ddcv_version(void);

/**
 * Creates a map from `width * height` row-major values. `valid` may be null
 * (all valid) or point to `width * height` bytes, non-zero meaning valid.
 *
 * # Safety
 * `values` (and `valid` if non-null) must be readable for `width * height`
 * elements; `out` must be writable.
 */
enum DdcvStatus ddcv_map_new(size_t width,
                             size_t height,
                             const double *values,
                             const uint8_t *valid,
                             struct DdcvMap **out);

/**
 * # Safety
 * `map` must be null or a handle from this library not yet freed.
 */
void ddcv_map_free(struct DdcvMap *map);

/**
 * # Safety
 * `map` must be a live handle.
 */
size_t ddcv_map_width(const struct DdcvMap *map);

/**
 * # Safety
 * `map` must be a live handle.
 */
size_t ddcv_map_height(const struct DdcvMap *map);

/**
 * Copies values (and optionally the mask as 0/1 bytes) into caller buffers
 * of `len` elements; `len` must equal `width * height`.
 *
 * # Safety
 * `values` and `valid` (when non-null) must be writable for `len` elements.
 */
enum DdcvStatus ddcv_map_read_values(const struct DdcvMap *map,
                                     double *values,
                                     uint8_t *valid,
                                     size_t len);

/**
 * Reads a `.pfm` or 16-bit `.png` disparity map.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DdcvStatus ddcv_map_load(const char *path, struct DdcvMap **out);

/**
 * Writes a map; the format follows the extension (`.pfm` or `.png`).
 *
 * # Safety
 * `map` must be a live handle and `path` a NUL-terminated string.
 */
enum DdcvStatus ddcv_map_save(const struct DdcvMap *map, const char *path);

/**
 * Creates an image from `width * height * channels` interleaved intensities.
 *
 * # Safety
 * `data` must be readable for `width * height * channels` doubles; `out`
 * must be writable.
 */
enum DdcvStatus ddcv_image_new(size_t width,
                               size_t height,
                               size_t channels,
                               const double *data,
                               struct DdcvImage **out);

/**
 * Reads an 8- or 16-bit PNG/PNM image, normalized to [0, 1].
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DdcvStatus ddcv_image_load(const char *path, struct DdcvImage **out);

/**
 * # Safety
 * `image` must be null or a handle from this library not yet freed.
 */
void ddcv_image_free(struct DdcvImage *image);

struct DdcvConfidenceParams ddcv_confidence_params_default(void);

struct DdcvLdrParams ddcv_ldr_params_default(void);

struct DdcvLossWeights ddcv_loss_weights_default(void);

/**
 * Per-pixel confidence in [0, 1] of `disparity` against a relative `depth`.
 * `params` may be null for the defaults.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum DdcvStatus ddcv_confidence(const struct DdcvMap *disparity,
                                const struct DdcvMap *depth,
                                const struct DdcvConfidenceParams *params,
                                struct DdcvMap **out);

/**
 * Global depth-to-disparity variation ratio over `window`/`dilation` pairs.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum DdcvStatus ddcv_global_scale(const struct DdcvMap *disparity,
                                  const struct DdcvMap *depth,
                                  size_t window,
                                  size_t dilation,
                                  double *out);

/**
 * Photometric reconstruction loss of `left` against `right` warped by
 * `disparity`. `grad` may be null.
 *
 * # Safety
 * Handles must be live; `grad` (if non-null) writable for `grad_len`
 * doubles; `value` writable.
 */
enum DdcvStatus ddcv_photometric_loss(const struct DdcvImage *left,
                                      const struct DdcvImage *right,
                                      const struct DdcvMap *disparity,
                                      double *grad,
                                      size_t grad_len,
                                      double *value);

/**
 * Left-right consistency loss.
 *
 * # Safety
 * As for [`ddcv_photometric_loss`].
 */
enum DdcvStatus ddcv_lrc_loss(const struct DdcvMap *disparity,
                              const struct DdcvMap *right_disparity,
                              double *grad,
                              size_t grad_len,
                              double *value);

/**
 * Local depth-ranking loss with references taken from `confidence`.
 * `params` may be null for the defaults.
 *
 * # Safety
 * As for [`ddcv_photometric_loss`].
 */
enum DdcvStatus ddcv_ldr_loss(const struct DdcvMap *disparity,
                              const struct DdcvMap *depth,
                              const struct DdcvMap *confidence,
                              const struct DdcvLdrParams *params,
                              double *grad,
                              size_t grad_len,
                              double *value);

/**
 * Image-guided smoothness.
 *
 * # Safety
 * As for [`ddcv_photometric_loss`].
 */
enum DdcvStatus ddcv_smoothness_image_loss(const struct DdcvMap *disparity,
                                           const struct DdcvImage *image,
                                           double *grad,
                                           size_t grad_len,
                                           double *value);

/**
 * Depth-guided smoothness.
 *
 * # Safety
 * As for [`ddcv_photometric_loss`].
 */
enum DdcvStatus ddcv_smoothness_depth_loss(const struct DdcvMap *disparity,
                                           const struct DdcvMap *depth,
                                           double *grad,
                                           size_t grad_len,
                                           double *value);

/**
 * Depth-guided smoothness plus the dual term.
 *
 * # Safety
 * As for [`ddcv_photometric_loss`].
 */
enum DdcvStatus ddcv_dds_loss(const struct DdcvMap *disparity,
                              const struct DdcvMap *depth,
                              double *grad,
                              size_t grad_len,
                              double *value);

/**
 * Weighted total of all terms. `right_disparity`, `depth` and `confidence`
 * may be null when the terms that read them have zero weight (confidence
 * falls back to DDCV of disparity and depth). Null parameter pointers select
 * the defaults.
 *
 * # Safety
 * As for [`ddcv_photometric_loss`]; `report` must be writable.
 */
enum DdcvStatus ddcv_hybrid_loss(const struct DdcvImage *left,
                                 const struct DdcvImage *right,
                                 const struct DdcvMap *disparity,
                                 const struct DdcvMap *right_disparity,
                                 const struct DdcvMap *depth,
                                 const struct DdcvMap *confidence,
                                 const struct DdcvLossWeights *weights,
                                 const struct DdcvLdrParams *ldr_params,
                                 const struct DdcvConfidenceParams *confidence_params,
                                 double *grad,
                                 size_t grad_len,
                                 struct DdcvLossReport *report);

/**
 * Mean absolute disparity error over pixels valid in both maps.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum DdcvStatus ddcv_epe(const struct DdcvMap *est, const struct DdcvMap *gt, double *out);

/**
 * Percentage of pixels with error above `delta` pixels.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum DdcvStatus ddcv_pep(const struct DdcvMap *est,
                         const struct DdcvMap *gt,
                         double delta,
                         double *out);

/**
 * Percentage of D1 outliers (error above 3 px and 5 % of the truth).
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum DdcvStatus ddcv_d1(const struct DdcvMap *est, const struct DdcvMap *gt, double *out);

/**
 * Sparsification curve and its area. `steps` of 0 selects the default.
 * `epe` may be null or hold `steps` doubles for the curve values at
 * densities `i / steps`.
 *
 * # Safety
 * Handles must be live; `epe` (if non-null) writable for `steps` doubles;
 * `auc` writable.
 */
enum DdcvStatus ddcv_sparsification(const struct DdcvMap *est,
                                    const struct DdcvMap *gt,
                                    const struct DdcvMap *confidence,
                                    size_t steps,
                                    double *epe,
                                    double *auc);

/**
 * Area under the curve obtained from the true errors; a lower bound for
 * [`ddcv_sparsification`]. `steps` of 0 selects the default.
 *
 * # Safety
 * Handles must be live; `auc` writable.
 */
enum DdcvStatus ddcv_optimal_auc(const struct DdcvMap *est,
                                 const struct DdcvMap *gt,
                                 size_t steps,
                                 double *auc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DDCV_H */
