#ifndef NAVIC_GNSSR_H
#define NAVIC_GNSSR_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NavicStatus {
  NAVIC_STATUS_OK = 0,
  NAVIC_STATUS_NULL_POINTER = 1,
  NAVIC_STATUS_INVALID_ARGUMENT = 2,
  NAVIC_STATUS_UNKNOWN_PRN = 3,
  NAVIC_STATUS_LENGTH_MISMATCH = 4,
  NAVIC_STATUS_RATE_MISMATCH = 5,
  NAVIC_STATUS_BUFFER_TOO_SMALL = 6,
  NAVIC_STATUS_IO = 7,
  NAVIC_STATUS_FORMAT = 8,
  NAVIC_STATUS_PANIC = 9,
} NavicStatus;

/**
 * Opaque delay-Doppler map.
 */
typedef struct NavicDdm NavicDdm;

/**
 * Opaque complex sample buffer.
 */
typedef struct NavicIq NavicIq;

/**
 * Scenario parameters; see [`navic_scenario_default`].
 */
typedef struct NavicScenario {
  uint32_t prn_id;
  double a_d;
  double a_gr;
  uint64_t k_d;
  uint64_t k_gr;
  double f_d;
  double f_gr;
  /**
   * Per-sample SNR in dB; infinity disables noise.
   */
  double snr_db;
  uint64_t seed;
  double sample_rate_hz;
  uint64_t n_ms;
} NavicScenario;

typedef struct NavicAcquisition {
  uint32_t prn_id;
  uint64_t peak_delay_samples;
  double peak_doppler_hz;
  double peak_magnitude;
  double peak_to_floor_db;
  bool detected;
} NavicAcquisition;

typedef struct NavicPairResult {
  struct NavicAcquisition ds;
  struct NavicAcquisition grs;
  uint64_t delay_offset_samples;
  double range_offset_m;
  /**
   * Both channels cleared the threshold.
   */
  bool detected;
} NavicPairResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t navic_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be null or point to writable memory for one scenario.
 */
enum NavicStatus navic_scenario_default(struct NavicScenario *out);

/**
 * Synthesize the DS and GRS captures of a scenario with the built-in code
 * table.
 *
 * # Safety
 * `scenario` must be null or valid; `ds` and `grs` must be null or
 * writable.
 */
enum NavicStatus navic_scene_synthesize(const struct NavicScenario *scenario,
                                        struct NavicIq **ds,
                                        struct NavicIq **grs);

/**
 * Build a buffer from `len` interleaved I/Q pairs (`2 * len` doubles).
 *
 * # Safety
 * `interleaved` must be valid for `2 * len` doubles; `out` writable.
 */
enum NavicStatus navic_iq_new(const double *interleaved,
                              size_t len,
                              double sample_rate_hz,
                              int64_t start_index,
                              struct NavicIq **out);

/**
 * # Safety
 * `iq` must be null or a live handle.
 */
enum NavicStatus navic_iq_len(const struct NavicIq *iq, size_t *len);

/**
 * # Safety
 * `iq` must be null or a live handle.
 */
enum NavicStatus navic_iq_sample_rate(const struct NavicIq *iq, double *rate_hz);

/**
 * Copy the samples as interleaved I/Q; `cap` counts doubles and must be at
 * least `2 * len`.
 *
 * # Safety
 * `iq` must be a live handle and `out` valid for `cap` doubles.
 */
enum NavicStatus navic_iq_copy(const struct NavicIq *iq, double *out, size_t cap);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` writable.
 */
enum NavicStatus navic_iq_read(const char *path, struct NavicIq **out);

/**
 * # Safety
 * `iq` must be a live handle and `path` a NUL-terminated string.
 */
enum NavicStatus navic_iq_write(const struct NavicIq *iq, const char *path);

/**
 * # Safety
 * `iq` must be null or a handle not yet freed.
 */
void navic_iq_free(struct NavicIq *iq);

/**
 * Write the 1023 ±1 chips of a built-in PRN into `out`.
 *
 * # Safety
 * `out` must be valid for `cap` bytes.
 */
enum NavicStatus navic_prn_chips(uint32_t prn_id, int8_t *out, size_t cap);

/**
 * DDM of a 1 ms capture against a built-in PRN over ±10 kHz at 500 Hz.
 *
 * # Safety
 * `iq` must be a live handle; `out` writable.
 */
enum NavicStatus navic_ddm_generate(const struct NavicIq *iq,
                                    uint32_t prn_id,
                                    struct NavicDdm **out);

/**
 * # Safety
 * `ddm` must be a live handle; the outputs writable.
 */
enum NavicStatus navic_ddm_dims(const struct NavicDdm *ddm, size_t *n_doppler, size_t *n_delay);

/**
 * Copy magnitudes, row-major by Doppler bin.
 *
 * # Safety
 * `ddm` must be a live handle and `out` valid for `cap` doubles.
 */
enum NavicStatus navic_ddm_copy(const struct NavicDdm *ddm, double *out, size_t cap);

/**
 * # Safety
 * `ddm` must be a live handle and `out` valid for `cap` doubles.
 */
enum NavicStatus navic_ddm_doppler_axis(const struct NavicDdm *ddm, double *out, size_t cap);

/**
 * # Safety
 * `ddm` must be null or a handle not yet freed.
 */
void navic_ddm_free(struct NavicDdm *ddm);

/**
 * Identify the satellite on `ds` over the built-in codes, acquire `grs`
 * with it and estimate the range offset. A NaN threshold selects the
 * default of 13 dB.
 *
 * # Safety
 * `ds` and `grs` must be live handles; `out` writable.
 */
enum NavicStatus navic_acquire_pair(const struct NavicIq *ds,
                                    const struct NavicIq *grs,
                                    double threshold_db,
                                    struct NavicPairResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAVIC_GNSSR_H */
