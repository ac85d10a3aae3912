#ifndef CROQAM_H
#define CROQAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CroqamStatus {
  CROQAM_STATUS_OK = 0,
  CROQAM_STATUS_NULL_POINTER = 1,
  CROQAM_STATUS_INVALID_ARGUMENT = 2,
  CROQAM_STATUS_LENGTH_MISMATCH = 3,
  CROQAM_STATUS_SINGULAR_MATRIX = 4,
  CROQAM_STATUS_DEEP_FADE = 5,
  CROQAM_STATUS_UNSUPPORTED = 6,
  CROQAM_STATUS_PANIC = 100,
} CroqamStatus;

/**
 * Filter family codes.
 */
typedef enum CroqamFilterFamily {
  CROQAM_FILTER_FAMILY_RC = 0,
  CROQAM_FILTER_FAMILY_RRC = 1,
  CROQAM_FILTER_FAMILY_CRRC = 2,
  CROQAM_FILTER_FAMILY_RECT = 3,
} CroqamFilterFamily;

typedef enum CroqamDetector {
  CROQAM_DETECTOR_ZF = 0,
  CROQAM_DETECTOR_MF = 1,
} CroqamDetector;

typedef enum CroqamModulation {
  CROQAM_MODULATION_QAM = 0,
  CROQAM_MODULATION_OQAM = 1,
  CROQAM_MODULATION_CR_OQAM = 2,
} CroqamModulation;

typedef enum CroqamPhaseMode {
  CROQAM_PHASE_MODE_CONVENTIONAL = 0,
  CROQAM_PHASE_MODE_CR = 1,
} CroqamPhaseMode;

/**
 * The three reference modems (K=64, M=7).
 */
typedef enum CroqamReference {
  CROQAM_REFERENCE_QAM_ZF = 0,
  CROQAM_REFERENCE_OQAM_MF = 1,
  CROQAM_REFERENCE_CR_OQAM_MF = 2,
} CroqamReference;

/**
 * Opaque prototype filter.
 */
typedef struct CroqamFilter CroqamFilter;

/**
 * Opaque GFDM block modem.
 */
typedef struct CroqamModem CroqamModem;

/**
 * Complex sample, layout-compatible with `double _Complex` and `double[2]`.
 */
typedef struct CroqamComplex {
  double re;
  double im;
} CroqamComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *croqam_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *croqam_last_error(void);

/**
 * Static description of a status code.
 */
const char *croqam_status_str(int32_t status);

/**
 * Designs a filter of `family` on a `subcarriers x bins_per_subcarrier`
 * grid. Odd `bins_per_subcarrier` is accepted with an off-grid band edge.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CroqamStatus croqam_filter_design(uint32_t family_code,
                                       double rolloff,
                                       size_t subcarriers,
                                       size_t bins_per_subcarrier,
                                       struct CroqamFilter **out);

/**
 * # Safety
 * `filter` must be null or a handle from [`croqam_filter_design`] not yet freed.
 */
void croqam_filter_free(struct CroqamFilter *filter);

/**
 * Number of bins (and time samples) of the filter; 0 for null.
 *
 * # Safety
 * `filter` must be null or a live handle.
 */
size_t croqam_filter_len(const struct CroqamFilter *filter);

/**
 * Unit-energy impulse response; `len` must equal [`croqam_filter_len`].
 *
 * # Safety
 * `filter` must be a live handle and `out` must hold `len` values.
 */
enum CroqamStatus croqam_filter_time_response(const struct CroqamFilter *filter,
                                              struct CroqamComplex *out,
                                              size_t len);

/**
 * Design frequency response in DFT bin order.
 *
 * # Safety
 * `filter` must be a live handle and `out` must hold `len` values.
 */
enum CroqamStatus croqam_filter_freq_response(const struct CroqamFilter *filter,
                                              struct CroqamComplex *out,
                                              size_t len);

/**
 * Largest orthogonality violation of the filter under `phase_mode_code`.
 *
 * # Safety
 * `filter` must be a live handle and `out` a valid pointer.
 */
enum CroqamStatus croqam_filter_orthogonality(const struct CroqamFilter *filter,
                                              uint32_t phase_mode_code,
                                              double *out);

/**
 * Time-domain ICI response towards the carrier `shift` positions away.
 *
 * # Safety
 * `filter` must be a live handle and `out` must hold `len` values.
 */
enum CroqamStatus croqam_filter_ici(const struct CroqamFilter *filter,
                                    ptrdiff_t shift,
                                    struct CroqamComplex *out,
                                    size_t len);

/**
 * Builds a `K x M` GFDM modem.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CroqamStatus croqam_modem_new(size_t subcarriers,
                                   size_t subsymbols,
                                   uint32_t family_code,
                                   double rolloff,
                                   uint32_t detector_code,
                                   uint32_t modulation_code,
                                   size_t cp_length,
                                   struct CroqamModem **out);

/**
 * Builds one of the reference modems.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CroqamStatus croqam_modem_reference(uint32_t reference_code, struct CroqamModem **out);

/**
 * # Safety
 * `modem` must be null or a live handle.
 */
void croqam_modem_free(struct CroqamModem *modem);

/**
 * Symbols (and samples) per block, `K*M`; 0 for null.
 *
 * # Safety
 * `modem` must be null or a live handle.
 */
size_t croqam_modem_block_len(const struct CroqamModem *modem);

/**
 * Cyclic prefix length the modem was configured with; 0 for null.
 *
 * # Safety
 * `modem` must be null or a live handle.
 */
size_t croqam_modem_cp_len(const struct CroqamModem *modem);

/**
 * Noise enhancement of the modem's detector in dB.
 *
 * # Safety
 * `modem` must be a live handle and `out` a valid pointer.
 */
enum CroqamStatus croqam_modem_xi_db(const struct CroqamModem *modem, double *out);

/**
 * One block of samples (no cyclic prefix) from `len` symbols.
 *
 * # Safety
 * `symbols` and `samples` must each hold `len` values.
 */
enum CroqamStatus croqam_modem_modulate(const struct CroqamModem *modem,
                                        const struct CroqamComplex *symbols,
                                        struct CroqamComplex *samples,
                                        size_t len);

/**
 * Symbol estimates from one equalized block of `len` samples.
 *
 * # Safety
 * `samples` and `symbols` must each hold `len` values.
 */
enum CroqamStatus croqam_modem_detect(const struct CroqamModem *modem,
                                      const struct CroqamComplex *samples,
                                      struct CroqamComplex *symbols,
                                      size_t len);

/**
 * Gray-mapped unit-energy 16-QAM points for indices `0..16`.
 *
 * # Safety
 * `indices` and `symbols` must each hold `len` values.
 */
enum CroqamStatus croqam_qam_map(const uint32_t *indices,
                                 struct CroqamComplex *symbols,
                                 size_t len);

/**
 * Nearest-point 16-QAM decisions.
 *
 * # Safety
 * `symbols` and `indices` must each hold `len` values.
 */
enum CroqamStatus croqam_qam_demap(const struct CroqamComplex *symbols,
                                   uint32_t *indices,
                                   size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROQAM_H */
