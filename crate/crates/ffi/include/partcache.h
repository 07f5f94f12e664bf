/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PARTCACHE_H
#define PARTCACHE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcStatus {
  PcStatus_Ok = 0,
  PcStatus_NullPointer = 1,
  PcStatus_InvalidArgument = 2,
  PcStatus_ConstraintViolation = 3,
  PcStatus_BudgetExceeded = 4,
  PcStatus_NumericalFailure = 5,
  PcStatus_Panic = 6,
} PcStatus;

typedef enum PcDesign {
  PcDesign_Rlnc = 0,
  PcDesign_Uc = 1,
} PcDesign;

typedef enum PcMethod {
  PcMethod_Greedy = 0,
  PcMethod_Exhaustive = 1,
  PcMethod_AsymptoticSmall = 2,
  PcMethod_AsymptoticLarge = 3,
} PcMethod;

/**
 * Designs the simulator accepts.
 */
typedef enum PcSimDesign {
  PcSimDesign_Rlnc = 0,
  PcSimDesign_Uc = 1,
  PcSimDesign_Baseline1 = 2,
  PcSimDesign_Baseline2 = 3,
  PcSimDesign_Baseline3 = 4,
} PcSimDesign;

/**
 * Network and cache parameters plus the Zipf exponent.
 */
typedef struct PcConfig PcConfig;

/**
 * File request probabilities.
 */
typedef struct PcPopularity PcPopularity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *pc_last_error_message(void);

const char *pc_version(void);

/**
 * # Safety
 * `out_config` must be a valid pointer to a `PcConfig*`.
 */
enum PcStatus pc_config_new(uint32_t n_files,
                            uint32_t cache_size,
                            uint32_t sic_capability,
                            double path_loss_exp,
                            double bandwidth_hz,
                            double slot_duration_s,
                            double file_size_bits,
                            double bs_density,
                            double zipf_gamma,
                            struct PcConfig **out_config);

/**
 * Parses configuration text in the `key = value` file format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_config` a valid pointer.
 */
enum PcStatus pc_config_parse(const char *text, struct PcConfig **out_config);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards.
 */
void pc_config_free(struct PcConfig *config);

/**
 * # Safety
 * `config` must be a live handle.
 */
uint32_t pc_config_n_files(const struct PcConfig *config);

/**
 * # Safety
 * `probs` must point to `len` doubles; `out_popularity` must be valid.
 */
enum PcStatus pc_popularity_new(const double *probs,
                                size_t len,
                                struct PcPopularity **out_popularity);

/**
 * Zipf popularity from the configuration's file count and exponent.
 *
 * # Safety
 * `config` must be a live handle and `out_popularity` valid.
 */
enum PcStatus pc_config_popularity(const struct PcConfig *config,
                                   struct PcPopularity **out_popularity);

/**
 * # Safety
 * `popularity` must come from this library and not be used afterwards.
 */
void pc_popularity_free(struct PcPopularity *popularity);

/**
 * `int_z^1 u^(x-1) (1-u)^(y-1) du`.
 *
 * # Safety
 * `out_value` must be valid.
 */
enum PcStatus pc_beta_complement(double x, double y, double z, double *out_value);

/**
 * Probability that the `i`-th draw first completes a set of `code` coupons.
 */
double pc_coupon_pmf(uint32_t code, uint32_t i);

/**
 * Closed-form success probability of a coded allocation. `out_per_file`
 * may be null; otherwise it receives `len` values.
 *
 * # Safety
 * Handles must be live, `codes` must hold `len` entries.
 */
enum PcStatus pc_stp_rlnc(const struct PcConfig *config,
                          const struct PcPopularity *popularity,
                          const uint32_t *codes,
                          size_t len,
                          double *out_per_file,
                          double *out_total);

/**
 * As [`pc_stp_rlnc`] for the uncoded design with serve counts.
 *
 * # Safety
 * Handles must be live, `codes` and `serve_counts` must hold `len` entries.
 */
enum PcStatus pc_stp_uc(const struct PcConfig *config,
                        const struct PcPopularity *popularity,
                        const uint32_t *codes,
                        const uint32_t *serve_counts,
                        size_t len,
                        double *out_per_file,
                        double *out_total);

/**
 * Chooses an allocation. `out_codes` receives N codes; `out_serve_counts`
 * (may be null) receives N serve counts for the uncoded design.
 * `budget` 0 means the default exhaustive budget.
 *
 * # Safety
 * Handles must be live; output arrays must hold N entries.
 */
enum PcStatus pc_optimize(const struct PcConfig *config,
                          const struct PcPopularity *popularity,
                          enum PcDesign design,
                          enum PcMethod method,
                          uint64_t budget,
                          uint32_t *out_codes,
                          uint32_t *out_serve_counts,
                          double *out_objective);

/**
 * Monte Carlo estimate: mean and 95% half-width. `codes` is ignored (may be
 * null) for baselines; `serve_counts` is only read for the uncoded design.
 *
 * # Safety
 * Handles must be live; arrays must hold `len` entries when read.
 */
enum PcStatus pc_simulate(const struct PcConfig *config,
                          const struct PcPopularity *popularity,
                          enum PcSimDesign design,
                          const uint32_t *codes,
                          const uint32_t *serve_counts,
                          size_t len,
                          uint64_t trials,
                          uint64_t seed,
                          double *out_mean,
                          double *out_ci_half_width);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARTCACHE_H */
