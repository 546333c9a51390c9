#ifndef SACBOUND_H
#define SACBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by every function.
 */
typedef enum SacStatus {
  SAC_STATUS_OK = 0,
  SAC_STATUS_NULL_POINTER = 1,
  SAC_STATUS_INVALID_UTF8 = 2,
  SAC_STATUS_INVALID_CONFIG = 3,
  SAC_STATUS_INVALID_ARGUMENT = 4,
  /*
   The simulation already reached its final index.
   */
  SAC_STATUS_FINISHED = 5,
  /*
   No index has completed yet.
   */
  SAC_STATUS_NOT_READY = 6,
  /*
   A numerical invariant failed (support, ordering, negative radicand).
   */
  SAC_STATUS_NUMERICAL = 7,
  SAC_STATUS_IO = 8,
  SAC_STATUS_PANIC = 9,
} SacStatus;

/*
 Opaque simulation handle.
 */
typedef struct SacSimulation SacSimulation;

/*
 Bound quantities at one index, as in a CSV row.
 */
typedef struct SacRow {
  size_t m;
  double t;
  double e1;
  double e2;
  double e3;
  double e4;
  double e5;
  double km;
  double im;
  double bound;
  double u_l2;
} SacRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len - 1` bytes) and returns the full message length.
 Passing a null `buf` only queries the length.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t sac_last_error_message(char *buf, size_t len);

/*
 Creates a simulation from TOML config text. Relative table paths in the
 config resolve against `base_dir`, or the working directory if it is
 null. On success `*out` owns a handle to free with `sac_simulation_free`.

 # Safety
 `config_toml` must be a NUL-terminated string, `base_dir` null or a
 NUL-terminated string, and `out` a valid pointer.
 */
enum SacStatus sac_simulation_new(const char *config_toml,
                                  const char *base_dir,
                                  struct SacSimulation **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `sim` must be null or a handle from `sac_simulation_new` not yet freed.
 */
void sac_simulation_free(struct SacSimulation *sim);

/*
 Takes one step. When it completes an index `m ≥ 1`, writes its row to
 `*row` and sets `*has_row`; the first step only completes index 0.

 # Safety
 `sim` must be a live handle; `row` and `has_row` valid pointers.
 */
enum SacStatus sac_simulation_advance(struct SacSimulation *sim, struct SacRow *row, bool *has_row);

/*
 Advances to the final index and writes its row.

 # Safety
 `sim` must be a live handle; `row` a valid pointer.
 */
enum SacStatus sac_simulation_run_to_end(struct SacSimulation *sim, struct SacRow *row);

/*
 Row of the last completed index.

 # Safety
 `sim` must be a live handle; `row` a valid pointer.
 */
enum SacStatus sac_simulation_breakdown(const struct SacSimulation *sim, struct SacRow *row);

/*
 Index `M` of the final time.

 # Safety
 `sim` must be a live handle; `out` a valid pointer.
 */
enum SacStatus sac_simulation_final_index(const struct SacSimulation *sim, size_t *out);

/*
 `q0 + 2K⁴ + 6K²√I`.

 # Safety
 `out` must be a valid pointer.
 */
enum SacStatus sac_error_bound(double q0, double km, double im, double *out);

/*
 `L^p` norm on `[0, π]` of the sine series with `n` coefficients,
 `p ∈ {2, 4, 12}`.

 # Safety
 `coeffs` must point to `n` readable doubles (may be null when `n = 0`);
 `out` must be a valid pointer.
 */
enum SacStatus sac_lp_norm(const double *coeffs, size_t n, uint32_t p, double *out);

/*
 `∫₀¹ e^{-λs} s^j ds` for `λ ≥ 0`, `j ≤ 3`.

 # Safety
 `out` must be a valid pointer.
 */
enum SacStatus sac_phi_int(double lambda, uint32_t j, double *out);

/*
 Library version as a static NUL-terminated string.
 */
const char *sac_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SACBOUND_H */
