#ifndef IA_FEASIBILITY_H
#define IA_FEASIBILITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum IafStatus {
  IAF_STATUS_OK = 0,
  IAF_STATUS_NULL_POINTER = 1,
  IAF_STATUS_INVALID_ARGUMENT = 2,
  IAF_STATUS_DIMENSION_MISMATCH = 3,
  IAF_STATUS_NUMERICAL = 4,
  IAF_STATUS_UNSUPPORTED = 5,
  IAF_STATUS_IO = 6,
  IAF_STATUS_PANIC = 7,
} IafStatus;

// Opaque set of receive and transmit beamformers.
typedef struct IafBeams IafBeams;

// Opaque channel instance.
typedef struct IafChannel IafChannel;

typedef struct IafSolverConfig {
  size_t max_iters;
  size_t restarts;
  double tol_leakage;
  double tol_margin;
  uint64_t seed;
} IafSolverConfig;

typedef struct IafReport {
  // 1 when the solution is certified feasible, 0 otherwise.
  int32_t feasible;
  double best_leakage;
  double direct_margin;
  size_t iters_used;
  size_t restart_index;
  double wall_ms;
} IafReport;

typedef struct IafBounds {
  size_t n;
  size_t l;
  size_t t;
  size_t upper_k;
  size_t achievable_k;
  double dof_upper;
  double dof_lower;
} IafBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *iaf_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *iaf_version(void);

struct IafSolverConfig iaf_solver_config_default(void);

// Samples a `k`-user channel of the named family. `params` may be null.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum IafStatus iaf_channel_sample(const char *family,
                                  const char *params,
                                  size_t k,
                                  uint64_t seed,
                                  struct IafChannel **out);

// # Safety
// `channel` must come from [`iaf_channel_sample`] and not be freed twice.
void iaf_channel_free(struct IafChannel *channel);

// Writes the user count and antenna dimensions of a channel.
//
// # Safety
// All pointers must be valid.
enum IafStatus iaf_channel_dims(const struct IafChannel *channel,
                                size_t *k,
                                size_t *nr,
                                size_t *nt);

// Builds a beamformer set from `k` receive vectors of length `nr` and `k`
// transmit vectors of length `nt`, user-major and interleaved.
//
// # Safety
// `u` must hold `2 k nr` doubles and `v` `2 k nt` doubles.
enum IafStatus iaf_beams_new(size_t k,
                             size_t nr,
                             size_t nt,
                             const double *u,
                             const double *v,
                             struct IafBeams **out);

// # Safety
// `beams` must come from this library and not be freed twice.
void iaf_beams_free(struct IafBeams *beams);

// Copies the receive beamformer of `user` into `out` (`2 nr` doubles).
//
// # Safety
// `out` must hold `out_len` doubles.
enum IafStatus iaf_beams_receive(const struct IafBeams *beams,
                                 size_t user,
                                 double *out,
                                 size_t out_len);

// Copies the transmit beamformer of `user` into `out` (`2 nt` doubles).
//
// # Safety
// `out` must hold `out_len` doubles.
enum IafStatus iaf_beams_transmit(const struct IafBeams *beams,
                                  size_t user,
                                  double *out,
                                  size_t out_len);

// Runs the alternating leakage minimization. `config` may be null for the
// defaults; `report` may be null.
//
// # Safety
// Pointers must be valid or null where allowed.
enum IafStatus iaf_solve(const struct IafChannel *channel,
                         const struct IafSolverConfig *config,
                         struct IafBeams **out,
                         struct IafReport *report);

// Builds the slot-orthogonal scheme. `config` may be null.
//
// # Safety
// Pointers must be valid or null where allowed.
enum IafStatus iaf_orthogonal_scheme(const struct IafChannel *channel,
                                     const struct IafSolverConfig *config,
                                     struct IafBeams **out);

// Normalized interference leakage of `beams` on `channel`.
//
// # Safety
// Pointers must be valid.
enum IafStatus iaf_leakage(const struct IafChannel *channel,
                           const struct IafBeams *beams,
                           double *out);

// Writes 1 to `out` when leakage is below `tol_leakage` and every direct
// link exceeds `tol_margin`, 0 otherwise.
//
// # Safety
// Pointers must be valid.
enum IafStatus iaf_verify(const struct IafChannel *channel,
                          const struct IafBeams *beams,
                          double tol_leakage,
                          double tol_margin,
                          int32_t *out);

// Closed-form bounds of the named family. `params` may be null.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum IafStatus iaf_bounds(const char *family, const char *params, struct IafBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IA_FEASIBILITY_H */
