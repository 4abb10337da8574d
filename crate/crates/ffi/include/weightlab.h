#ifndef WEIGHTLAB_H
#define WEIGHTLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes of every fallible call.
 */
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_ARGUMENT = 2,
  WL_STATUS_PARSE = 3,
  WL_STATUS_NON_CONVERGENT = 4,
  WL_STATUS_DEGENERATE = 5,
  WL_STATUS_PANIC = 6,
  WL_STATUS_INTERNAL = 7,
} WlStatus;

/*
 A Banach function space (Lebesgue or Orlicz).
 */
typedef struct WlSpace WlSpace;

/*
 A weight on R^n.
 */
typedef struct WlWeight WlWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent call on this thread if it failed,
 otherwise null. Valid until the next call into the library on this thread.
 */
const char *wl_last_error_message(void);

/*
 Library version as a static string.
 */
const char *wl_version(void);

/*
 Free a string returned by the library. Null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void wl_string_free(char *s);

/*
 The counterexample weight `w` (`which = 0`) or `σ` (`which = 1`) for exponent `p` in dimension `n`.

 # Safety
 `out` must be a valid pointer to writable storage.
 */
enum WlStatus wl_weight_theorem(double p,
                                size_t n,
                                uint32_t which,
                                struct WlWeight **out);

/*
 `|x|^{-α} (1 + log_+ 1/|x|)^{-β}` with `0 < α < n`.

 # Safety
 `out` must be a valid pointer to writable storage.
 */
enum WlStatus wl_weight_power_log(double alpha, double beta, size_t n, struct WlWeight **out);

/*
 The constant weight `c >= 0`.

 # Safety
 `out` must be a valid pointer to writable storage.
 */
enum WlStatus wl_weight_constant(size_t n, double c, struct WlWeight **out);

/*
 Evaluate a weight at `x[0..len]`; `len` must equal the dimension. Fails at
 the origin for non-constant weights.

 # Safety
 `w` must be a live handle, `x` must point to `len` doubles and `out` to a double.
 */
enum WlStatus wl_weight_eval(const struct WlWeight *w, const double *x, size_t len, double *out);

/*
 Dimension of a weight, 0 for a null handle.

 # Safety
 `w` must be null or a live handle.
 */
size_t wl_weight_dim(const struct WlWeight *w);

/*
 # Safety
 `w` must be null or a handle not yet freed.
 */
void wl_weight_free(struct WlWeight *w);

/*
 Parse a space descriptor such as `lebesgue:r=3` or `orlicz:pprime=3,gamma=2.5`.

 # Safety
 `descriptor` must be a nul-terminated string and `out` a valid pointer.
 */
enum WlStatus wl_space_parse(const char *descriptor, struct WlSpace **out);

/*
 The associate space `X'`.

 # Safety
 `x` must be a live handle and `out` a valid pointer.
 */
enum WlStatus wl_space_associate(const struct WlSpace *x, struct WlSpace **out);

/*
 Canonical descriptor of a space; free with `wl_string_free`. Null on a null handle.

 # Safety
 `x` must be null or a live handle.
 */
char *wl_space_descriptor(const struct WlSpace *x);

/*
 # Safety
 `x` must be null or a handle not yet freed.
 */
void wl_space_free(struct WlSpace *x);

/*
 `‖w^e‖_{X,Q}` on the origin cube of sidelength `side`, restricted to
 `|x|_max >= eps` (`eps = 0` for no truncation). `divergent` is set to 1
 when the norm is infinite as far as the computation can tell.

 # Safety
 Handles must be live; `value` and `divergent` must be valid pointers.
 */
enum WlStatus wl_norm_on_origin_cube(const struct WlSpace *x,
                                     const struct WlWeight *w,
                                     double exponent,
                                     double side,
                                     double eps,
                                     double *value,
                                     uint8_t *divergent);

/*
 `‖χ_{Q(0,1) \ Q(0,a/2)}(y) |y|_max^{-n/p}‖` in the space `xprime`.

 # Safety
 `xprime` must be a live handle and `value` a valid pointer.
 */
enum WlStatus wl_annulus_norm(const struct WlSpace *xprime,
                              double a,
                              double p,
                              size_t n,
                              double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEIGHTLAB_H */
