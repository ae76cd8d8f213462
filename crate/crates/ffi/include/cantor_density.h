#ifndef CANTOR_DENSITY_H
#define CANTOR_DENSITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_UTF8 = 2,
  CD_STATUS_PARSE = 3,
  CD_STATUS_DOMAIN = 4,
  CD_STATUS_PRECISION = 5,
  CD_STATUS_PANIC = 6,
} CdStatus;

typedef enum CdVerdict {
  CD_VERDICT_OUT = 0,
  CD_VERDICT_IN = 1,
  CD_VERDICT_UNKNOWN = 2,
} CdVerdict;

/**
 * An opaque set expression.
 */
typedef struct CdExpr CdExpr;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a DSL expression or a named construction (`@empty-interior`, ...).
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum CdStatus cd_expr_parse(const char *text_ptr, struct CdExpr **out);

/**
 * # Safety
 * `h` must come from [`cd_expr_parse`] and not be used afterwards. Null is ignored.
 */
void cd_expr_free(struct CdExpr *h);

/**
 * The canonical text of an expression.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum CdStatus cd_expr_serialize(const struct CdExpr *h, char **out);

/**
 * Measure within `tol` (a rational such as `1/1024`) as JSON `{"lo":"p/q","hi":"p/q"}`.
 *
 * # Safety
 * `h` must be a live handle, `tol` a nul-terminated string and `out` a valid pointer.
 */
enum CdStatus cd_measure(const struct CdExpr *h, const char *tol, char **out);

/**
 * Membership of the lasso `point` (e.g. `01(10)`) decided at `depth`.
 *
 * # Safety
 * `h` must be a live handle, `point` a nul-terminated string and `out` a valid pointer.
 */
enum CdStatus cd_member(const struct CdExpr *h,
                        const char *point,
                        uintptr_t depth,
                        enum CdVerdict *out);

/**
 * The density verdict at `point` as a label such as `ConvergesTo1`.
 *
 * # Safety
 * `h` must be a live handle, `point` a nul-terminated string and `out` a valid pointer.
 */
enum CdStatus cd_density(const struct CdExpr *h, const char *point, uint32_t budget, char **out);

/**
 * The message of the last failed call on this thread, or null. Owned by the library and valid
 * until the next call.
 */
const char *cd_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void cd_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CANTOR_DENSITY_H */
