#ifndef BLASCHKE_H
#define BLASCHKE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlaschkeStatus {
  BLASCHKE_STATUS_OK = 0,
  BLASCHKE_STATUS_INVALID_INPUT = 1,
  BLASCHKE_STATUS_NUMERICAL = 2,
  BLASCHKE_STATUS_DECLINED = 3,
  BLASCHKE_STATUS_NULL_POINTER = 4,
  BLASCHKE_STATUS_OUT_OF_RANGE = 5,
  BLASCHKE_STATUS_PANIC = 6,
} BlaschkeStatus;

/**
 * Opaque list of verified factorizations.
 */
typedef struct BlaschkeFactorizations BlaschkeFactorizations;

/**
 * Opaque product handle.
 */
typedef struct BlaschkeProductHandle BlaschkeProductHandle;

/**
 * Tunables exposed to C. Start from [`blaschke_options_default`].
 */
typedef struct BlaschkeOptions {
  /**
   * Sup-norm residual a factorization must meet.
   */
  double residual;
  /**
   * Angles per verification radius.
   */
  size_t grid;
  uint64_t seed;
} BlaschkeOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct BlaschkeOptions blaschke_options_default(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *blaschke_last_error(void);

/**
 * Builds a product from `lambda` and `degree` zeros given as interleaved
 * `re, im` pairs.
 *
 * # Safety
 * `zeros` must point to `2 * degree` doubles and `out` must be writable.
 */
enum BlaschkeStatus blaschke_product_new(double lambda_re,
                                         double lambda_im,
                                         const double *zeros,
                                         size_t degree,
                                         struct BlaschkeProductHandle **out);

/**
 * Parses `{"lambda": [re, im], "zeros": [[re, im], ...]}`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
enum BlaschkeStatus blaschke_product_from_json(const char *text,
                                               struct BlaschkeProductHandle **out);

/**
 * Seeded random product with zeros uniform in the disk of radius `radius`.
 *
 * # Safety
 * `out` must be writable.
 */
enum BlaschkeStatus blaschke_product_random(size_t degree,
                                            uint64_t seed,
                                            double radius,
                                            struct BlaschkeProductHandle **out);

/**
 * # Safety
 * `product` must come from this library and not be freed twice. NULL is ignored.
 */
void blaschke_product_free(struct BlaschkeProductHandle *product);

/**
 * Degree of the product, 0 for NULL.
 *
 * # Safety
 * `product` must be NULL or a live handle.
 */
size_t blaschke_product_degree(const struct BlaschkeProductHandle *product);

/**
 * Copies `lambda` into `lambda_out[0..2]` and the zeros into `zeros_out`,
 * which must hold `2 * degree` doubles.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum BlaschkeStatus blaschke_product_data(const struct BlaschkeProductHandle *product,
                                          double *lambda_out,
                                          double *zeros_out);

/**
 * Value at a point of the open disk.
 *
 * # Safety
 * `product` must be a live handle; `out_re` and `out_im` writable.
 */
enum BlaschkeStatus blaschke_product_eval(const struct BlaschkeProductHandle *product,
                                          double re,
                                          double im,
                                          double *out_re,
                                          double *out_im);

/**
 * JSON text of the product; release with [`blaschke_string_free`].
 *
 * # Safety
 * `product` must be a live handle and `out` writable.
 */
enum BlaschkeStatus blaschke_product_to_json(const struct BlaschkeProductHandle *product,
                                             char **out);

/**
 * `outer ∘ inner`.
 *
 * # Safety
 * Handles must be live; `opts` may be NULL for defaults; `out` writable.
 */
enum BlaschkeStatus blaschke_compose(const struct BlaschkeProductHandle *outer,
                                     const struct BlaschkeProductHandle *inner,
                                     const struct BlaschkeOptions *opts,
                                     struct BlaschkeProductHandle **out);

/**
 * Every inequivalent verified factorization. An empty list is success.
 *
 * # Safety
 * `product` must be live; `opts` may be NULL; `out` writable.
 */
enum BlaschkeStatus blaschke_factorize(const struct BlaschkeProductHandle *product,
                                       const struct BlaschkeOptions *opts,
                                       struct BlaschkeFactorizations **out);

/**
 * # Safety
 * `list` must be NULL or a live handle.
 */
size_t blaschke_factorizations_count(const struct BlaschkeFactorizations *list);

/**
 * Copies of the outer and inner factors of entry `index`, and its residual.
 * Either output handle pointer may be NULL to skip it.
 *
 * # Safety
 * `list` must be live; non-NULL outputs must be writable.
 */
enum BlaschkeStatus blaschke_factorization_get(const struct BlaschkeFactorizations *list,
                                               size_t index,
                                               struct BlaschkeProductHandle **outer,
                                               struct BlaschkeProductHandle **inner,
                                               double *residual);

/**
 * # Safety
 * `list` must come from [`blaschke_factorize`] and not be freed twice. NULL is ignored.
 */
void blaschke_factorizations_free(struct BlaschkeFactorizations *list);

/**
 * Full analysis report as JSON; release with [`blaschke_string_free`].
 *
 * # Safety
 * `product` must be live; `opts` may be NULL; `out` writable.
 */
enum BlaschkeStatus blaschke_analyze_json(const struct BlaschkeProductHandle *product,
                                          const struct BlaschkeOptions *opts,
                                          bool pretty,
                                          char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. NULL is ignored.
 */
void blaschke_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLASCHKE_H */
