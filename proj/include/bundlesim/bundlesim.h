/* C interface to the bundlesim library. Every call returns a status code;
 * the message of the last failure on the calling thread is available from
 * bsim_last_error(). Strings returned by getters stay valid until the
 * owning handle is freed. */
#ifndef BUNDLESIM_H
#define BUNDLESIM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define BSIM_API __attribute__((visibility("default")))
#else
#define BSIM_API
#endif

typedef enum bsim_status {
  BSIM_OK = 0,
  BSIM_INVALID_ARGUMENT = 1,
  BSIM_IO = 2,
  BSIM_NUMERICAL_FAILURE = 3,
  BSIM_UNDEFINED_CORRELATION = 4,
  BSIM_INCOMPLETE_RECORD = 5,
  BSIM_VALIDATION_FAILED = 6,
  BSIM_INTERNAL = 7
} bsim_status_t;

typedef struct bsim_config bsim_config_t;
typedef struct bsim_result bsim_result_t;

BSIM_API const char* bsim_version(void);
BSIM_API const char* bsim_last_error(void);
BSIM_API const char* bsim_status_name(bsim_status_t status);

BSIM_API bsim_status_t bsim_config_new(bsim_config_t** out);
BSIM_API void bsim_config_free(bsim_config_t* config);
BSIM_API bsim_status_t bsim_config_load_file(bsim_config_t* config, const char* path);
BSIM_API bsim_status_t bsim_config_set(bsim_config_t* config, const char* key, const char* value);
/* Newline-separated list of recognised keys. */
BSIM_API const char* bsim_config_keys(void);

/* Subcommands. On success *out holds a result to release with
 * bsim_result_free. A validation run whose suites fail still produces a
 * result and returns BSIM_VALIDATION_FAILED. */
BSIM_API bsim_status_t bsim_run_steady(const bsim_config_t* config, bsim_result_t** out);
BSIM_API bsim_status_t bsim_run_sweep(const bsim_config_t* config, bsim_result_t** out);
BSIM_API bsim_status_t bsim_run_gtau(const bsim_config_t* config, bsim_result_t** out);
BSIM_API bsim_status_t bsim_run_resonance(const bsim_config_t* config, bsim_result_t** out);
BSIM_API bsim_status_t bsim_run_validate(const bsim_config_t* config, bsim_result_t** out);
BSIM_API bsim_status_t bsim_run_fullmodel(const bsim_config_t* config, bsim_result_t** out);

BSIM_API void bsim_result_free(bsim_result_t* result);
/* Text for standard output. */
BSIM_API const char* bsim_result_text(const bsim_result_t* result);
BSIM_API size_t bsim_result_warning_count(const bsim_result_t* result);
BSIM_API const char* bsim_result_warning(const bsim_result_t* result, size_t index);
BSIM_API int bsim_result_passed(const bsim_result_t* result);

/* Observable of the point record ("n_s", "g2_0", "g3_0", "g4_0",
 * "residual", "min_eigenvalue", "cutoff"). BSIM_UNDEFINED_CORRELATION for
 * an undefined correlation, BSIM_INVALID_ARGUMENT for an unknown name or a
 * result without a record. */
BSIM_API bsim_status_t bsim_result_value(const bsim_result_t* result, const char* name,
                                         double* value);

#ifdef __cplusplus
}
#endif

#endif /* BUNDLESIM_H */
