#ifndef PDM_C_H
#define PDM_C_H

/* C interface to the path-dependent Malliavin benchmark library. All state
 * lives behind the opaque experiment handle; every call returns a status
 * code and leaves a human-readable message in pdm_last_error() on failure.
 * Status values double as CLI exit codes. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdm_status {
  PDM_OK = 0,
  PDM_ERROR_CONFIG = 2,      /* malformed or invalid configuration */
  PDM_ERROR_INFEASIBLE = 3,  /* valid config refused (cost caps etc.) */
  PDM_ERROR_CHECK_FAILED = 4, /* run finished, thresholds not met */
  PDM_ERROR_INVALID = 5,     /* bad handle or argument */
  PDM_ERROR_INTERNAL = 6
} pdm_status;

typedef struct pdm_experiment pdm_experiment;

const char* pdm_version(void);

/* The JSON schema every configuration is validated against. */
const char* pdm_config_schema(void);

/* Message for the most recent failure on this thread. */
const char* pdm_last_error(void);

pdm_status pdm_experiment_create_from_file(const char* path, pdm_experiment** out);
pdm_status pdm_experiment_create_from_json(const char* json_text, pdm_experiment** out);

/* Reject the handle unless its config declares the given experiment kind
 * (CLI subcommands use this to cross-check the config). */
pdm_status pdm_experiment_require_kind(pdm_experiment* exp, const char* kind);

pdm_status pdm_experiment_set_workers(pdm_experiment* exp, int workers);
pdm_status pdm_experiment_set_output_dir(pdm_experiment* exp, const char* dir);
pdm_status pdm_experiment_set_check(pdm_experiment* exp, int enabled);

/* Runs the study and writes CSV outputs plus summary.json. Returns
 * PDM_ERROR_CHECK_FAILED when check mode is on and a threshold fails. */
pdm_status pdm_experiment_run(pdm_experiment* exp);

/* Valid after a run; owned by the handle. */
const char* pdm_experiment_summary_json(const pdm_experiment* exp);
int pdm_experiment_output_count(const pdm_experiment* exp);
const char* pdm_experiment_output_path(const pdm_experiment* exp, int index);

void pdm_experiment_destroy(pdm_experiment** exp);

#ifdef __cplusplus
}
#endif

#endif /* PDM_C_H */
