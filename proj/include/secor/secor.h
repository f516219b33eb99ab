/* secor — semantic exposure correction toolkit, C interface.
 *
 * All entry points go through an opaque context carrying the experiment
 * configuration. Functions return SECOR_OK or an error code; the message for
 * the most recent failure on a context is available via secor_ctx_last_error.
 */
#ifndef SECOR_H
#define SECOR_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum secor_status {
    SECOR_OK = 0,
    SECOR_ERR_IO = 1,
    SECOR_ERR_FORMAT = 2,
    SECOR_ERR_CONTRACT = 3,
    SECOR_ERR_NUMERIC = 4,
    SECOR_ERR_BACKEND = 5,
    SECOR_ERR_INTEGRITY = 6,
    SECOR_ERR_CONFIG = 7,
    SECOR_ERR_USAGE = 8,
    SECOR_ERR_INTERNAL = 9
} secor_status;

typedef struct secor_ctx secor_ctx;

const char* secor_version(void);
const char* secor_status_name(secor_status s);

/* config_json may be NULL (defaults) or a JSON object merged over defaults. */
secor_status secor_ctx_create(const char* config_json, secor_ctx** out);
secor_status secor_ctx_create_from_file(const char* config_path, secor_ctx** out);
void secor_ctx_destroy(secor_ctx* ctx);

const char* secor_ctx_last_error(const secor_ctx* ctx);
/* Human-readable output of the last eval/inspect call on this context. */
const char* secor_ctx_last_output(const secor_ctx* ctx);

/* Override one config key, e.g. ("network.scales", "2") or
 * ("encoder.backend", "\"stub\""). Values are parsed as JSON; bare words are
 * accepted as strings. */
secor_status secor_ctx_set(secor_ctx* ctx, const char* dotted_key, const char* value);

/* Scan a dataset folder (layout: msec | sice | flat) into a manifest JSON. */
secor_status secor_build_manifest(secor_ctx* ctx, const char* root, const char* layout,
                                  const char* split, const char* out_json_path);

/* Fine-tune the three exposure prompts on unpaired folders. steps < 0 and
 * lr <= 0 fall back to the configured values; steps == 0 writes the initial
 * prompts unchanged. curve_csv may be NULL. */
secor_status secor_tune_prompts(secor_ctx* ctx, const char* well_dir, const char* under_dir,
                                const char* over_dir, int steps, double lr,
                                const char* prompts_out, const char* curve_csv);

/* Populate the pseudo-GT cache for every image in input_dir. Idempotent:
 * cached entries are skipped. Counters may be NULL. */
secor_status secor_generate_pgt(secor_ctx* ctx, const char* input_dir, const char* prompts_path,
                                const char* cache_dir, int* out_written, int* out_cached);

/* Train the correction network. The final checkpoint lands at
 * <out_dir>/checkpoint.secor and the step log at <out_dir>/train_log.jsonl.
 * resume_checkpoint and val_manifest may be NULL. */
secor_status secor_train(secor_ctx* ctx, const char* manifest_path, const char* prompts_path,
                         const char* cache_dir, const char* out_dir,
                         const char* resume_checkpoint, const char* val_manifest);

/* Correct every image in input_dir into out_dir (8-bit PNG, same stem). */
secor_status secor_infer(secor_ctx* ctx, const char* checkpoint_path, const char* input_dir,
                         const char* out_dir, int* out_count);

/* PSNR/SSIM against manifest references, grouped by exposure tag. Writes a
 * JSON report when report_json is non-NULL; a printable table is available
 * via secor_ctx_last_output afterwards. */
secor_status secor_evaluate(secor_ctx* ctx, const char* checkpoint_path,
                            const char* manifest_path, const char* report_json);

/* Per-block activation statistics and (when prompts are given) the loss
 * breakdown for one image. Writes activations.json, corrected.png and
 * optionally loss_breakdown.json under out_dir. */
secor_status secor_inspect(secor_ctx* ctx, const char* checkpoint_path, const char* image_path,
                           const char* prompts_path, const char* out_dir);

/* Small primitives exposed for bindings and scripting. */
secor_status secor_gamma_transform_file(secor_ctx* ctx, const char* input, double gamma,
                                        const char* output);
secor_status secor_psnr_file(secor_ctx* ctx, const char* a, const char* b, double* out);
secor_status secor_ssim_file(secor_ctx* ctx, const char* a, const char* b, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SECOR_H */
