/* archscale — architecture-aware scaling laws for transformer LMs.
 *
 * C API of the shared library. All functions return ARCHSCALE_OK on
 * success; on failure they return a status code and leave a message
 * retrievable through archscale_last_error() (thread-local, valid until
 * the next failing call on the same thread). Out-parameters are written
 * only on success.
 *
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with archscale_string_free(); handles with their
 * matching *_free() function. Handles are immutable after creation and
 * may be shared across threads.
 */
#ifndef ARCHSCALE_H
#define ARCHSCALE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ARCHSCALE_API __declspec(dllexport)
#else
#define ARCHSCALE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum archscale_status {
    ARCHSCALE_OK = 0,
    ARCHSCALE_ERROR_INTERNAL = 1,
    ARCHSCALE_ERROR_VALIDATION = 2, /* bad inputs, schema or invariant violations */
    ARCHSCALE_ERROR_NUMERIC = 3     /* failed fits, undefined metrics */
} archscale_status;

ARCHSCALE_API const char* archscale_version(void);
ARCHSCALE_API const char* archscale_last_error(void);
ARCHSCALE_API void archscale_string_free(char* s);
ARCHSCALE_API void archscale_int64_array_free(int64_t* values);

/* ---------- architectures ---------- */

typedef struct archscale_arch archscale_arch;

/* JSON object {"name","n_layers","d_model","n_head","d_head","gqa","f_size"};
 * unknown keys rejected, "name" optional. Invariant violations do not fail
 * construction; query them with archscale_arch_violations. */
ARCHSCALE_API archscale_status archscale_arch_from_json(const char* json, archscale_arch** out);
ARCHSCALE_API archscale_status archscale_arch_create(const char* name, int64_t n_layers,
                                                     int64_t d_model, int64_t n_head,
                                                     int64_t d_head, int64_t gqa, int64_t f_size,
                                                     archscale_arch** out);
ARCHSCALE_API void archscale_arch_free(archscale_arch* arch);
ARCHSCALE_API archscale_status archscale_arch_to_json(const archscale_arch* arch, char** json_out);
/* JSON array of violation strings; empty array means the config is valid. */
ARCHSCALE_API archscale_status archscale_arch_violations(const archscale_arch* arch,
                                                         char** json_out);
ARCHSCALE_API archscale_status archscale_arch_params(const archscale_arch* arch,
                                                     int64_t* attn_per_layer,
                                                     int64_t* mlp_per_layer,
                                                     int64_t* per_layer_total,
                                                     int64_t* n_nonembed);
ARCHSCALE_API archscale_status archscale_arch_metrics(const archscale_arch* arch, double* x,
                                                      double* r, int64_t* d_q, int64_t* d_kv,
                                                      int64_t* n_kv_heads);

/* f_multiple <= 0 defaults to 64. */
ARCHSCALE_API archscale_status archscale_solve_intermediate_size(int64_t n_target,
                                                                 int64_t n_layers,
                                                                 int64_t d_model, int64_t n_head,
                                                                 int64_t d_head, int64_t gqa,
                                                                 int64_t f_multiple,
                                                                 int64_t* f_size_out);
ARCHSCALE_API archscale_status archscale_solve_n_head(double r_target, int64_t d_head,
                                                      int64_t gqa, int64_t f_size,
                                                      int64_t* n_head_out);
/* Ascending divisors of n_head; free with archscale_int64_array_free. */
ARCHSCALE_API archscale_status archscale_feasible_gqa(int64_t n_head, int64_t** values_out,
                                                      size_t* count_out);
/* Grid spec JSON -> candidate CSV (name,n_layers,d_model,n_head,d_head,gqa,
 * f_size,n_nonembed,x,r). */
ARCHSCALE_API archscale_status archscale_enumerate_variants(const char* grid_spec_json,
                                                            char** csv_out);

/* ---------- cost model ---------- */

typedef struct archscale_hardware archscale_hardware;

ARCHSCALE_API archscale_status archscale_hardware_from_json(const char* json,
                                                            archscale_hardware** out);
/* Bundled profile: 312e12 FLOP/s, 1.555e12 B/s, 40e9 B, 2-byte weights/KV. */
ARCHSCALE_API archscale_status archscale_hardware_a100_40g(archscale_hardware** out);
ARCHSCALE_API void archscale_hardware_free(archscale_hardware* hw);
ARCHSCALE_API archscale_status archscale_hardware_to_json(const archscale_hardware* hw,
                                                          char** json_out);

ARCHSCALE_API archscale_status archscale_training_flops(double n_nonembed, double d_tokens,
                                                        double* flops_out);
ARCHSCALE_API archscale_status archscale_decode_flops_per_token(const archscale_arch* arch,
                                                                int64_t t_context, double* out);
ARCHSCALE_API archscale_status archscale_kv_cache_bytes(const archscale_arch* arch,
                                                        int64_t t_context, int64_t batch,
                                                        int64_t bytes_per_kv, double* out);
ARCHSCALE_API archscale_status archscale_max_feasible_batch(const archscale_arch* arch,
                                                            const archscale_hardware* hw,
                                                            int64_t t_max, int64_t* out);

typedef struct archscale_cost_report {
    double prefill_seconds;
    double decode_seconds;
    double tokens_per_second;
    double flops_per_decode_token; /* at the final context t_in + t_out */
    double kv_bytes_per_sequence;  /* one sequence at the final context */
    double compute_bound_fraction; /* share of decode steps limited by FLOPs */
} archscale_cost_report;

ARCHSCALE_API archscale_status archscale_estimate_throughput(const archscale_arch* arch,
                                                             const archscale_hardware* hw,
                                                             int64_t batch, int64_t t_in,
                                                             int64_t t_out,
                                                             archscale_cost_report* out);

/* ---------- scaling laws ---------- */

typedef struct archscale_law archscale_law;

ARCHSCALE_API archscale_status archscale_law_from_json(const char* json, archscale_law** out);
/* "task3" (multiplicative fit on the 80M-297M families) or "1b-only". */
ARCHSCALE_API archscale_status archscale_law_builtin(const char* name, archscale_law** out);
ARCHSCALE_API archscale_status archscale_law_load(const char* path, archscale_law** out);
ARCHSCALE_API archscale_status archscale_law_save(const archscale_law* law, const char* path);
ARCHSCALE_API archscale_status archscale_law_to_json(const archscale_law* law, char** json_out);
ARCHSCALE_API void archscale_law_free(archscale_law* law);

ARCHSCALE_API archscale_status archscale_conditional_loss(const archscale_law* law, double x,
                                                          double r, double l_opt, double* out);
/* Separable forms set x_star/r_star and leave xr_star NaN; the joint form
 * sets only xr_star. */
ARCHSCALE_API archscale_status archscale_optimal_xr(const archscale_law* law, double* x_star,
                                                    double* r_star, double* xr_star);
/* Same predictions (relative 1e-9) at every probe pair (xs[i], rs[i]). */
ARCHSCALE_API archscale_status archscale_laws_equivalent(const archscale_law* a,
                                                         const archscale_law* b,
                                                         const double* xs, const double* rs,
                                                         size_t n_probes, int* equal_out);
ARCHSCALE_API archscale_status archscale_chinchilla_loss(double e, double a, double alpha,
                                                         double b, double beta, double n,
                                                         double d, double* out);

/* ---------- reference losses ---------- */

typedef struct archscale_ref archscale_ref;

ARCHSCALE_API archscale_status archscale_ref_chinchilla(double e, double a, double alpha,
                                                        double b, double beta,
                                                        archscale_ref** out);
/* JSON {"E","A","alpha","B","beta"}. */
ARCHSCALE_API archscale_status archscale_ref_chinchilla_from_json(const char* json,
                                                                  archscale_ref** out);
ARCHSCALE_API void archscale_ref_free(archscale_ref* ref);
ARCHSCALE_API archscale_status archscale_ref_loss(const archscale_ref* ref, double n_nonembed,
                                                  int64_t d_tokens, double* out);

/* ---------- run records ---------- */

typedef struct archscale_runs archscale_runs;

/* format: "csv" or "json"; see README for the schemas. */
ARCHSCALE_API archscale_status archscale_runs_load(const char* path, const char* format,
                                                   archscale_runs** out);
ARCHSCALE_API archscale_status archscale_runs_from_csv(const char* csv_text,
                                                       archscale_runs** out);
ARCHSCALE_API size_t archscale_runs_count(const archscale_runs* runs);
ARCHSCALE_API void archscale_runs_free(archscale_runs* runs);
/* {"records","duplicates","warnings"} */
ARCHSCALE_API archscale_status archscale_runs_summary_json(const archscale_runs* runs,
                                                           char** json_out);
/* Bucket minima over the records (empirical L_opt). */
ARCHSCALE_API archscale_status archscale_ref_empirical_from_runs(const archscale_runs* runs,
                                                                 archscale_ref** out);

/* ---------- fitting and metrics ---------- */

/* options_json (all optional): {"max_iterations","lambda_init","nu",
 * "rel_tol","r_min","r_max","multistart":[[...],...]}. Pass NULL for
 * defaults. The report covers sse, train_mse, iterations, convergence,
 * filtered counts and the winning start. */
ARCHSCALE_API archscale_status archscale_fit_conditional_law(const archscale_runs* runs,
                                                             const char* form,
                                                             const archscale_ref* ref,
                                                             const char* options_json,
                                                             archscale_law** law_out,
                                                             char** report_json_out);
/* Fits E + A/N^alpha + B/D^beta to the records. */
ARCHSCALE_API archscale_status archscale_fit_chinchilla(const archscale_runs* runs,
                                                        const char* options_json,
                                                        archscale_ref** ref_out,
                                                        char** report_json_out);
/* {"mse","spearman","n"} of law predictions against the records' losses. */
ARCHSCALE_API archscale_status archscale_eval_law(const archscale_law* law,
                                                  const archscale_runs* runs,
                                                  const archscale_ref* ref, char** json_out);
ARCHSCALE_API archscale_status archscale_mse(const double* predicted, const double* actual,
                                             size_t n, double* out);
ARCHSCALE_API archscale_status archscale_spearman(const double* predicted, const double* actual,
                                                  size_t n, double* out);

/* ---------- architecture search ---------- */

/* d_multiple <= 0 defaults to d_head; f_multiple <= 0 defaults to 64. */
ARCHSCALE_API archscale_status archscale_closed_form_architecture(
    const archscale_law* law, int64_t n_target, int64_t n_layers, int64_t d_head, int64_t gqa,
    int64_t d_multiple, int64_t f_multiple, archscale_arch** out);

/* problem_json: {"n_target","d_tokens","loss_budget":<number|"optimal"|"unconstrained">,
 *  "grid":{...},"workload":{"batch","t_in","t_out"},
 *  "baseline_gqa"?,"epsilon"?}.
 * csv_out columns: name,d_model,n_head,gqa,f_size,x,r,predicted_loss,
 * tokens_per_second,feasible,pareto. */
ARCHSCALE_API archscale_status archscale_constrained_search(const archscale_law* law,
                                                            const archscale_ref* ref,
                                                            const archscale_hardware* hw,
                                                            const char* problem_json,
                                                            char** csv_out,
                                                            char** best_json_out);

/* evals_json maps gqa to measured loss, e.g. {"4":2.802,"9":2.804}; a
 * candidate gqa missing from the table is an evaluator failure. */
ARCHSCALE_API archscale_status archscale_gqa_local_search(const archscale_arch* base,
                                                          const char* evals_json,
                                                          int64_t baseline_gqa, double epsilon,
                                                          const archscale_hardware* hw,
                                                          int64_t batch, int64_t t_in,
                                                          int64_t t_out, char** report_json_out);

/* Full pipeline: ensures a reference (Chinchilla-fit from runs when ref is
 * NULL), a law (fit from runs when law is NULL), searches the grid (or the
 * closed form when loss_budget is "optimal"), then locally searches gqa
 * when gqa_evals_json is non-NULL. The report embeds the candidate trace
 * as CSV plus the chosen architecture. */
ARCHSCALE_API archscale_status archscale_run_algorithm1(const archscale_law* law,
                                                        const archscale_runs* runs,
                                                        const archscale_ref* ref,
                                                        const archscale_hardware* hw,
                                                        const char* problem_json,
                                                        const char* gqa_evals_json,
                                                        char** report_json_out);

/* ---------- bundled corpus and synthetic data ---------- */

/* size_label,variant,n_layers,d_model,n_head,d_head,gqa,f_size,
 * published_x,published_r for every bundled row. */
ARCHSCALE_API archscale_status archscale_corpus_csv(char** csv_out);
/* "80M"/"v1" style variants, or a model name with variant NULL or "". */
ARCHSCALE_API archscale_status archscale_corpus_arch(const char* size_label, const char* variant,
                                                     archscale_arch** out);

/* Synthetic losses over the bundled families (law against ref, Gaussian
 * noise), emitted in the run-record CSV schema. sizes_csv example:
 * "80M,145M,297M". */
ARCHSCALE_API archscale_status archscale_synth_runs_csv(const archscale_law* law,
                                                        const archscale_ref* ref,
                                                        const char* sizes_csv, double noise_sigma,
                                                        uint64_t seed, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* ARCHSCALE_H */
