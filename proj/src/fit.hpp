#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "laws.hpp"
#include "run.hpp"

namespace archscale {

// A model maps (coefficients, feature row) to a prediction.
using ModelFn =
    std::function<double(std::span<const double> beta, std::span<const double> features)>;

struct DataPoint {
    std::vector<double> features;
    double target = 0.0;
};

struct CoefBounds {
    double lo;
    double hi;
};

struct FitOptions {
    int max_iterations = 200;
    double lambda_init = 1e-3;
    double nu = 10.0;          // damping scale factor on accept/reject
    double rel_tol = 1e-12;    // relative SSE improvement threshold
    std::vector<CoefBounds> param_bounds;               // empty = unbounded
    std::vector<std::vector<double>> multistart_grid;   // empty = defaults per form
    double r_filter_min = 0.5;
    double r_filter_max = 5.0;
};

struct FitResult {
    std::vector<double> coefficients;
    double sse = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;
    double train_mse = 0.0;
    int start_index = 0;
    std::vector<double> accepted_sse;  // SSE after each accepted step, descent-monotone
};

// Damped Gauss-Newton least squares. The Jacobian comes from forward
// finite differences with step 1e-7 * max(1, |coef|); accepted steps
// divide lambda by nu, rejected ones multiply it. Terminates on the
// relative-improvement threshold, a small gradient (inf-norm < 1e-10),
// max_iterations, or lambda escalation past 1e12 (returned best-so-far is
// then flagged not converged). Deterministic: identical inputs give
// bit-identical results.
FitResult lm_fit(const ModelFn& model, const std::vector<DataPoint>& data,
                 std::vector<double> init, const FitOptions& opts);

// Best-SSE lm_fit over opts.multistart_grid, ties broken by the lowest
// start index. result_filter, when set, disqualifies starts whose result
// it rejects (used for the multiplicative positive-factor constraint).
FitResult multistart_fit(const ModelFn& model, const std::vector<DataPoint>& data,
                         const FitOptions& opts,
                         const std::function<bool(const FitResult&)>& result_filter = nullptr);

// Evaluator for a law form over feature rows {x, r, l_opt}.
ModelFn law_model(LawForm form);
// Coefficient layout per form: multiplicative {a0,a1,a2,b0,b1,b2},
// additive {a0,a1,a2,b1,b2}, joint {a0,a1,a2}.
ConditionalLaw law_from_coefficients(LawForm form, std::span<const double> beta);
std::vector<double> coefficients_from_law(const ConditionalLaw& law);
std::vector<std::vector<double>> default_multistart_grid(LawForm form);

struct ConditionalFitResult {
    ConditionalLaw law;
    FitResult fit;
    size_t records_used = 0;
    size_t records_filtered = 0;  // dropped by the r outlier filter
};

// End-to-end pipeline: derive (x, r) per record, drop r outliers outside
// [r_filter_min, r_filter_max], attach l_opt from the reference, then
// multistart-fit the requested form against the observed losses.
ConditionalFitResult fit_conditional_law(const std::vector<RunRecord>& records, LawForm form,
                                         const RefLossSource& ref, const FitOptions& opts);

struct ChinchillaFitResult {
    ChinchillaParams params;
    FitResult fit;
};

// Fits E + A/N^alpha + B/D^beta to (N, D, loss) triples.
ChinchillaFitResult fit_chinchilla(const std::vector<RunRecord>& records, const FitOptions& opts);

double mse(std::span<const double> predicted, std::span<const double> actual);

// Rank correlation with average ranks for ties; all-tied input is an error.
double spearman(std::span<const double> predicted, std::span<const double> actual);

}  // namespace archscale
