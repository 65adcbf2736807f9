#include "fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace archscale {

namespace {

constexpr double kGradientTol = 1e-10;
constexpr double kLambdaMax = 1e12;
constexpr double kLambdaMin = 1e-12;

double sum_squares(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

bool finite(double x) { return std::isfinite(x); }

// Residuals target - f(beta, x); returns false when any evaluation is
// non-finite.
bool residuals_at(const ModelFn& model, const std::vector<DataPoint>& data,
                  std::span<const double> beta, std::vector<double>& out) {
    out.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        double pred = model(beta, data[i].features);
        if (!finite(pred)) return false;
        out[i] = data[i].target - pred;
    }
    return true;
}

void clamp_to_bounds(std::vector<double>& beta, const std::vector<CoefBounds>& bounds) {
    if (bounds.empty()) return;
    for (size_t j = 0; j < beta.size() && j < bounds.size(); ++j) {
        beta[j] = std::clamp(beta[j], bounds[j].lo, bounds[j].hi);
    }
}

// Solves the symmetric system A x = b in place by Gaussian elimination
// with partial pivoting; returns false on a (numerically) singular pivot.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (!finite(a[pivot][col]) || std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (size_t row = col + 1; row < n; ++row) {
            double m = a[row][col] / a[col][col];
            for (size_t k = col; k < n; ++k) a[row][k] -= m * a[col][k];
            b[row] -= m * b[col];
        }
    }
    x.assign(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
        if (!finite(x[i])) return false;
    }
    return true;
}

}  // namespace

FitResult lm_fit(const ModelFn& model, const std::vector<DataPoint>& data,
                 std::vector<double> init, const FitOptions& opts) {
    const size_t n_coef = init.size();
    if (n_coef == 0) throw_validation("lm_fit: empty coefficient vector");
    if (data.size() < n_coef) {
        throw_validation("lm_fit: fewer data points than coefficients");
    }
    if (!(opts.nu > 1.0)) throw_validation("lm_fit: nu must be > 1");
    if (!(opts.lambda_init > 0.0)) throw_validation("lm_fit: lambda_init must be positive");
    if (!(opts.rel_tol > 0.0)) throw_validation("lm_fit: rel_tol must be positive");
    if (!opts.param_bounds.empty() && opts.param_bounds.size() != n_coef) {
        throw_validation("lm_fit: param_bounds size mismatch");
    }

    clamp_to_bounds(init, opts.param_bounds);
    std::vector<double> residuals;
    if (!residuals_at(model, data, init, residuals)) {
        throw_validation("lm_fit: model is not finite at the initial coefficients");
    }

    FitResult res;
    res.coefficients = init;
    res.sse = sum_squares(residuals);
    res.residuals = residuals;
    res.accepted_sse.push_back(res.sse);

    std::vector<double> beta = init;
    double sse = res.sse;
    double lambda = opts.lambda_init;

    std::vector<std::vector<double>> jac(data.size(), std::vector<double>(n_coef));
    std::vector<double> trial_beta;
    std::vector<double> trial_res;
    std::vector<double> base_pred(data.size());

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter + 1;

        for (size_t i = 0; i < data.size(); ++i) {
            base_pred[i] = data[i].target - residuals[i];
        }
        bool jac_ok = true;
        for (size_t j = 0; j < n_coef && jac_ok; ++j) {
            double h = 1e-7 * std::max(1.0, std::abs(beta[j]));
            std::vector<double> shifted = beta;
            shifted[j] += h;
            for (size_t i = 0; i < data.size(); ++i) {
                double pred = model(shifted, data[i].features);
                if (!finite(pred)) {
                    jac_ok = false;
                    break;
                }
                jac[i][j] = (pred - base_pred[i]) / h;
            }
        }
        if (!jac_ok) break;  // keep best-so-far, not converged

        // gradient of 1/2 SSE is -J^T r; test |J^T r|_inf
        std::vector<double> jtr(n_coef, 0.0);
        for (size_t i = 0; i < data.size(); ++i) {
            for (size_t j = 0; j < n_coef; ++j) jtr[j] += jac[i][j] * residuals[i];
        }
        double gnorm = 0.0;
        for (double g : jtr) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm < kGradientTol) {
            res.converged = true;
            break;
        }

        std::vector<std::vector<double>> jtj(n_coef, std::vector<double>(n_coef, 0.0));
        for (size_t i = 0; i < data.size(); ++i) {
            for (size_t j = 0; j < n_coef; ++j) {
                for (size_t k = j; k < n_coef; ++k) jtj[j][k] += jac[i][j] * jac[i][k];
            }
        }
        for (size_t j = 0; j < n_coef; ++j) {
            for (size_t k = 0; k < j; ++k) jtj[j][k] = jtj[k][j];
        }

        bool accepted = false;
        while (true) {
            auto damped = jtj;
            for (size_t j = 0; j < n_coef; ++j) damped[j][j] += lambda;
            std::vector<double> step;
            bool solved = solve_dense(damped, jtr, step);
            if (solved) {
                trial_beta = beta;
                for (size_t j = 0; j < n_coef; ++j) trial_beta[j] += step[j];
                clamp_to_bounds(trial_beta, opts.param_bounds);
                if (residuals_at(model, data, trial_beta, trial_res)) {
                    double trial_sse = sum_squares(trial_res);
                    if (finite(trial_sse) && trial_sse < sse) {
                        double improvement = (sse - trial_sse) / std::max(sse, 1e-300);
                        beta = trial_beta;
                        residuals = trial_res;
                        sse = trial_sse;
                        lambda = std::max(lambda / opts.nu, kLambdaMin);
                        accepted = true;
                        res.coefficients = beta;
                        res.sse = sse;
                        res.residuals = residuals;
                        res.accepted_sse.push_back(sse);
                        if (improvement < opts.rel_tol) res.converged = true;
                        break;
                    }
                }
            }
            lambda *= opts.nu;
            if (lambda > kLambdaMax) break;
        }
        if (!accepted) break;  // damping exhausted: best-so-far, flag below
        if (res.converged) break;
    }

    res.train_mse = res.sse / static_cast<double>(data.size());
    return res;
}

FitResult multistart_fit(const ModelFn& model, const std::vector<DataPoint>& data,
                         const FitOptions& opts,
                         const std::function<bool(const FitResult&)>& result_filter) {
    if (opts.multistart_grid.empty()) {
        throw_validation("multistart_fit: empty multistart grid");
    }
    bool have_best = false;
    FitResult best;
    std::string first_error;
    for (size_t s = 0; s < opts.multistart_grid.size(); ++s) {
        FitResult r;
        try {
            r = lm_fit(model, data, opts.multistart_grid[s], opts);
        } catch (const Error& e) {
            if (first_error.empty()) first_error = e.what();
            continue;  // e.g. model not finite at this start
        }
        r.start_index = static_cast<int>(s);
        if (result_filter && !result_filter(r)) continue;
        if (!have_best || r.sse < best.sse) {
            best = r;
            have_best = true;
        }
    }
    if (!have_best) {
        std::string msg = "fit failed: no admissible multistart result";
        if (!first_error.empty()) msg += " (" + first_error + ")";
        throw_numeric(msg);
    }
    return best;
}

ModelFn law_model(LawForm form) {
    switch (form) {
        case LawForm::multiplicative:
            return [](std::span<const double> b, std::span<const double> f) {
                double x = f[0], r = f[1], l = f[2];
                return (b[0] + b[1] * std::log(x) + b[2] / x) *
                       (b[3] + b[4] * std::log(r) + b[5] / r) * l;
            };
        case LawForm::additive:
            return [](std::span<const double> b, std::span<const double> f) {
                double x = f[0], r = f[1], l = f[2];
                return (b[0] + b[1] * std::log(x) + b[2] / x) +
                       (b[3] * std::log(r) + b[4] / r) + l;
            };
        case LawForm::joint:
            return [](std::span<const double> b, std::span<const double> f) {
                double xr = f[0] * f[1], l = f[2];
                return (b[0] + b[1] * std::log(xr) + b[2] / xr) * l;
            };
    }
    throw_numeric("law_model: unreachable form");
}

ConditionalLaw law_from_coefficients(LawForm form, std::span<const double> beta) {
    switch (form) {
        case LawForm::multiplicative:
            if (beta.size() != 6) throw_validation("multiplicative law needs 6 coefficients");
            return ConditionalLaw::multiplicative(beta[0], beta[1], beta[2], beta[3], beta[4],
                                                  beta[5]);
        case LawForm::additive:
            if (beta.size() != 5) throw_validation("additive law needs 5 coefficients");
            return ConditionalLaw::additive(beta[0], beta[1], beta[2], beta[3], beta[4]);
        case LawForm::joint:
            if (beta.size() != 3) throw_validation("joint law needs 3 coefficients");
            return ConditionalLaw::joint(beta[0], beta[1], beta[2]);
    }
    throw_numeric("law_from_coefficients: unreachable form");
}

std::vector<double> coefficients_from_law(const ConditionalLaw& law) {
    validate_law(law);
    switch (law.form) {
        case LawForm::multiplicative:
            return {law.a0, law.a1, law.a2, *law.b0, *law.b1, *law.b2};
        case LawForm::additive:
            return {law.a0, law.a1, law.a2, *law.b1, *law.b2};
        case LawForm::joint:
            return {law.a0, law.a1, law.a2};
    }
    throw_numeric("coefficients_from_law: unreachable form");
}

std::vector<std::vector<double>> default_multistart_grid(LawForm form) {
    const std::vector<double> a0s = {1.0, 2.0, 3.0};
    const std::vector<double> a1s = {0.01, 0.1, 0.3};
    const std::vector<double> a2s = {0.005, 0.02, 0.05};
    const std::vector<double> b0s = {0.3, 0.5, 1.0};
    const std::vector<double> b1s = {0.005, 0.05};
    const std::vector<double> b2s = {0.005, 0.05};

    std::vector<std::vector<double>> grid;
    switch (form) {
        case LawForm::multiplicative:
            for (double a0 : a0s)
                for (double a1 : a1s)
                    for (double a2 : a2s)
                        for (double b0 : b0s)
                            for (double b1 : b1s)
                                for (double b2 : b2s) grid.push_back({a0, a1, a2, b0, b1, b2});
            break;
        case LawForm::additive:
            for (double a0 : a0s)
                for (double a1 : a1s)
                    for (double a2 : a2s)
                        for (double b1 : b1s)
                            for (double b2 : b2s) grid.push_back({a0, a1, a2, b1, b2});
            break;
        case LawForm::joint:
            for (double a0 : a0s)
                for (double a1 : a1s)
                    for (double a2 : a2s) grid.push_back({a0, a1, a2});
            break;
    }
    return grid;
}

ConditionalFitResult fit_conditional_law(const std::vector<RunRecord>& records, LawForm form,
                                         const RefLossSource& ref, const FitOptions& opts) {
    if (records.empty()) throw_validation("fit_conditional_law: no records");
    if (!(opts.r_filter_min > 0.0) || !(opts.r_filter_max > opts.r_filter_min)) {
        throw_validation("fit_conditional_law: bad r filter interval");
    }

    std::vector<DataPoint> data;
    size_t filtered = 0;
    for (const auto& rec : records) {
        validate_record(rec);
        auto m = derived_metrics(rec.arch);
        if (m.r < opts.r_filter_min || m.r > opts.r_filter_max) {
            ++filtered;
            continue;
        }
        double n = static_cast<double>(count_params(rec.arch).n_nonembed);
        double l_opt = ref_loss(ref, n, rec.d_tokens);  // misses propagate
        data.push_back(DataPoint{{m.x, m.r, l_opt}, rec.loss});
    }
    if (data.empty()) throw_validation("empty after outlier filter");

    FitOptions local = opts;
    if (local.multistart_grid.empty()) local.multistart_grid = default_multistart_grid(form);

    std::function<bool(const FitResult&)> filter;
    if (form == LawForm::multiplicative) {
        // Both factors must stay positive across the fit domain.
        filter = [&data](const FitResult& r) {
            const auto& b = r.coefficients;
            for (const auto& p : data) {
                double fx = b[0] + b[1] * std::log(p.features[0]) + b[2] / p.features[0];
                double fr = b[3] + b[4] * std::log(p.features[1]) + b[5] / p.features[1];
                if (!(fx > 0.0) || !(fr > 0.0)) return false;
            }
            return true;
        };
    }

    ConditionalFitResult out;
    out.fit = multistart_fit(law_model(form), data, local, filter);
    out.law = law_from_coefficients(form, out.fit.coefficients);
    out.records_used = data.size();
    out.records_filtered = filtered;
    return out;
}

ChinchillaFitResult fit_chinchilla(const std::vector<RunRecord>& records,
                                   const FitOptions& opts) {
    if (records.empty()) throw_validation("fit_chinchilla: no records");
    std::vector<DataPoint> data;
    for (const auto& rec : records) {
        validate_record(rec);
        double n = static_cast<double>(count_params(rec.arch).n_nonembed);
        data.push_back(DataPoint{{n, static_cast<double>(rec.d_tokens)}, rec.loss});
    }

    ModelFn model = [](std::span<const double> b, std::span<const double> f) {
        return b[0] + b[1] / std::pow(f[0], b[2]) + b[3] / std::pow(f[1], b[4]);
    };

    FitOptions local = opts;
    if (local.param_bounds.empty()) {
        local.param_bounds = {{0.0, 20.0},   // E
                              {0.0, 1e12},   // A
                              {1e-3, 2.0},   // alpha
                              {0.0, 1e12},   // B
                              {1e-3, 2.0}};  // beta
    }
    if (local.multistart_grid.empty()) {
        for (double e : {0.5, 1.5, 2.5})
            for (double a : {50.0, 400.0, 2000.0})
                for (double alpha : {0.25, 0.34, 0.5})
                    for (double b : {200.0, 2000.0, 20000.0})
                        for (double beta : {0.2, 0.28, 0.4})
                            local.multistart_grid.push_back({e, a, alpha, b, beta});
    }

    ChinchillaFitResult out;
    out.fit = multistart_fit(model, data, local);
    out.params.e = out.fit.coefficients[0];
    out.params.a = out.fit.coefficients[1];
    out.params.alpha = out.fit.coefficients[2];
    out.params.b = out.fit.coefficients[3];
    out.params.beta = out.fit.coefficients[4];
    return out;
}

double mse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw_validation("mse: length mismatch");
    if (predicted.empty()) throw_validation("mse: empty input");
    double s = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        double d = predicted[i] - actual[i];
        s += d * d;
    }
    return s / static_cast<double>(predicted.size());
}

namespace {

// Average-fractional ranks; tied values share the mean of their ranks.
std::vector<double> ranks(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> rank(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = mean_rank;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double spearman(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw_validation("spearman: length mismatch");
    if (predicted.size() < 2) throw_validation("spearman: need at least 2 points");
    auto rp = ranks(predicted);
    auto ra = ranks(actual);
    const double n = static_cast<double>(rp.size());
    double mean = (n + 1.0) / 2.0;
    double cov = 0.0, var_p = 0.0, var_a = 0.0;
    for (size_t i = 0; i < rp.size(); ++i) {
        double dp = rp[i] - mean;
        double da = ra[i] - mean;
        cov += dp * da;
        var_p += dp * dp;
        var_a += da * da;
    }
    if (var_p == 0.0 || var_a == 0.0) {
        throw_numeric("spearman: undefined, zero rank variance (all values tied)");
    }
    return cov / std::sqrt(var_p * var_a);
}

}  // namespace archscale
