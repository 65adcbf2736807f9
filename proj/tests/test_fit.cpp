#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "error.hpp"
#include "fit.hpp"
#include "io.hpp"
#include "laws.hpp"

using namespace archscale;

namespace {

const ModelFn kLinear = [](std::span<const double> b, std::span<const double> f) {
    return b[0] + b[1] * f[0];
};

std::vector<DataPoint> law_points(const ConditionalLaw& law, size_t count, uint64_t seed,
                                  double sigma) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.04, 0.25), ur(0.5, 5.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<DataPoint> data;
    for (size_t i = 0; i < count; ++i) {
        double x = ux(rng), r = ur(rng);
        double y = conditional_loss(law, x, r, 1.0);
        if (sigma > 0.0) y += sigma * noise(rng);
        data.push_back({{x, r, 1.0}, y});
    }
    return data;
}

}  // namespace

TEST_CASE("lm_fit solves a noiseless linear model exactly") {
    std::vector<DataPoint> data = {{{0.0}, 1.0}, {{1.0}, 3.0}, {{2.0}, 5.0}};
    auto res = lm_fit(kLinear, data, {0.0, 0.0}, FitOptions{});
    CHECK(res.converged);
    CHECK(res.coefficients[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.coefficients[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(res.sse < 1e-18);
    for (double r : res.residuals) CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("lm_fit recovers the multiplicative law from noiseless data") {
    auto truth = task3_law();
    auto data = law_points(truth, 50, 11, 0.0);
    auto init = coefficients_from_law(truth);
    for (auto& c : init) c *= 1.2;  // 20 percent perturbation
    auto res = lm_fit(law_model(LawForm::multiplicative), data, init, FitOptions{});
    CHECK(res.sse < 1e-18);
    auto fitted = law_from_coefficients(LawForm::multiplicative, res.coefficients);
    std::vector<std::pair<double, double>> probes;
    for (const auto& p : data) probes.emplace_back(p.features[0], p.features[1]);
    CHECK(laws_equivalent(truth, fitted, probes));
}

TEST_CASE("lm_fit requires at least as many points as coefficients") {
    std::vector<DataPoint> data = {{{0.0}, 1.0}};
    CHECK_THROWS_WITH_AS(lm_fit(kLinear, data, {0.0, 0.0}, FitOptions{}),
                         doctest::Contains("fewer data points"), Error);
}

TEST_CASE("lm_fit rejects a non-finite model at the init") {
    ModelFn bad = [](std::span<const double> b, std::span<const double>) {
        return std::log(b[0]);
    };
    std::vector<DataPoint> data = {{{0.0}, 1.0}, {{1.0}, 1.0}};
    CHECK_THROWS_AS(lm_fit(bad, data, {-1.0}, FitOptions{}), Error);
}

TEST_CASE("lm_fit never raises the SSE across accepted steps, 100 random problems") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> coef(-2.0, 2.0), xdist(0.1, 3.0);
    ModelFn model = [](std::span<const double> b, std::span<const double> f) {
        return b[0] * std::exp(b[1] * f[0]) + b[2] * f[0];
    };
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> truth = {coef(rng), coef(rng) * 0.3, coef(rng)};
        std::vector<DataPoint> data;
        std::normal_distribution<double> noise(0.0, 0.05);
        for (int i = 0; i < 24; ++i) {
            double x = xdist(rng);
            double y = truth[0] * std::exp(truth[1] * x) + truth[2] * x + noise(rng);
            data.push_back({{x}, y});
        }
        std::vector<double> init = {coef(rng), coef(rng) * 0.3, coef(rng)};
        FitOptions opts;
        opts.max_iterations = 60;
        FitResult res;
        try {
            res = lm_fit(model, data, init, opts);
        } catch (const Error&) {
            continue;  // non-finite init draw
        }
        REQUIRE(!res.accepted_sse.empty());
        for (size_t i = 1; i < res.accepted_sse.size(); ++i) {
            CHECK(res.accepted_sse[i] < res.accepted_sse[i - 1]);
        }
        CHECK(res.sse <= res.accepted_sse.front());
    }
}

TEST_CASE("identical inputs give bit-identical fits") {
    auto data = law_points(task3_law(), 40, 3, 0.01);
    FitOptions opts;
    opts.multistart_grid = default_multistart_grid(LawForm::multiplicative);
    auto a = multistart_fit(law_model(LawForm::multiplicative), data, opts);
    auto b = multistart_fit(law_model(LawForm::multiplicative), data, opts);
    CHECK(a.sse == b.sse);
    CHECK(a.start_index == b.start_index);
    REQUIRE(a.coefficients.size() == b.coefficients.size());
    for (size_t i = 0; i < a.coefficients.size(); ++i) {
        CHECK(a.coefficients[i] == b.coefficients[i]);
    }
}

TEST_CASE("multistart wins over every single start and breaks ties deterministically") {
    auto truth = task3_law();
    auto data = law_points(truth, 60, 5, 0.0);
    FitOptions opts;
    opts.multistart_grid = {
        {3.0, -0.1, 0.01, 0.4, 0.006, 0.006},  // sign-flipped curvature start
        coefficients_from_law(truth),
        {1.0, 0.01, 0.005, 0.3, 0.005, 0.005},
    };
    auto best = multistart_fit(law_model(LawForm::multiplicative), data, opts);
    for (size_t s = 0; s < opts.multistart_grid.size(); ++s) {
        auto single = lm_fit(law_model(LawForm::multiplicative), data, opts.multistart_grid[s],
                             opts);
        CHECK(best.sse <= single.sse);
    }
    CHECK(best.sse < 1e-15);

    FitOptions one = opts;
    one.multistart_grid = {opts.multistart_grid[1]};
    auto single = multistart_fit(law_model(LawForm::multiplicative), data, one);
    auto direct = lm_fit(law_model(LawForm::multiplicative), data, one.multistart_grid[0], one);
    CHECK(single.sse == direct.sse);
    CHECK(single.start_index == 0);
}

TEST_CASE("a bad lone start stays in a worse minimum than the multistart") {
    auto truth = task3_law();
    auto data = law_points(truth, 60, 5, 0.0);
    FitOptions opts;
    opts.max_iterations = 120;
    auto bad = lm_fit(law_model(LawForm::multiplicative), data,
                      {3.0, -0.1, 0.01, 0.4, 0.006, 0.006}, opts);
    opts.multistart_grid = default_multistart_grid(LawForm::multiplicative);
    auto best = multistart_fit(law_model(LawForm::multiplicative), data, opts);
    CHECK(best.sse < bad.sse);
}

TEST_CASE("gauge-related inits converge to equivalent multiplicative laws") {
    auto truth = task3_law();
    auto data = law_points(truth, 50, 17, 0.0);
    auto init_a = coefficients_from_law(truth);
    for (auto& c : init_a) c *= 1.15;
    std::vector<double> init_b = init_a;
    for (int i = 0; i < 3; ++i) init_b[i] *= 3.0;
    for (int i = 3; i < 6; ++i) init_b[i] /= 3.0;

    auto ra = lm_fit(law_model(LawForm::multiplicative), data, init_a, FitOptions{});
    auto rb = lm_fit(law_model(LawForm::multiplicative), data, init_b, FitOptions{});
    auto la = law_from_coefficients(LawForm::multiplicative, ra.coefficients);
    auto lb = law_from_coefficients(LawForm::multiplicative, rb.coefficients);
    std::vector<std::pair<double, double>> probes;
    for (const auto& p : data) probes.emplace_back(p.features[0], p.features[1]);
    CHECK(laws_equivalent(la, lb, probes));
}

TEST_CASE("fit_conditional_law recovers the generator over the bundled families") {
    ChinchillaParams chin{1.7, 400.0, 0.34, 2000.0, 0.28};
    auto ref = RefLossSource::from_chinchilla(chin);
    auto truth = task3_law();
    auto records = synthetic_runs(truth, ref, {"80M", "145M", "297M"}, 0.002, 42);

    FitOptions opts;
    auto res = fit_conditional_law(records, LawForm::multiplicative, ref, opts);
    CHECK(res.records_filtered > 0);  // the r=12.6 / r=0.10 style outliers
    auto opt = optimal_xr(res.law);
    auto truth_opt = optimal_xr(truth);
    CHECK(std::abs(opt.x_star - truth_opt.x_star) / truth_opt.x_star < 0.05);
    CHECK(std::abs(opt.r_star - truth_opt.r_star) / truth_opt.r_star < 0.05);
}

TEST_CASE("records entirely outside the ratio filter are an error") {
    ChinchillaParams chin{1.7, 400.0, 0.34, 2000.0, 0.28};
    auto ref = RefLossSource::from_chinchilla(chin);
    std::vector<RunRecord> outliers;
    for (const char* variant : {"v2", "v3", "v7", "v9", "v10", "v14"}) {  // r in {12.6, 6.0, 0.10}
        RunRecord rec;
        rec.arch = corpus_arch("80M", variant);
        rec.size_label = "80M";
        rec.d_tokens = 8000000000;
        rec.loss = 3.3;
        outliers.push_back(rec);
    }
    FitOptions opts;
    CHECK_THROWS_WITH_AS(fit_conditional_law(outliers, LawForm::multiplicative, ref, opts),
                         doctest::Contains("empty after outlier filter"), Error);

    opts.r_filter_min = 0.05;
    opts.r_filter_max = 15.0;
    opts.multistart_grid = {coefficients_from_law(task3_law())};
    opts.max_iterations = 5;
    auto res = fit_conditional_law(outliers, LawForm::multiplicative, ref, opts);
    CHECK(res.records_used == 6);
    CHECK(res.records_filtered == 0);
}

TEST_CASE("train MSE of a noisy fit sits in the expected band") {
    const double sigma = 0.002;
    ChinchillaParams chin{1.7, 400.0, 0.34, 2000.0, 0.28};
    auto ref = RefLossSource::from_chinchilla(chin);
    auto records = synthetic_runs(task3_law(), ref, {"80M", "145M", "297M"}, sigma, 9);
    auto res = fit_conditional_law(records, LawForm::multiplicative, ref, FitOptions{});
    REQUIRE(res.records_used >= 50);
    CHECK(res.fit.train_mse > 0.5 * sigma * sigma);
    CHECK(res.fit.train_mse < 2.0 * sigma * sigma);
}

TEST_CASE("additive and joint forms fit noiseless synthetic data") {
    auto additive_truth = ConditionalLaw::additive(2.5, 0.097, 0.0078, 0.0063, 0.0065);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ux(0.04, 0.25), ur(0.5, 5.0);
    std::vector<DataPoint> add_data, joint_data;
    auto joint_truth = ConditionalLaw::joint(2.0, 0.05, 0.01);
    for (int i = 0; i < 60; ++i) {
        double x = ux(rng), r = ur(rng);
        add_data.push_back({{x, r, 1.0}, conditional_loss(additive_truth, x, r, 1.0)});
        joint_data.push_back({{x, r, 1.0}, conditional_loss(joint_truth, x, r, 1.0)});
    }
    FitOptions opts;
    opts.multistart_grid = default_multistart_grid(LawForm::additive);
    auto add_fit = multistart_fit(law_model(LawForm::additive), add_data, opts);
    CHECK(add_fit.sse < 1e-16);
    opts.multistart_grid = default_multistart_grid(LawForm::joint);
    auto joint_fit = multistart_fit(law_model(LawForm::joint), joint_data, opts);
    CHECK(joint_fit.sse < 1e-16);
}

TEST_CASE("fit_chinchilla recovers synthetic power-law data") {
    ChinchillaParams truth{1.7, 400.0, 0.34, 2000.0, 0.28};
    std::vector<RunRecord> records;
    for (const char* label : {"80M", "145M", "297M", "1B"}) {
        for (const auto& e : corpus()) {
            if (e.size_label != label) continue;
            RunRecord rec;
            rec.arch = to_arch(e);
            rec.size_label = label;
            for (double mult : {20.0, 100.0}) {
                rec.d_tokens = static_cast<int64_t>(mult * nominal_params(label));
                double n = static_cast<double>(count_params(rec.arch).n_nonembed);
                rec.loss = chinchilla_loss(truth, n, static_cast<double>(rec.d_tokens));
                records.push_back(rec);
            }
            break;  // one variant per family is enough
        }
    }
    auto res = fit_chinchilla(records, FitOptions{});
    double predicted = chinchilla_loss(res.params, 5e8, 6e10);
    double expected = chinchilla_loss(truth, 5e8, 6e10);
    CHECK(predicted == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("mse identities") {
    std::vector<double> a = {1.0, 2.0}, b = {1.0, 4.0};
    CHECK(mse(a, a) == 0.0);
    CHECK(mse(a, b) == doctest::Approx(2.0));
    CHECK(mse(b, a) == mse(a, b));
    std::vector<double> single_p = {1.0}, single_a = {1.1};
    CHECK(mse(single_p, single_a) == doctest::Approx(0.01));
    std::vector<double> empty;
    CHECK_THROWS_AS(mse(empty, empty), Error);
    std::vector<double> short_v = {1.0};
    CHECK_THROWS_AS(mse(a, short_v), Error);
}

TEST_CASE("spearman on exact, reversed and partially swapped rankings") {
    std::vector<double> inc = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> incf = {10.0, 20.0, 30.0, 40.0};
    CHECK(spearman(inc, incf) == doctest::Approx(1.0));
    std::vector<double> dec = {4.0, 3.0, 2.0, 1.0};
    CHECK(spearman(inc, dec) == doctest::Approx(-1.0));
    std::vector<double> p = {1.0, 2.0, 3.0}, a = {1.0, 3.0, 2.0};
    CHECK(spearman(p, a) == doctest::Approx(0.5));
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    std::vector<double> p(20), a(20);
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] = u(rng);
        a[i] = u(rng);
    }
    double base = spearman(p, a);
    std::vector<double> p_exp(p.size()), a_cube(a.size());
    for (size_t i = 0; i < p.size(); ++i) {
        p_exp[i] = std::exp(p[i]);
        a_cube[i] = a[i] * a[i] * a[i];
    }
    CHECK(spearman(p_exp, a) == doctest::Approx(base).epsilon(1e-12));
    CHECK(spearman(p, a_cube) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("spearman handles ties by average rank and rejects all-tied input") {
    std::vector<double> p = {1.0, 1.0, 2.0}, a = {1.0, 2.0, 3.0};
    // ranks p = {1.5, 1.5, 3}, a = {1, 2, 3}
    CHECK(spearman(p, a) == doctest::Approx(0.866025403784439).epsilon(1e-9));
    std::vector<double> flat = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(spearman(flat, a), Error);
    std::vector<double> one = {1.0};
    CHECK_THROWS_AS(spearman(one, one), Error);
}
