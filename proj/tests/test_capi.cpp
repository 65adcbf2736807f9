// Exercises the shared-library surface the way an FFI client would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "archscale.h"

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    archscale_string_free(s);
    return out;
}

const char* kPanda1B =
    R"({"name":"Panda-1B","n_layers":16,"d_model":2560,"n_head":72,"d_head":64,"gqa":4,)"
    R"("f_size":4096})";

}  // namespace

TEST_CASE("arch lifecycle, params and metrics through the C API") {
    archscale_arch* arch = nullptr;
    REQUIRE(archscale_arch_from_json(kPanda1B, &arch) == ARCHSCALE_OK);
    int64_t attn = 0, mlp = 0, per_layer = 0, n = 0;
    CHECK(archscale_arch_params(arch, &attn, &mlp, &per_layer, &n) == ARCHSCALE_OK);
    CHECK(n == 975175680);
    double x = 0, r = 0;
    int64_t d_q = 0, d_kv = 0, n_kv = 0;
    CHECK(archscale_arch_metrics(arch, &x, &r, &d_q, &d_kv, &n_kv) == ARCHSCALE_OK);
    CHECK(std::abs(x - 0.082) < 0.001);
    CHECK(d_q == 4608);
    char* violations = nullptr;
    CHECK(archscale_arch_violations(arch, &violations) == ARCHSCALE_OK);
    CHECK(take(violations) == "[]");
    archscale_arch_free(arch);
}

TEST_CASE("schema violations surface as validation errors with messages") {
    archscale_arch* arch = nullptr;
    CHECK(archscale_arch_from_json(R"({"n_layers":1,"bogus":2})", &arch) ==
          ARCHSCALE_ERROR_VALIDATION);
    CHECK(std::strstr(archscale_last_error(), "unknown key") != nullptr);

    // invariant violations do not block construction, only dependent calls
    REQUIRE(archscale_arch_create("bad", 12, 768, 15, 64, 4, 2048, &arch) == ARCHSCALE_OK);
    char* violations = nullptr;
    CHECK(archscale_arch_violations(arch, &violations) == ARCHSCALE_OK);
    CHECK(take(violations).find("gqa must divide") != std::string::npos);
    int64_t n = 0;
    CHECK(archscale_arch_params(arch, nullptr, nullptr, nullptr, &n) ==
          ARCHSCALE_ERROR_VALIDATION);
    archscale_arch_free(arch);
}

TEST_CASE("cost model through the C API") {
    archscale_arch* arch = nullptr;
    REQUIRE(archscale_arch_from_json(kPanda1B, &arch) == ARCHSCALE_OK);
    double flops = 0;
    CHECK(archscale_decode_flops_per_token(arch, 4096, &flops) == ARCHSCALE_OK);
    CHECK(flops == doctest::Approx(2554331136.0));
    double kv = 0;
    CHECK(archscale_kv_cache_bytes(arch, 5120, 1, 2, &kv) == ARCHSCALE_OK);
    CHECK(kv == doctest::Approx(377487360.0));

    archscale_hardware* hw = nullptr;
    REQUIRE(archscale_hardware_a100_40g(&hw) == ARCHSCALE_OK);
    int64_t batch = 0;
    CHECK(archscale_max_feasible_batch(arch, hw, 5120, &batch) == ARCHSCALE_OK);
    CHECK(batch == 100);
    archscale_cost_report rep{};
    CHECK(archscale_estimate_throughput(arch, hw, 16, 4096, 64, &rep) == ARCHSCALE_OK);
    CHECK(rep.tokens_per_second > 0.0);
    CHECK(rep.tokens_per_second * (rep.prefill_seconds + rep.decode_seconds) ==
          doctest::Approx(16.0 * 64.0));
    CHECK(archscale_estimate_throughput(arch, hw, 100000, 4096, 64, &rep) ==
          ARCHSCALE_ERROR_VALIDATION);
    archscale_hardware_free(hw);
    archscale_arch_free(arch);
}

TEST_CASE("laws round-trip and evaluate through the C API") {
    archscale_law* law = nullptr;
    REQUIRE(archscale_law_builtin("task3", &law) == ARCHSCALE_OK);
    double x_star = 0, r_star = 0, xr_star = 0;
    CHECK(archscale_optimal_xr(law, &x_star, &r_star, &xr_star) == ARCHSCALE_OK);
    CHECK(std::abs(x_star - 0.0801) < 0.001);
    CHECK(std::abs(r_star - 1.032) < 0.002);

    char* json = nullptr;
    REQUIRE(archscale_law_to_json(law, &json) == ARCHSCALE_OK);
    std::string text = take(json);
    archscale_law* reloaded = nullptr;
    REQUIRE(archscale_law_from_json(text.c_str(), &reloaded) == ARCHSCALE_OK);
    int equal = 0;
    CHECK(archscale_laws_equivalent(law, reloaded, nullptr, nullptr, 0, &equal) == ARCHSCALE_OK);
    CHECK(equal == 1);

    double value = 0;
    CHECK(archscale_conditional_loss(law, 0.0801, 1.032, 1.0, &value) == ARCHSCALE_OK);
    CHECK(value == doctest::Approx(1.0028).epsilon(1e-3));
    CHECK(archscale_conditional_loss(law, -0.1, 1.0, 1.0, &value) ==
          ARCHSCALE_ERROR_VALIDATION);
    archscale_law_free(reloaded);
    archscale_law_free(law);

    CHECK(archscale_law_builtin("unknown", &law) == ARCHSCALE_ERROR_VALIDATION);
}

TEST_CASE("metrics helpers through the C API") {
    double p[3] = {1.0, 2.0, 3.0};
    double a[3] = {1.0, 3.0, 2.0};
    double out = 0;
    CHECK(archscale_spearman(p, a, 3, &out) == ARCHSCALE_OK);
    CHECK(out == doctest::Approx(0.5));
    double b[2] = {1.0, 4.0};
    double c[2] = {1.0, 2.0};
    CHECK(archscale_mse(c, b, 2, &out) == ARCHSCALE_OK);
    CHECK(out == doctest::Approx(2.0));
    double flat[2] = {1.0, 1.0};
    CHECK(archscale_spearman(flat, b, 2, &out) == ARCHSCALE_ERROR_NUMERIC);
}

TEST_CASE("synthetic data, fitting and evaluation through the C API") {
    archscale_law* truth = nullptr;
    REQUIRE(archscale_law_builtin("task3", &truth) == ARCHSCALE_OK);
    archscale_ref* ref = nullptr;
    REQUIRE(archscale_ref_chinchilla(1.7, 400.0, 0.34, 2000.0, 0.28, &ref) == ARCHSCALE_OK);

    char* csv = nullptr;
    REQUIRE(archscale_synth_runs_csv(truth, ref, "80M,145M", 0.002, 7, &csv) == ARCHSCALE_OK);
    std::string csv_text = take(csv);
    archscale_runs* runs = nullptr;
    REQUIRE(archscale_runs_from_csv(csv_text.c_str(), &runs) == ARCHSCALE_OK);
    CHECK(archscale_runs_count(runs) > 50);

    archscale_law* fitted = nullptr;
    char* report = nullptr;
    REQUIRE(archscale_fit_conditional_law(runs, "multiplicative", ref, nullptr, &fitted,
                                          &report) == ARCHSCALE_OK);
    std::string report_text = take(report);
    CHECK(report_text.find("\"sse\"") != std::string::npos);
    double x_star = 0, r_star = 0, xr_star = 0;
    CHECK(archscale_optimal_xr(fitted, &x_star, &r_star, &xr_star) == ARCHSCALE_OK);
    CHECK(std::abs(x_star - 0.0801) / 0.0801 < 0.05);

    char* metrics = nullptr;
    REQUIRE(archscale_eval_law(fitted, runs, ref, &metrics) == ARCHSCALE_OK);
    CHECK(take(metrics).find("spearman") != std::string::npos);

    archscale_law_free(fitted);
    archscale_runs_free(runs);
    archscale_ref_free(ref);
    archscale_law_free(truth);
}

TEST_CASE("closed form and algorithm1 through the C API") {
    archscale_law* law = nullptr;
    REQUIRE(archscale_law_builtin("task3", &law) == ARCHSCALE_OK);
    archscale_arch* arch = nullptr;
    REQUIRE(archscale_closed_form_architecture(law, 975175680, 16, 64, 4, 512, 64, &arch) ==
            ARCHSCALE_OK);
    char* json = nullptr;
    REQUIRE(archscale_arch_to_json(arch, &json) == ARCHSCALE_OK);
    std::string text = take(json);
    CHECK(text.find("2560") != std::string::npos);
    CHECK(text.find("4096") != std::string::npos);
    archscale_arch_free(arch);

    archscale_ref* ref = nullptr;
    REQUIRE(archscale_ref_chinchilla(1.7, 400.0, 0.34, 2000.0, 0.28, &ref) == ARCHSCALE_OK);
    archscale_hardware* hw = nullptr;
    REQUIRE(archscale_hardware_a100_40g(&hw) == ARCHSCALE_OK);
    const char* problem = R"({
      "n_target": 975175680, "d_tokens": 100000000000,
      "loss_budget": "unconstrained",
      "grid": {"n_target": 975175680, "n_layers": 16, "d_head": 64,
               "gqa_values": [4, 8], "d_model_values": [2048, 2560],
               "r_values": [1.07, 2.4, 4.8]},
      "workload": {"batch": 32, "t_in": 4096, "t_out": 64}
    })";
    char* report = nullptr;
    REQUIRE(archscale_run_algorithm1(law, nullptr, ref, hw, problem, nullptr, &report) ==
            ARCHSCALE_OK);
    std::string report_text = take(report);
    CHECK(report_text.find("candidates_csv") != std::string::npos);
    CHECK(report_text.find("tokens_per_second") != std::string::npos);

    archscale_hardware_free(hw);
    archscale_ref_free(ref);
    archscale_law_free(law);
}

TEST_CASE("gqa local search through the C API") {
    archscale_arch* base = nullptr;
    REQUIRE(archscale_corpus_arch("Surefire-1B", nullptr, &base) == ARCHSCALE_OK);
    archscale_hardware* hw = nullptr;
    REQUIRE(archscale_hardware_a100_40g(&hw) == ARCHSCALE_OK);
    const char* evals = R"({"4":2.802,"6":2.802,"9":2.802,"12":2.810})";
    char* report = nullptr;
    REQUIRE(archscale_gqa_local_search(base, evals, 4, 0.002, hw, 64, 4096, 64, &report) ==
            ARCHSCALE_OK);
    std::string text = take(report);
    CHECK(text.find("\"chosen_gqa\":9") != std::string::npos);

    // a candidate gqa missing from the table is an evaluator failure
    CHECK(archscale_gqa_local_search(base, R"({"4":2.8})", 4, 0.002, hw, 64, 4096, 64,
                                     &report) == ARCHSCALE_ERROR_VALIDATION);
    archscale_hardware_free(hw);
    archscale_arch_free(base);
}

TEST_CASE("corpus access through the C API") {
    char* csv = nullptr;
    REQUIRE(archscale_corpus_csv(&csv) == ARCHSCALE_OK);
    std::string text = take(csv);
    CHECK(text.find("80M,v1,") != std::string::npos);
    CHECK(text.find("Surefire-3B") != std::string::npos);

    int64_t* divisors = nullptr;
    size_t count = 0;
    REQUIRE(archscale_feasible_gqa(36, &divisors, &count) == ARCHSCALE_OK);
    CHECK(count == 9);
    CHECK(divisors[0] == 1);
    CHECK(divisors[8] == 36);
    archscale_int64_array_free(divisors);
}
