#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "arch.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "oracles.hpp"

using namespace archscale;

namespace {

ArchitectureConfig make(int64_t layers, int64_t d, int64_t heads, int64_t d_head, int64_t gqa,
                        int64_t f) {
    ArchitectureConfig c;
    c.n_layers = layers;
    c.d_model = d;
    c.n_head = heads;
    c.d_head = d_head;
    c.gqa = gqa;
    c.f_size = f;
    return c;
}

const ArchitectureConfig k80Mv1 = make(12, 768, 16, 64, 4, 2048);
const ArchitectureConfig kPanda1B = make(16, 2560, 72, 64, 4, 4096);

}  // namespace

TEST_CASE("validate accepts gqa=9 with 36 heads") {
    auto c = make(16, 2560, 36, 64, 9, 6144);
    CHECK(validate(c).empty());
}

TEST_CASE("validate flags non-dividing gqa") {
    auto c = make(12, 768, 15, 64, 4, 2048);
    auto v = validate(c);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "gqa must divide n_head");
}

TEST_CASE("validate flags non-positive fields") {
    auto c = k80Mv1;
    c.d_model = 0;
    auto v = validate(c);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "d_model must be positive");
}

TEST_CASE("count_params matches the hand-expanded 80M v1 numbers") {
    auto p = count_params(k80Mv1);
    CHECK(p.attn_per_layer == 1966080);
    CHECK(p.mlp_per_layer == 4718592);
    CHECK(p.per_layer_total == 6684672);
    CHECK(p.n_nonembed == 80216064);
}

TEST_CASE("count_params matches the 1B loss-optimal shape") {
    CHECK(count_params(kPanda1B).n_nonembed == 975175680);
}

TEST_CASE("count_params rejects invalid configs") {
    auto c = k80Mv1;
    c.gqa = 5;
    CHECK_THROWS_AS(count_params(c), Error);
}

TEST_CASE("removing the MLP term leaves exactly the attention share") {
    // degenerate check of the formula: at f_size = 0 only attention remains
    auto p = count_params(k80Mv1);
    CHECK(p.n_nonembed - k80Mv1.n_layers * p.mlp_per_layer ==
          k80Mv1.n_layers * p.attn_per_layer);
    CHECK(p.mlp_per_layer == 3 * k80Mv1.d_model * k80Mv1.f_size);
}

TEST_CASE("count_params agrees with per-matrix enumeration on random configs") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int64_t> layers(1, 40), dmul(1, 64), heads_per_group(1, 8),
        groups(1, 8), dh(1, 4), fmul(1, 200);
    for (int i = 0; i < 50; ++i) {
        ArchitectureConfig c;
        c.n_layers = layers(rng);
        c.d_model = 64 * dmul(rng);
        c.gqa = groups(rng);
        c.n_head = c.gqa * heads_per_group(rng);
        c.d_head = 32 * dh(rng);
        c.f_size = 64 * fmul(rng);
        REQUIRE(validate(c).empty());
        CHECK(count_params(c).n_nonembed == oracles::param_count_by_matrices(c));
    }
}

TEST_CASE("derived_metrics reproduces published feature values") {
    auto m1 = derived_metrics(k80Mv1);
    CHECK(m1.x == doctest::Approx(0.086).epsilon(0.02));
    CHECK(std::abs(m1.x - 0.086) < 0.001);
    CHECK(m1.r == doctest::Approx(2.40));

    auto panda3b = make(28, 4096, 36, 128, 3, 4096);
    auto m2 = derived_metrics(panda3b);
    CHECK(std::abs(m2.x - 0.077) < 0.001);
    CHECK(m2.r == doctest::Approx(1.0));

    auto surefire1b = make(16, 2560, 36, 64, 9, 6144);
    auto m3 = derived_metrics(surefire1b);
    CHECK(std::abs(m3.x - 0.082) < 0.001);
    CHECK(m3.r == doctest::Approx(3.6));
    CHECK(m3.d_q == 2304);
    CHECK(m3.d_kv == 256);
    CHECK(m3.n_kv_heads == 4);
}

TEST_CASE("solve_intermediate_size inverts the parameter formula") {
    CHECK(solve_intermediate_size(80216064, 12, 768, 16, 64, 4) == 2048);
    CHECK(solve_intermediate_size(975175680, 16, 2560, 72, 64, 4) == 4096);
}

TEST_CASE("solve_intermediate_size rejects budgets below the attention floor") {
    CHECK_THROWS_WITH_AS(solve_intermediate_size(1000000, 12, 768, 16, 64, 4),
                         doctest::Contains("budget too small"), Error);
}

TEST_CASE("solve_n_head inverts the ratio definition") {
    CHECK(solve_n_head(1.0, 128, 7, 4096) == 42);
    CHECK(solve_n_head(1.0, 128, 3, 4096) == 36);
    CHECK(solve_n_head(4.8, 64, 4, 8192) == 32);
}

TEST_CASE("solve_n_head rejects head counts below gqa") {
    CHECK_THROWS_WITH_AS(solve_n_head(500.0, 128, 8, 1024),
                         doctest::Contains("infeasible head count"), Error);
}

TEST_CASE("feasible_gqa enumerates divisors in ascending order") {
    CHECK(feasible_gqa(36) == std::vector<int64_t>{1, 2, 3, 4, 6, 9, 12, 18, 36});
    CHECK(feasible_gqa(1) == std::vector<int64_t>{1});
    CHECK(feasible_gqa(7) == std::vector<int64_t>{1, 7});
}

TEST_CASE("feasible_gqa contains 1 and n and only divisors") {
    for (int64_t n : {2, 12, 49, 97, 360}) {
        auto divisors = feasible_gqa(n);
        CHECK(divisors.front() == 1);
        CHECK(divisors.back() == n);
        CHECK(divisors == oracles::divisors_by_trial(n));
    }
}

TEST_CASE("enumerate_variants covers the published 80M sweep") {
    ArchGridSpec spec;
    spec.n_target = 80216064;
    spec.n_tolerance = 0.10;
    spec.n_layers = 12;
    spec.d_head = 64;
    spec.gqa_values = {4};
    spec.d_model_values = {384, 512, 768, 1024, 1536, 2048};
    spec.r_values = {2.40, 1.20, 0.68, 6.00};
    auto variants = enumerate_variants(spec);
    bool found_v1 = false;
    for (const auto& c : variants) {
        REQUIRE(validate(c).empty());
        auto p = count_params(c);
        CHECK(std::abs(static_cast<double>(p.n_nonembed - spec.n_target)) <=
              spec.n_tolerance * static_cast<double>(spec.n_target));
        if (c.d_model == 768 && c.n_head == 16 && c.f_size == 2048) found_v1 = true;
    }
    CHECK(found_v1);
}

TEST_CASE("enumerate_variants returns empty for an impossible budget") {
    ArchGridSpec spec;
    spec.n_target = 1000;
    spec.n_layers = 12;
    spec.d_head = 64;
    spec.gqa_values = {4};
    spec.d_model_values = {768};
    spec.r_values = {2.4};
    CHECK(enumerate_variants(spec).empty());
}

TEST_CASE("enumerate_variants is deterministic and sorted") {
    ArchGridSpec spec;
    spec.n_target = 80216064;
    spec.n_layers = 12;
    spec.d_head = 64;
    spec.gqa_values = {4};
    spec.d_model_values = {768, 512};
    spec.r_values = {1.2, 2.4};
    auto a = enumerate_variants(spec);
    auto b = enumerate_variants(spec);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        if (i > 0) {
            CHECK(a[i - 1].d_model <= a[i].d_model);
            if (a[i - 1].d_model == a[i].d_model) {
                CHECK(derived_metrics(a[i - 1]).r <= derived_metrics(a[i]).r);
            }
        }
    }

    ArchGridSpec one = spec;
    one.d_model_values = {768};
    one.r_values = {2.4};
    CHECK(enumerate_variants(one).size() <= 1);
}

TEST_CASE("solver round-trip: snapped f_size survives inversion") {
    for (const auto& e : corpus()) {
        auto c = to_arch(e);
        auto p = count_params(c);
        CHECK(solve_intermediate_size(p.n_nonembed, c.n_layers, c.d_model, c.n_head, c.d_head,
                                      c.gqa) == c.f_size);
    }
}

TEST_CASE("r grows with f_size, x falls with f_size") {
    auto base = k80Mv1;
    double prev_r = 0.0, prev_x = 1e9;
    for (int64_t f = 512; f <= 4096; f += 512) {
        auto c = base;
        c.f_size = f;
        auto m = derived_metrics(c);
        CHECK(m.r > prev_r);
        CHECK(m.x < prev_x);
        prev_r = m.r;
        prev_x = m.x;
    }
}
