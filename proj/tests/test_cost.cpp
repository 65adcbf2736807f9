#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "arch.hpp"
#include "corpus.hpp"
#include "cost.hpp"
#include "error.hpp"

using namespace archscale;

namespace {

ArchitectureConfig panda_1b() { return corpus_arch("Panda-1B", ""); }

// Fixed-N family at one d_model, swept over gqa (the published GQA recipe):
// hold the attention budget, vary heads and kv heads together.
ArchitectureConfig family_member(int64_t n_target, int64_t d, double r, int64_t gqa,
                                 int64_t layers, int64_t d_head) {
    double per_layer = static_cast<double>(n_target) / static_cast<double>(layers);
    double attn_budget = per_layer / (1.0 + r);
    double raw = attn_budget / (2.0 * static_cast<double>(d) * static_cast<double>(d_head) *
                                (1.0 + 1.0 / static_cast<double>(gqa)));
    ArchitectureConfig c;
    c.n_layers = layers;
    c.d_model = d;
    c.d_head = d_head;
    c.gqa = gqa;
    c.n_head = std::llround(raw / static_cast<double>(gqa)) * gqa;
    c.f_size = solve_intermediate_size(n_target, layers, d, c.n_head, d_head, gqa);
    return c;
}

}  // namespace

TEST_CASE("training_flops is 6ND") {
    CHECK(training_flops(1e9, 1e11) == doctest::Approx(6e20));
    CHECK(training_flops(1, 1) == 6.0);
    double n = 80216064.0;
    CHECK(training_flops(n, 100.0 * n) == doctest::Approx(6.0 * 100.0 * n * n));
    CHECK_THROWS_AS(training_flops(0, 1), Error);
}

TEST_CASE("decode_flops_per_token matches the closed form on the 1B shape") {
    CHECK(decode_flops_per_token(panda_1b(), 4096) == doctest::Approx(2554331136.0));
}

TEST_CASE("decode flops at zero context is twice the parameter count") {
    for (const auto& e : model_corpus()) {
        auto c = to_arch(e);
        CHECK(decode_flops_per_token(c, 0) ==
              doctest::Approx(2.0 * static_cast<double>(count_params(c).n_nonembed)));
    }
}

TEST_CASE("context term is exactly linear: doubling T doubles only the mask term") {
    auto c = panda_1b();
    double base = decode_flops_per_token(c, 0);
    double at_t = decode_flops_per_token(c, 1000);
    double at_2t = decode_flops_per_token(c, 2000);
    CHECK(at_2t - base == doctest::Approx(2.0 * (at_t - base)));
}

TEST_CASE("decode flops linear in T with slope 2*layers*d_q on random configs") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int64_t> layers(1, 48), dmul(2, 80), hpg(1, 12), groups(1, 8),
        fmul(1, 256);
    for (int i = 0; i < 50; ++i) {
        ArchitectureConfig c;
        c.n_layers = layers(rng);
        c.d_model = 64 * dmul(rng);
        c.gqa = groups(rng);
        c.n_head = c.gqa * hpg(rng);
        c.d_head = 64;
        c.f_size = 64 * fmul(rng);
        double n2 = 2.0 * static_cast<double>(count_params(c).n_nonembed);
        double slope = 2.0 * static_cast<double>(c.n_layers) * static_cast<double>(c.d_q());
        for (int64_t t : {0, 17, 4096}) {
            CHECK(decode_flops_per_token(c, t) ==
                  doctest::Approx(n2 + slope * static_cast<double>(t)));
        }
    }
}

TEST_CASE("kv_cache_bytes matches the 1B shape and is linear in batch and T") {
    auto c = panda_1b();
    CHECK(kv_cache_bytes(c, 5120, 1, 2) == doctest::Approx(377487360.0));
    CHECK(kv_cache_bytes(c, 0, 1, 2) == 0.0);
    CHECK(kv_cache_bytes(c, 5120, 2, 2) == doctest::Approx(2.0 * kv_cache_bytes(c, 5120, 1, 2)));
    CHECK(kv_cache_bytes(c, 2560, 1, 2) == doctest::Approx(0.5 * kv_cache_bytes(c, 5120, 1, 2)));
}

TEST_CASE("max_feasible_batch edge cases") {
    auto c = panda_1b();
    auto hw = a100_40g();
    double weights = 2.0 * static_cast<double>(count_params(c).n_nonembed);

    HardwareProfile exact = hw;
    exact.mem_capacity = weights;
    CHECK(max_feasible_batch(c, exact, 5120) == 0);

    HardwareProfile one = hw;
    one.mem_capacity = weights + kv_cache_bytes(c, 5120, 1, 2);
    CHECK(max_feasible_batch(c, one, 5120) == 1);

    CHECK(max_feasible_batch(c, hw, 5120) == 100);

    HardwareProfile tiny = hw;
    tiny.mem_capacity = weights / 2.0;
    CHECK_THROWS_AS(max_feasible_batch(c, tiny, 5120), Error);
}

TEST_CASE("infinite compute makes decode purely bandwidth-limited") {
    auto c = panda_1b();
    auto hw = a100_40g();
    hw.peak_flops = 1e30;
    Workload wl{4, 128, 16};
    auto rep = estimate_throughput(c, hw, wl);
    double weights = static_cast<double>(count_params(c).n_nonembed) * 2.0;
    double expected = 0.0;
    for (int64_t t = 0; t < wl.t_out; ++t) {
        expected += (weights + kv_cache_bytes(c, wl.t_in + t, wl.batch, 2)) / hw.mem_bandwidth;
    }
    CHECK(rep.decode_seconds == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rep.compute_bound_fraction == 0.0);
}

TEST_CASE("report conserves tokens: rate times time equals batch*t_out") {
    auto c = panda_1b();
    auto rep = estimate_throughput(c, a100_40g(), Workload{16, 4096, 64});
    CHECK(rep.tokens_per_second * (rep.prefill_seconds + rep.decode_seconds) ==
          doctest::Approx(16.0 * 64.0).epsilon(1e-12));
    CHECK(rep.prefill_seconds > 0.0);
    CHECK(rep.flops_per_decode_token == doctest::Approx(decode_flops_per_token(c, 4096 + 64)));
    CHECK(rep.kv_bytes_per_sequence == doctest::Approx(kv_cache_bytes(c, 4096 + 64, 1, 2)));
}

TEST_CASE("workload exceeding memory names the maximal feasible batch") {
    auto c = panda_1b();
    CHECK_THROWS_WITH_AS(estimate_throughput(c, a100_40g(), Workload{512, 4096, 1024}),
                         doctest::Contains("exceeds memory capacity"), Error);
    try {
        estimate_throughput(c, a100_40g(), Workload{512, 4096, 1024});
    } catch (const Error& e) {
        int64_t cap = max_feasible_batch(c, a100_40g(), 4096 + 1024);
        CHECK(std::string(e.what()).find(std::to_string(cap)) != std::string::npos);
    }
}

TEST_CASE("throughput monotone in hardware peaks and workload pressure") {
    auto c = panda_1b();
    auto hw = a100_40g();
    Workload wl{8, 2048, 32};
    double base = estimate_throughput(c, hw, wl).tokens_per_second;

    auto faster = hw;
    faster.peak_flops *= 2.0;
    CHECK(estimate_throughput(c, faster, wl).tokens_per_second >= base);

    auto wider = hw;
    wider.mem_bandwidth *= 2.0;
    CHECK(estimate_throughput(c, wider, wl).tokens_per_second >= base);

    auto longer = wl;
    longer.t_in *= 2;
    CHECK(estimate_throughput(c, hw, longer).tokens_per_second <= base);

    auto fatter_kv = hw;
    fatter_kv.bytes_per_kv = 4;
    CHECK(estimate_throughput(c, fatter_kv, wl).tokens_per_second <= base);
}

TEST_CASE("memory-bound throughput rises with gqa at fixed budget, d_model and r") {
    const int64_t n_target = 975175680;
    auto hw = a100_40g();
    Workload wl{32, 4096, 32};
    double prev = 0.0;
    for (int64_t gqa : {1, 2, 4, 8}) {
        auto c = family_member(n_target, 2560, 1.07, gqa, 16, 64);
        auto rep = estimate_throughput(c, hw, wl);
        CHECK(rep.compute_bound_fraction == 0.0);
        CHECK(rep.tokens_per_second >= prev);
        prev = rep.tokens_per_second;
    }
}

TEST_CASE("doubling gqa strictly shrinks KV traffic at every decode step") {
    const int64_t n_target = 975175680;
    auto g4 = family_member(n_target, 2560, 1.07, 4, 16, 64);
    auto g8 = family_member(n_target, 2560, 1.07, 8, 16, 64);
    CHECK(g8.d_kv() < g4.d_kv());
    for (int64_t t : {1, 512, 4096, 5120}) {
        CHECK(kv_cache_bytes(g8, t, 1, 2) < kv_cache_bytes(g4, t, 1, 2));
    }
}

TEST_CASE("memory-bound throughput rises with d_model at fixed budget, r and gqa") {
    const int64_t n_target = 975175680;
    auto hw = a100_40g();
    Workload wl{32, 4096, 32};
    double prev = 0.0;
    for (int64_t d : {1024, 1536, 2048, 2560, 3072}) {
        auto c = family_member(n_target, d, 1.5, 4, 16, 64);
        auto rep = estimate_throughput(c, hw, wl);
        CHECK(rep.compute_bound_fraction == 0.0);
        CHECK(rep.tokens_per_second >= prev);
        prev = rep.tokens_per_second;
    }
}

TEST_CASE("memory-bound throughput rises with r at fixed budget, d_model and gqa") {
    const int64_t n_target = 975175680;
    auto hw = a100_40g();
    Workload wl{32, 4096, 32};
    double prev = 0.0;
    for (double r : {0.5, 1.0, 2.0, 3.6, 4.8}) {
        auto c = family_member(n_target, 2048, r, 4, 16, 64);
        auto rep = estimate_throughput(c, hw, wl);
        CHECK(rep.compute_bound_fraction == 0.0);
        CHECK(rep.tokens_per_second >= prev);
        prev = rep.tokens_per_second;
    }
}

TEST_CASE("larger d_model cuts per-token decode FLOPs at fixed budget") {
    const int64_t n_target = 975175680;
    double prev = 1e30;
    for (int64_t d : {1024, 1536, 2048, 2560}) {
        auto c = family_member(n_target, d, 1.5, 4, 16, 64);
        double flops = decode_flops_per_token(c, 4096);
        CHECK(flops < prev);
        prev = flops;
    }
}
