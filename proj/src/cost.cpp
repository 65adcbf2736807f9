#include "cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace archscale {

void validate_hardware(const HardwareProfile& hw) {
    if (hw.peak_flops <= 0.0) throw_validation("hardware: peak_flops must be positive");
    if (hw.mem_bandwidth <= 0.0) throw_validation("hardware: mem_bandwidth must be positive");
    if (hw.mem_capacity <= 0.0) throw_validation("hardware: mem_capacity must be positive");
    if (hw.bytes_per_weight <= 0) throw_validation("hardware: bytes_per_weight must be positive");
    if (hw.bytes_per_kv <= 0) throw_validation("hardware: bytes_per_kv must be positive");
}

void validate_workload(const Workload& wl) {
    if (wl.batch < 1) throw_validation("workload: batch must be >= 1");
    if (wl.t_in < 0) throw_validation("workload: t_in must be >= 0");
    if (wl.t_out < 1) throw_validation("workload: t_out must be >= 1");
}

HardwareProfile a100_40g() {
    HardwareProfile hw;
    hw.name = "a100-40g";
    hw.peak_flops = 312e12;
    hw.mem_bandwidth = 1.555e12;
    hw.mem_capacity = 40e9;
    hw.bytes_per_weight = 2;
    hw.bytes_per_kv = 2;
    return hw;
}

double training_flops(double n_nonembed, double d_tokens) {
    if (n_nonembed <= 0.0 || d_tokens <= 0.0) {
        throw_validation("training_flops: N and D must be positive");
    }
    return 6.0 * n_nonembed * d_tokens;
}

double decode_flops_per_token(const ArchitectureConfig& c, int64_t t_context) {
    require_valid(c);
    if (t_context < 0) throw_validation("decode_flops_per_token: t_context must be >= 0");
    auto p = count_params(c);
    return 2.0 * static_cast<double>(p.n_nonembed) +
           2.0 * static_cast<double>(c.n_layers) * static_cast<double>(t_context) *
               static_cast<double>(c.d_q());
}

double kv_cache_bytes(const ArchitectureConfig& c, int64_t t_context, int64_t batch,
                      int64_t bytes_per_kv) {
    require_valid(c);
    if (t_context < 0) throw_validation("kv_cache_bytes: t_context must be >= 0");
    if (batch < 0) throw_validation("kv_cache_bytes: batch must be >= 0");
    if (bytes_per_kv <= 0) throw_validation("kv_cache_bytes: bytes_per_kv must be positive");
    return static_cast<double>(batch) * 2.0 * static_cast<double>(c.n_layers) *
           static_cast<double>(t_context) * static_cast<double>(c.d_kv()) *
           static_cast<double>(bytes_per_kv);
}

int64_t max_feasible_batch(const ArchitectureConfig& c, const HardwareProfile& hw,
                           int64_t t_max) {
    require_valid(c);
    validate_hardware(hw);
    if (t_max < 0) throw_validation("max_feasible_batch: t_max must be >= 0");
    double weights = static_cast<double>(count_params(c).n_nonembed) *
                     static_cast<double>(hw.bytes_per_weight);
    if (weights > hw.mem_capacity) {
        throw_validation("max_feasible_batch: weights alone exceed memory capacity");
    }
    double per_seq = kv_cache_bytes(c, t_max, 1, hw.bytes_per_kv);
    if (per_seq <= 0.0) return std::numeric_limits<int64_t>::max();
    return static_cast<int64_t>(std::floor((hw.mem_capacity - weights) / per_seq));
}

CostReport estimate_throughput(const ArchitectureConfig& c, const HardwareProfile& hw,
                               const Workload& wl) {
    require_valid(c);
    validate_hardware(hw);
    validate_workload(wl);

    auto p = count_params(c);
    double n = static_cast<double>(p.n_nonembed);
    double weights = n * static_cast<double>(hw.bytes_per_weight);
    int64_t t_max = wl.t_in + wl.t_out;
    double resident = weights + kv_cache_bytes(c, t_max, wl.batch, hw.bytes_per_kv);
    if (resident > hw.mem_capacity) {
        std::ostringstream os;
        os << "exceeds memory capacity: needs " << resident << " bytes of " << hw.mem_capacity
           << "; maximal feasible batch at context " << t_max << " is "
           << max_feasible_batch(c, hw, t_max);
        throw_validation(os.str());
    }

    CostReport rep;
    double t_in = static_cast<double>(wl.t_in);
    rep.prefill_seconds = static_cast<double>(wl.batch) *
                          (2.0 * n * t_in +
                           static_cast<double>(c.n_layers) * t_in * t_in *
                               static_cast<double>(c.d_q())) /
                          hw.peak_flops;

    int64_t compute_bound_steps = 0;
    double decode = 0.0;
    for (int64_t t = 0; t < wl.t_out; ++t) {
        int64_t ctx = wl.t_in + t;
        double flop_time = static_cast<double>(wl.batch) * decode_flops_per_token(c, ctx) /
                           hw.peak_flops;
        double byte_time =
            (weights + kv_cache_bytes(c, ctx, wl.batch, hw.bytes_per_kv)) / hw.mem_bandwidth;
        decode += std::max(flop_time, byte_time);
        if (flop_time >= byte_time) ++compute_bound_steps;
    }
    rep.decode_seconds = decode;
    rep.tokens_per_second = static_cast<double>(wl.batch) * static_cast<double>(wl.t_out) /
                            (rep.prefill_seconds + rep.decode_seconds);
    rep.flops_per_decode_token = decode_flops_per_token(c, t_max);
    rep.kv_bytes_per_sequence = kv_cache_bytes(c, t_max, 1, hw.bytes_per_kv);
    rep.compute_bound_fraction =
        static_cast<double>(compute_bound_steps) / static_cast<double>(wl.t_out);
    return rep;
}

}  // namespace archscale
