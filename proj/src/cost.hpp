#pragma once

#include <cstdint>
#include <string>

#include "arch.hpp"

namespace archscale {

// Device peaks and storage sizes used by the roofline throughput estimate.
struct HardwareProfile {
    std::string name;
    double peak_flops = 0.0;      // FLOP/s
    double mem_bandwidth = 0.0;   // bytes/s
    double mem_capacity = 0.0;    // bytes
    int64_t bytes_per_weight = 2;
    int64_t bytes_per_kv = 2;
};

// Serving request shape: batch sequences, t_in prompt tokens each,
// t_out generated tokens each.
struct Workload {
    int64_t batch = 1;
    int64_t t_in = 0;
    int64_t t_out = 1;
};

struct CostReport {
    double prefill_seconds = 0.0;
    double decode_seconds = 0.0;
    double tokens_per_second = 0.0;
    double flops_per_decode_token = 0.0;   // at the final context t_in + t_out
    double kv_bytes_per_sequence = 0.0;    // at the final context t_in + t_out
    double compute_bound_fraction = 0.0;   // share of decode steps limited by FLOPs
};

void validate_hardware(const HardwareProfile& hw);
void validate_workload(const Workload& wl);

// Bundled profile matching a 40GB Ampere A100 running fp16 weights/KV.
HardwareProfile a100_40g();

// Training cost approximation 6*N*D.
double training_flops(double n_nonembed, double d_tokens);

// Per generated token: 2*N_nonembed + 2*n_layers*T*d_q. The T term is the
// q*K^T score against the cached context; softmax*V and norms are not
// counted.
double decode_flops_per_token(const ArchitectureConfig& config, int64_t t_context);

// batch * 2 * n_layers * T * d_kv * bytes_per_kv (the 2 is keys + values).
double kv_cache_bytes(const ArchitectureConfig& config, int64_t t_context, int64_t batch,
                      int64_t bytes_per_kv);

// Largest batch whose KV cache at t_max plus the weights fits in memory.
// Throws when the weights alone do not fit.
int64_t max_feasible_batch(const ArchitectureConfig& config, const HardwareProfile& hw,
                           int64_t t_max);

// Roofline estimate: prefill is modeled compute-bound; each decode step
// takes max(FLOP time, weight+KV traffic time). Throws "exceeds memory
// capacity" (naming the maximal feasible batch) when the workload cannot
// be resident.
CostReport estimate_throughput(const ArchitectureConfig& config, const HardwareProfile& hw,
                               const Workload& wl);

}  // namespace archscale
