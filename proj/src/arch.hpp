#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace archscale {

// A decoder-only transformer shape. gqa is the number of query heads that
// share one key/value head, so n_head / gqa is the key/value head count.
struct ArchitectureConfig {
    std::string name;
    int64_t n_layers = 0;
    int64_t d_model = 0;
    int64_t n_head = 0;
    int64_t d_head = 0;
    int64_t gqa = 1;
    int64_t f_size = 0;

    int64_t d_q() const { return n_head * d_head; }
    int64_t d_kv() const { return gqa > 0 ? (n_head / gqa) * d_head : 0; }
};

// Non-embedding parameter counts. The attention term covers the query,
// key, value and output projections: 2*d*d_q accounts for Q and O,
// 2*d*d_kv for K and V. The MLP term covers up, gate and down matrices.
struct ParamBreakdown {
    int64_t attn_per_layer = 0;
    int64_t mlp_per_layer = 0;
    int64_t per_layer_total = 0;
    int64_t n_nonembed = 0;
};

// Normalized features used by the conditional scaling law.
//   x = d_model / sqrt(N_nonembed)
//   r = mlp params / attention params (per layer)
struct DerivedMetrics {
    double x = 0.0;
    double r = 0.0;
    int64_t d_q = 0;
    int64_t d_kv = 0;
    int64_t n_kv_heads = 0;
};

// Rounding quanta applied when realizing architectures from continuous
// targets. d_multiple <= 0 means "use d_head".
struct Snapping {
    int64_t d_multiple = 0;
    int64_t f_multiple = 64;
};

// A fixed-parameter-budget sweep: hold n_target, vary d_model and either
// the mlp-to-attention ratio or the intermediate size, over one or more
// gqa values. Exactly one of r_values / f_values must be non-empty.
struct ArchGridSpec {
    int64_t n_target = 0;
    double n_tolerance = 0.10;
    int64_t n_layers = 0;
    int64_t d_head = 0;
    std::vector<int64_t> gqa_values;
    std::vector<int64_t> d_model_values;
    std::vector<double> r_values;
    std::vector<int64_t> f_values;
    Snapping snapping;
};

// Returns a description per violated invariant; empty means valid.
std::vector<std::string> validate(const ArchitectureConfig& config);

// Throws a validation Error listing all violations when the config is bad.
void require_valid(const ArchitectureConfig& config);

ParamBreakdown count_params(const ArchitectureConfig& config);

DerivedMetrics derived_metrics(const ArchitectureConfig& config);

// Intermediate size that lands the per-layer budget n_target/n_layers after
// attention takes its share, snapped to f_multiple. Throws when attention
// alone exceeds the per-layer budget.
int64_t solve_intermediate_size(int64_t n_target, int64_t n_layers, int64_t d_model,
                                int64_t n_head, int64_t d_head, int64_t gqa,
                                int64_t f_multiple = 64);

// Head count hitting r_target at fixed (d_head, gqa, f_size), snapped to a
// multiple of gqa. Throws "infeasible head count" when the result would be
// smaller than gqa.
int64_t solve_n_head(double r_target, int64_t d_head, int64_t gqa, int64_t f_size);

// Ascending divisors of n_head: the gqa values that keep the key/value
// head count integral.
std::vector<int64_t> feasible_gqa(int64_t n_head);

void validate_grid(const ArchGridSpec& spec);

// All valid snapped configs within the relative parameter tolerance,
// deduplicated, sorted by (d_model, r). Pure function of the spec.
std::vector<ArchitectureConfig> enumerate_variants(const ArchGridSpec& spec);

}  // namespace archscale
