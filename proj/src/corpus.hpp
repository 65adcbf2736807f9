#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arch.hpp"

namespace archscale {

// One bundled architecture row. Variant rows carry the published
// d_model/sqrt(N) and mlp-to-attention values; both are cross-checked
// against the parameter formulas the first time the corpus is accessed.
struct CorpusEntry {
    std::string size_label;
    std::string variant;  // empty for the named large-scale models
    int64_t n_layers = 0;
    int64_t d_model = 0;
    int64_t n_head = 0;
    int64_t f_size = 0;
    double printed_x = 0.0;
    double printed_r = 0.0;
    int64_t d_head = 64;
    int64_t gqa = 4;
    // The published LLaMA-3.2-3B ratio uses a different attention-parameter
    // convention than every other row; its r cross-check is waived.
    bool r_check_excluded = false;
};

// Training-run variant families (80M/145M/297M/1B sweeps; GQA=4, d_head=64).
// The first access cross-checks every row (x within 0.002, r within 0.02)
// and throws naming the failing row.
const std::vector<CorpusEntry>& corpus();

// Named large-scale shapes (LLaMA-3.2 baselines, the loss-optimal and the
// Pareto models) with their published gqa and size-appropriate d_head.
const std::vector<CorpusEntry>& model_corpus();

ArchitectureConfig to_arch(const CorpusEntry& entry);

// Resolves "size_label/variant" (variant table) or a model name with an
// empty variant. Throws when nothing matches.
ArchitectureConfig corpus_arch(const std::string& size_label, const std::string& variant);

// Nominal parameter count for a size label such as "80M" or "1B".
double nominal_params(const std::string& size_label);

}  // namespace archscale
