#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arch.hpp"
#include "cost.hpp"
#include "laws.hpp"
#include "run.hpp"
#include "search.hpp"

namespace archscale {

// Architecture JSON object with exactly the keys
// {"name","n_layers","d_model","n_head","d_head","gqa","f_size"};
// unknown keys are rejected, "name" may be omitted.
ArchitectureConfig arch_from_json(const std::string& text);
std::string arch_to_json(const ArchitectureConfig& config);

// {"name","peak_flops","mem_bandwidth","mem_capacity",
//  "bytes_per_weight","bytes_per_kv"}; the byte fields default to 2.
HardwareProfile hardware_from_json(const std::string& text);
std::string hardware_to_json(const HardwareProfile& hw);

// {"E","A","alpha","B","beta"}
ChinchillaParams chinchilla_from_json(const std::string& text);
std::string chinchilla_to_json(const ChinchillaParams& params);

// Law files carry a format version and the log convention; loading rejects
// newer versions, unknown forms, and coefficients absent for the form.
ConditionalLaw law_from_json(const std::string& text);
std::string law_to_json(const ConditionalLaw& law);
ConditionalLaw load_law(const std::string& path);
void save_law(const ConditionalLaw& law, const std::string& path);

// Grid spec for enumerate/optimize:
// {"n_target","n_tolerance","n_layers","d_head","gqa_values",
//  "d_model_values","r_values"|"f_values","snapping":{"d_multiple","f_multiple"}}
ArchGridSpec grid_from_json(const std::string& text);
std::string grid_to_json(const ArchGridSpec& spec);

struct LoadedRuns {
    std::vector<RunRecord> records;
    size_t duplicate_count = 0;  // repeated (architecture, D) rows, all kept
    std::vector<std::string> warnings;
};

// CSV header (exact): size_label,variant,n_layers,d_model,n_head,d_head,
// gqa,f_size,d_tokens,loss. Inline columns override the corpus lookup;
// rows with empty architecture columns must name a corpus entry.
LoadedRuns parse_runs_csv(const std::string& text);
// JSON: array of {"size_label","variant","arch",{...},"d_tokens","loss","tags"}.
LoadedRuns parse_runs_json(const std::string& text);
LoadedRuns load_runs(const std::string& path, const std::string& format);
std::string runs_to_csv(const std::vector<RunRecord>& records);

// CSV views of search results and the bundled corpus.
std::string candidates_to_csv(const std::vector<CandidateEvaluation>& candidates);
std::string corpus_to_csv();

// Synthetic demo losses over the bundled variant families: the law
// evaluated against the reference plus Gaussian noise. Clearly synthetic;
// the repository bundles no measured losses.
std::vector<RunRecord> synthetic_runs(const ConditionalLaw& law, const RefLossSource& ref,
                                      const std::vector<std::string>& size_labels,
                                      double noise_sigma, uint64_t seed);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace archscale
