#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arch.hpp"

namespace archscale {

// One training run: the fitting unit. size_label is the nominal size
// bucket ("80M", "1B", ...); empty when the record is unlabeled.
struct RunRecord {
    ArchitectureConfig arch;
    std::string size_label;
    int64_t d_tokens = 0;
    double loss = 0.0;
    std::vector<std::string> tags;
};

void validate_record(const RunRecord& rec);

}  // namespace archscale
