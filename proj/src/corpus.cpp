#include "corpus.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace archscale {

namespace {

#include "corpus_table.inc"

// Named large-scale shapes. Head counts follow from the published
// (f_size, r, gqa, d_head) via the ratio definition; "Panda-3B-o" is the
// 3B shape derived from the 1B-only fit.
const CorpusEntry kModelTable[] = {
    {"LLaMA-3.2-1B", "", 16, 2048, 32, 8192, 0.066, 4.80, 64, 4, false},
    {"Panda-1B", "", 16, 2560, 72, 4096, 0.082, 1.07, 64, 4, false},
    {"Surefire-1B", "", 16, 2560, 36, 6144, 0.082, 3.60, 64, 9, false},
    {"LLaMA-3.2-3B", "", 28, 3072, 24, 8192, 0.058, 4.80, 128, 3, true},
    {"Panda-3B", "", 28, 4096, 36, 4096, 0.077, 1.00, 128, 3, false},
    {"Surefire-3B", "", 28, 4096, 42, 4096, 0.077, 1.00, 128, 7, false},
    {"Panda-3B-o", "", 28, 4096, 33, 4608, 0.076, 1.23, 128, 3, false},
};

void cross_check(const CorpusEntry& e) {
    auto m = derived_metrics(to_arch(e));
    std::ostringstream id;
    id << e.size_label << (e.variant.empty() ? "" : " " + e.variant);
    if (std::abs(m.x - e.printed_x) > 0.002) {
        std::ostringstream os;
        os << "corpus self-check failed for " << id.str() << ": derived x=" << m.x
           << " vs published " << e.printed_x;
        throw_numeric(os.str());
    }
    if (!e.r_check_excluded && std::abs(m.r - e.printed_r) > 0.02) {
        std::ostringstream os;
        os << "corpus self-check failed for " << id.str() << ": derived r=" << m.r
           << " vs published " << e.printed_r;
        throw_numeric(os.str());
    }
}

std::vector<CorpusEntry> checked(const CorpusEntry* begin, const CorpusEntry* end) {
    std::vector<CorpusEntry> out(begin, end);
    for (const auto& e : out) cross_check(e);
    return out;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries =
        checked(std::begin(kVariantTable), std::end(kVariantTable));
    return entries;
}

const std::vector<CorpusEntry>& model_corpus() {
    static const std::vector<CorpusEntry> entries =
        checked(std::begin(kModelTable), std::end(kModelTable));
    return entries;
}

ArchitectureConfig to_arch(const CorpusEntry& e) {
    ArchitectureConfig c;
    c.name = e.variant.empty() ? e.size_label : e.size_label + "/" + e.variant;
    c.n_layers = e.n_layers;
    c.d_model = e.d_model;
    c.n_head = e.n_head;
    c.d_head = e.d_head;
    c.gqa = e.gqa;
    c.f_size = e.f_size;
    return c;
}

ArchitectureConfig corpus_arch(const std::string& size_label, const std::string& variant) {
    if (!variant.empty()) {
        for (const auto& e : corpus()) {
            if (e.size_label == size_label && e.variant == variant) return to_arch(e);
        }
    } else {
        for (const auto& e : model_corpus()) {
            if (e.size_label == size_label) return to_arch(e);
        }
    }
    throw_validation("unknown corpus reference '" + size_label +
                     (variant.empty() ? "" : "/" + variant) + "'");
}

double nominal_params(const std::string& size_label) {
    if (size_label.empty()) throw_validation("empty size label");
    char suffix = size_label.back();
    double scale = 0.0;
    if (suffix == 'M' || suffix == 'm') scale = 1e6;
    if (suffix == 'B' || suffix == 'b') scale = 1e9;
    if (scale == 0.0) throw_validation("size label '" + size_label + "' must end in M or B");
    try {
        size_t pos = 0;
        double value = std::stod(size_label.substr(0, size_label.size() - 1), &pos);
        if (pos != size_label.size() - 1 || value <= 0.0) throw std::invalid_argument("");
        return value * scale;
    } catch (const std::exception&) {
        throw_validation("cannot parse size label '" + size_label + "'");
    }
}

}  // namespace archscale
