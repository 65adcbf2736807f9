#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "corpus.hpp"
#include "error.hpp"

namespace archscale {

using nlohmann::json;

namespace {

constexpr int kLawFormatVersion = 1;

json parse_json(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw_validation(std::string(what) + ": malformed JSON");
    return j;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* what) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            throw_validation(std::string(what) + ": unknown key '" + key + "'");
        }
    }
}

int64_t require_int(const json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw_validation(std::string(what) + ": missing key '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw_validation(std::string(what) + ": '" + key + "' must be an integer");
    }
    return v.get<int64_t>();
}

double require_number(const json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw_validation(std::string(what) + ": missing key '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw_validation(std::string(what) + ": '" + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

ArchitectureConfig arch_from_json(const std::string& text) {
    json j = parse_json(text, "architecture");
    if (!j.is_object()) throw_validation("architecture: expected a JSON object");
    reject_unknown_keys(j, {"name", "n_layers", "d_model", "n_head", "d_head", "gqa", "f_size"},
                        "architecture");
    ArchitectureConfig c;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw_validation("architecture: 'name' must be a string");
        c.name = j.at("name").get<std::string>();
    }
    c.n_layers = require_int(j, "n_layers", "architecture");
    c.d_model = require_int(j, "d_model", "architecture");
    c.n_head = require_int(j, "n_head", "architecture");
    c.d_head = require_int(j, "d_head", "architecture");
    c.gqa = require_int(j, "gqa", "architecture");
    c.f_size = require_int(j, "f_size", "architecture");
    return c;
}

std::string arch_to_json(const ArchitectureConfig& c) {
    json j;
    j["name"] = c.name;
    j["n_layers"] = c.n_layers;
    j["d_model"] = c.d_model;
    j["n_head"] = c.n_head;
    j["d_head"] = c.d_head;
    j["gqa"] = c.gqa;
    j["f_size"] = c.f_size;
    return j.dump();
}

HardwareProfile hardware_from_json(const std::string& text) {
    json j = parse_json(text, "hardware");
    if (!j.is_object()) throw_validation("hardware: expected a JSON object");
    reject_unknown_keys(j, {"name", "peak_flops", "mem_bandwidth", "mem_capacity",
                            "bytes_per_weight", "bytes_per_kv"},
                        "hardware");
    HardwareProfile hw;
    if (j.contains("name")) hw.name = j.at("name").get<std::string>();
    hw.peak_flops = require_number(j, "peak_flops", "hardware");
    hw.mem_bandwidth = require_number(j, "mem_bandwidth", "hardware");
    hw.mem_capacity = require_number(j, "mem_capacity", "hardware");
    if (j.contains("bytes_per_weight")) hw.bytes_per_weight = require_int(j, "bytes_per_weight", "hardware");
    if (j.contains("bytes_per_kv")) hw.bytes_per_kv = require_int(j, "bytes_per_kv", "hardware");
    validate_hardware(hw);
    return hw;
}

std::string hardware_to_json(const HardwareProfile& hw) {
    json j;
    j["name"] = hw.name;
    j["peak_flops"] = hw.peak_flops;
    j["mem_bandwidth"] = hw.mem_bandwidth;
    j["mem_capacity"] = hw.mem_capacity;
    j["bytes_per_weight"] = hw.bytes_per_weight;
    j["bytes_per_kv"] = hw.bytes_per_kv;
    return j.dump();
}

ChinchillaParams chinchilla_from_json(const std::string& text) {
    json j = parse_json(text, "chinchilla");
    if (!j.is_object()) throw_validation("chinchilla: expected a JSON object");
    reject_unknown_keys(j, {"E", "A", "alpha", "B", "beta"}, "chinchilla");
    ChinchillaParams p;
    p.e = require_number(j, "E", "chinchilla");
    p.a = require_number(j, "A", "chinchilla");
    p.alpha = require_number(j, "alpha", "chinchilla");
    p.b = require_number(j, "B", "chinchilla");
    p.beta = require_number(j, "beta", "chinchilla");
    validate_params(p);
    return p;
}

std::string chinchilla_to_json(const ChinchillaParams& p) {
    json j;
    j["E"] = p.e;
    j["A"] = p.a;
    j["alpha"] = p.alpha;
    j["B"] = p.b;
    j["beta"] = p.beta;
    return j.dump();
}

ConditionalLaw law_from_json(const std::string& text) {
    json j = parse_json(text, "law");
    if (!j.is_object()) throw_validation("law: expected a JSON object");
    reject_unknown_keys(
        j, {"version", "form", "a0", "a1", "a2", "b0", "b1", "b2", "log_base", "fit_meta"},
        "law");
    if (j.contains("version")) {
        int64_t version = require_int(j, "version", "law");
        if (version > kLawFormatVersion) {
            throw_validation("law: format version " + std::to_string(version) +
                             " is newer than supported version " +
                             std::to_string(kLawFormatVersion));
        }
    }
    if (!j.contains("form")) throw_validation("law: missing key 'form'");
    if (j.contains("log_base") && j.at("log_base") != "natural") {
        throw_validation("law: only natural logarithms are supported");
    }

    ConditionalLaw law;
    law.form = law_form_from_string(j.at("form").get<std::string>());
    law.a0 = require_number(j, "a0", "law");
    law.a1 = require_number(j, "a1", "law");
    law.a2 = require_number(j, "a2", "law");
    auto optional_number = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key)) return std::nullopt;
        return require_number(j, key, "law");
    };
    law.b0 = optional_number("b0");
    law.b1 = optional_number("b1");
    law.b2 = optional_number("b2");
    if (j.contains("fit_meta")) law.fit_meta = j.at("fit_meta").dump();
    validate_law(law);
    return law;
}

std::string law_to_json(const ConditionalLaw& law) {
    validate_law(law);
    json j;
    j["version"] = kLawFormatVersion;
    j["form"] = to_string(law.form);
    j["a0"] = law.a0;
    j["a1"] = law.a1;
    j["a2"] = law.a2;
    if (law.b0) j["b0"] = *law.b0;
    if (law.b1) j["b1"] = *law.b1;
    if (law.b2) j["b2"] = *law.b2;
    j["log_base"] = "natural";
    if (!law.fit_meta.empty()) {
        json meta = json::parse(law.fit_meta, nullptr, false);
        if (!meta.is_discarded()) j["fit_meta"] = meta;
    }
    return j.dump();
}

ConditionalLaw load_law(const std::string& path) { return law_from_json(read_file(path)); }

void save_law(const ConditionalLaw& law, const std::string& path) {
    write_file(path, law_to_json(law) + "\n");
}

ArchGridSpec grid_from_json(const std::string& text) {
    json j = parse_json(text, "grid");
    if (!j.is_object()) throw_validation("grid: expected a JSON object");
    reject_unknown_keys(j,
                        {"n_target", "n_tolerance", "n_layers", "d_head", "gqa_values",
                         "d_model_values", "r_values", "f_values", "snapping"},
                        "grid");
    ArchGridSpec spec;
    spec.n_target = require_int(j, "n_target", "grid");
    if (j.contains("n_tolerance")) spec.n_tolerance = require_number(j, "n_tolerance", "grid");
    spec.n_layers = require_int(j, "n_layers", "grid");
    spec.d_head = require_int(j, "d_head", "grid");
    auto int_list = [&](const char* key) {
        std::vector<int64_t> out;
        if (!j.contains(key)) return out;
        if (!j.at(key).is_array()) throw_validation(std::string("grid: '") + key + "' must be an array");
        for (const auto& v : j.at(key)) out.push_back(v.get<int64_t>());
        return out;
    };
    spec.gqa_values = int_list("gqa_values");
    spec.d_model_values = int_list("d_model_values");
    if (j.contains("r_values")) {
        for (const auto& v : j.at("r_values")) spec.r_values.push_back(v.get<double>());
    }
    spec.f_values = int_list("f_values");
    if (j.contains("snapping")) {
        const auto& s = j.at("snapping");
        reject_unknown_keys(s, {"d_multiple", "f_multiple"}, "grid snapping");
        if (s.contains("d_multiple")) spec.snapping.d_multiple = s.at("d_multiple").get<int64_t>();
        if (s.contains("f_multiple")) spec.snapping.f_multiple = s.at("f_multiple").get<int64_t>();
    }
    validate_grid(spec);
    return spec;
}

std::string grid_to_json(const ArchGridSpec& spec) {
    json j;
    j["n_target"] = spec.n_target;
    j["n_tolerance"] = spec.n_tolerance;
    j["n_layers"] = spec.n_layers;
    j["d_head"] = spec.d_head;
    j["gqa_values"] = spec.gqa_values;
    j["d_model_values"] = spec.d_model_values;
    if (!spec.r_values.empty()) j["r_values"] = spec.r_values;
    if (!spec.f_values.empty()) j["f_values"] = spec.f_values;
    j["snapping"] = {{"d_multiple", spec.snapping.d_multiple},
                     {"f_multiple", spec.snapping.f_multiple}};
    return j.dump();
}

namespace {

const char* kRunsHeader =
    "size_label,variant,n_layers,d_model,n_head,d_head,gqa,f_size,d_tokens,loss";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(field);
    for (auto& f : fields) {
        size_t a = f.find_first_not_of(" \t");
        size_t b = f.find_last_not_of(" \t");
        f = (a == std::string::npos) ? "" : f.substr(a, b - a + 1);
    }
    return fields;
}

[[noreturn]] void row_error(size_t row, const std::string& field, const std::string& msg) {
    std::ostringstream os;
    os << "row " << row << ", field '" << field << "': " << msg;
    throw_validation(os.str());
}

int64_t parse_int_field(const std::string& s, size_t row, const char* field) {
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        row_error(row, field, "expected an integer, got '" + s + "'");
    }
}

double parse_double_field(const std::string& s, size_t row, const char* field) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        row_error(row, field, "expected a number, got '" + s + "'");
    }
}

// d_tokens accepts scientific notation ("8e9") but must be integral.
int64_t parse_tokens_field(const std::string& s, size_t row, const char* field) {
    double v = parse_double_field(s, row, field);
    if (!(v > 0.0) || v != std::floor(v) || v > 9.2e18) {
        row_error(row, field, "expected a positive integral token count, got '" + s + "'");
    }
    return static_cast<int64_t>(v);
}

void finalize_records(LoadedRuns& out) {
    std::map<std::tuple<int64_t, int64_t, int64_t, int64_t, int64_t, int64_t, int64_t>, size_t>
        seen;
    for (const auto& rec : out.records) {
        const auto& a = rec.arch;
        auto key = std::make_tuple(a.n_layers, a.d_model, a.n_head, a.d_head, a.gqa, a.f_size,
                                   rec.d_tokens);
        if (++seen[key] == 2) ++out.duplicate_count;
    }
    if (out.duplicate_count > 0) {
        out.warnings.push_back(std::to_string(out.duplicate_count) +
                               " repeated (architecture, D) rows kept as separate runs");
    }
}

}  // namespace

LoadedRuns parse_runs_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw_validation("runs csv: empty file");
    {
        auto header = split_csv_line(line);
        auto expected = split_csv_line(kRunsHeader);
        if (header != expected) {
            throw_validation(std::string("runs csv: header must be exactly '") + kRunsHeader +
                             "'");
        }
    }

    LoadedRuns out;
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 10) {
            row_error(row, "row", "expected 10 columns, got " + std::to_string(f.size()));
        }
        const std::string& size_label = f[0];
        const std::string& variant = f[1];
        bool any_arch_col = false, all_arch_cols = true;
        for (size_t i = 2; i <= 7; ++i) {
            if (f[i].empty()) all_arch_cols = false;
            else any_arch_col = true;
        }

        RunRecord rec;
        rec.size_label = size_label;
        if (all_arch_cols) {
            rec.arch.name = size_label.empty() ? "" : size_label + (variant.empty() ? "" : "/" + variant);
            rec.arch.n_layers = parse_int_field(f[2], row, "n_layers");
            rec.arch.d_model = parse_int_field(f[3], row, "d_model");
            rec.arch.n_head = parse_int_field(f[4], row, "n_head");
            rec.arch.d_head = parse_int_field(f[5], row, "d_head");
            rec.arch.gqa = parse_int_field(f[6], row, "gqa");
            rec.arch.f_size = parse_int_field(f[7], row, "f_size");
        } else {
            if (size_label.empty()) {
                row_error(row, "size_label",
                          "required when architecture columns are not fully inline");
            }
            ArchitectureConfig base;
            try {
                base = corpus_arch(size_label, variant);
            } catch (const Error& e) {
                row_error(row, "variant", e.what());
            }
            rec.arch = base;
            if (any_arch_col) {  // partial inline columns override the corpus values
                if (!f[2].empty()) rec.arch.n_layers = parse_int_field(f[2], row, "n_layers");
                if (!f[3].empty()) rec.arch.d_model = parse_int_field(f[3], row, "d_model");
                if (!f[4].empty()) rec.arch.n_head = parse_int_field(f[4], row, "n_head");
                if (!f[5].empty()) rec.arch.d_head = parse_int_field(f[5], row, "d_head");
                if (!f[6].empty()) rec.arch.gqa = parse_int_field(f[6], row, "gqa");
                if (!f[7].empty()) rec.arch.f_size = parse_int_field(f[7], row, "f_size");
            }
        }
        if (f[8].empty()) row_error(row, "d_tokens", "required");
        if (f[9].empty()) row_error(row, "loss", "required");
        rec.d_tokens = parse_tokens_field(f[8], row, "d_tokens");
        rec.loss = parse_double_field(f[9], row, "loss");
        try {
            validate_record(rec);
        } catch (const Error& e) {
            row_error(row, "row", e.what());
        }
        out.records.push_back(std::move(rec));
    }
    finalize_records(out);
    return out;
}

LoadedRuns parse_runs_json(const std::string& text) {
    json j = parse_json(text, "runs json");
    if (!j.is_array()) throw_validation("runs json: expected an array of records");
    LoadedRuns out;
    size_t row = 0;
    for (const auto& item : j) {
        ++row;
        if (!item.is_object()) row_error(row, "record", "expected an object");
        reject_unknown_keys(item, {"size_label", "variant", "arch", "d_tokens", "loss", "tags"},
                            "runs json");
        RunRecord rec;
        if (item.contains("size_label")) rec.size_label = item.at("size_label").get<std::string>();
        std::string variant;
        if (item.contains("variant")) variant = item.at("variant").get<std::string>();
        if (item.contains("arch")) {
            rec.arch = arch_from_json(item.at("arch").dump());
        } else {
            if (rec.size_label.empty()) {
                row_error(row, "arch", "either 'arch' or a corpus reference is required");
            }
            try {
                rec.arch = corpus_arch(rec.size_label, variant);
            } catch (const Error& e) {
                row_error(row, "variant", e.what());
            }
        }
        if (!item.contains("d_tokens")) row_error(row, "d_tokens", "required");
        if (!item.contains("loss")) row_error(row, "loss", "required");
        double dt = item.at("d_tokens").get<double>();
        if (!(dt > 0.0) || dt != std::floor(dt)) row_error(row, "d_tokens", "must be a positive integer");
        rec.d_tokens = static_cast<int64_t>(dt);
        rec.loss = item.at("loss").get<double>();
        if (item.contains("tags")) {
            for (const auto& t : item.at("tags")) rec.tags.push_back(t.get<std::string>());
        }
        try {
            validate_record(rec);
        } catch (const Error& e) {
            row_error(row, "record", e.what());
        }
        out.records.push_back(std::move(rec));
    }
    finalize_records(out);
    return out;
}

LoadedRuns load_runs(const std::string& path, const std::string& format) {
    std::string text = read_file(path);
    if (format == "csv") return parse_runs_csv(text);
    if (format == "json") return parse_runs_json(text);
    throw_validation("load_runs: format must be 'csv' or 'json'");
}

std::string runs_to_csv(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << kRunsHeader << "\n";
    for (const auto& rec : records) {
        const auto& a = rec.arch;
        std::string variant;
        auto slash = rec.arch.name.find('/');
        if (slash != std::string::npos) variant = rec.arch.name.substr(slash + 1);
        os << rec.size_label << "," << variant << "," << a.n_layers << "," << a.d_model << ","
           << a.n_head << "," << a.d_head << "," << a.gqa << "," << a.f_size << ","
           << rec.d_tokens << "," << std::setprecision(12) << rec.loss << "\n";
    }
    return os.str();
}

std::string candidates_to_csv(const std::vector<CandidateEvaluation>& candidates) {
    std::ostringstream os;
    os << "name,d_model,n_head,gqa,f_size,x,r,predicted_loss,tokens_per_second,feasible,pareto\n";
    os << std::setprecision(10);
    for (const auto& c : candidates) {
        os << c.arch.name << "," << c.arch.d_model << "," << c.arch.n_head << "," << c.arch.gqa
           << "," << c.arch.f_size << "," << c.x << "," << c.r << "," << c.predicted_loss << ","
           << c.modeled_throughput << "," << (c.feasible ? "true" : "false") << ","
           << (c.dominated ? "false" : "true") << "\n";
    }
    return os.str();
}

std::string corpus_to_csv() {
    std::ostringstream os;
    os << "size_label,variant,n_layers,d_model,n_head,d_head,gqa,f_size,published_x,published_r\n";
    auto emit = [&](const CorpusEntry& e) {
        os << e.size_label << "," << e.variant << "," << e.n_layers << "," << e.d_model << ","
           << e.n_head << "," << e.d_head << "," << e.gqa << "," << e.f_size << "," << e.printed_x
           << "," << e.printed_r << "\n";
    };
    for (const auto& e : corpus()) emit(e);
    for (const auto& e : model_corpus()) emit(e);
    return os.str();
}

std::vector<RunRecord> synthetic_runs(const ConditionalLaw& law, const RefLossSource& ref,
                                      const std::vector<std::string>& size_labels,
                                      double noise_sigma, uint64_t seed) {
    if (noise_sigma < 0.0) throw_validation("synthetic_runs: noise sigma must be >= 0");
    if (size_labels.empty()) throw_validation("synthetic_runs: no size labels");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<RunRecord> out;
    for (const auto& label : size_labels) {
        // trained on 100x the nominal parameter count, shared per family
        int64_t d_tokens = static_cast<int64_t>(std::llround(100.0 * nominal_params(label)));
        bool found = false;
        for (const auto& e : corpus()) {
            if (e.size_label != label) continue;
            found = true;
            RunRecord rec;
            rec.arch = to_arch(e);
            rec.size_label = label;
            rec.d_tokens = d_tokens;
            auto m = derived_metrics(rec.arch);
            double n = static_cast<double>(count_params(rec.arch).n_nonembed);
            double l_opt = ref_loss(ref, n, d_tokens);
            rec.loss = conditional_loss(law, m.x, m.r, l_opt);
            if (noise_sigma > 0.0) rec.loss += noise_sigma * noise(rng);
            rec.tags = {"synthetic"};
            out.push_back(std::move(rec));
        }
        if (!found) throw_validation("synthetic_runs: no corpus entries for size '" + label + "'");
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_validation("cannot open file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_validation("cannot write file '" + path + "'");
    out << content;
    if (!out) throw_validation("write failed for '" + path + "'");
}

}  // namespace archscale
