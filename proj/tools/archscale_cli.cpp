// archscale command line tool. Talks to the library exclusively through
// the C API in archscale.h; everything here is argument plumbing and
// output formatting.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "archscale.h"

using nlohmann::json;

namespace {

[[noreturn]] void die(archscale_status status) {
    std::cerr << "error: " << archscale_last_error() << "\n";
    std::exit(static_cast<int>(status));
}

void check(archscale_status status) {
    if (status != ARCHSCALE_OK) die(status);
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    archscale_string_free(s);
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open file '" << path << "'\n";
        std::exit(2);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool looks_inline_json(const std::string& s) {
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        return c == '{' || c == '[';
    }
    return false;
}

std::string file_or_inline(const std::string& arg) {
    return looks_inline_json(arg) ? arg : read_text_file(arg);
}

archscale_arch* load_arch(const std::string& arg) {
    archscale_arch* arch = nullptr;
    check(archscale_arch_from_json(file_or_inline(arg).c_str(), &arch));
    char* violations = nullptr;
    check(archscale_arch_violations(arch, &violations));
    json v = json::parse(take_string(violations));
    if (!v.empty()) {
        std::cerr << "error: invalid architecture:";
        for (const auto& item : v) std::cerr << " " << item.get<std::string>() << ";";
        std::cerr << "\n";
        std::exit(2);
    }
    return arch;
}

archscale_law* load_law_arg(const std::string& arg) {
    archscale_law* law = nullptr;
    if (arg == "task3" || arg == "1b-only") {
        check(archscale_law_builtin(arg.c_str(), &law));
    } else if (looks_inline_json(arg)) {
        check(archscale_law_from_json(arg.c_str(), &law));
    } else {
        check(archscale_law_load(arg.c_str(), &law));
    }
    return law;
}

archscale_hardware* load_hardware_arg(const std::string& arg) {
    archscale_hardware* hw = nullptr;
    if (arg.empty() || arg == "a100-40g") {
        check(archscale_hardware_a100_40g(&hw));
    } else {
        check(archscale_hardware_from_json(file_or_inline(arg).c_str(), &hw));
    }
    return hw;
}

archscale_runs* load_runs_arg(const std::string& path, const std::string& format) {
    archscale_runs* runs = nullptr;
    check(archscale_runs_load(path.c_str(), format.c_str(), &runs));
    return runs;
}

// --ref forms: "empirical" (derived from --data), "empirical:<runs.csv>",
// "chinchilla:<params.json or inline>"
archscale_ref* load_ref_arg(const std::string& spec, archscale_runs* data_runs) {
    archscale_ref* ref = nullptr;
    if (spec == "empirical") {
        if (!data_runs) {
            std::cerr << "error: --ref empirical needs --data (or use empirical:<file>)\n";
            std::exit(2);
        }
        check(archscale_ref_empirical_from_runs(data_runs, &ref));
        return ref;
    }
    if (spec.rfind("empirical:", 0) == 0) {
        archscale_runs* runs = load_runs_arg(spec.substr(10), "csv");
        check(archscale_ref_empirical_from_runs(runs, &ref));
        archscale_runs_free(runs);
        return ref;
    }
    if (spec.rfind("chinchilla:", 0) == 0) {
        std::string payload = file_or_inline(spec.substr(11));
        check(archscale_ref_chinchilla_from_json(payload.c_str(), &ref));
        return ref;
    }
    std::cerr << "error: --ref must be 'empirical', 'empirical:<runs>', or 'chinchilla:<json>'\n";
    std::exit(2);
}

enum class Output { table, csv, json_fmt };

Output parse_output(const std::string& s) {
    if (s == "table") return Output::table;
    if (s == "csv") return Output::csv;
    if (s == "json") return Output::json_fmt;
    std::cerr << "error: --output must be table, csv or json\n";
    std::exit(2);
}

void add_output_flag(CLI::App* cmd, std::string* out) {
    cmd->add_option("--output", *out, "Output format: table, csv or json")
        ->default_val("table")
        ->check(CLI::IsMember({"table", "csv", "json"}));
}

// key/value result printing in the three formats
void print_kv(const json& j, Output fmt) {
    switch (fmt) {
        case Output::json_fmt:
            std::cout << j.dump(2) << "\n";
            return;
        case Output::csv: {
            std::string keys, values;
            for (const auto& [k, v] : j.items()) {
                if (!keys.empty()) {
                    keys += ",";
                    values += ",";
                }
                keys += k;
                values += v.is_string() ? v.get<std::string>() : v.dump();
            }
            std::cout << keys << "\n" << values << "\n";
            return;
        }
        case Output::table:
            for (const auto& [k, v] : j.items()) {
                std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump())
                          << "\n";
            }
            return;
    }
}

void print_csv_as(const std::string& csv, Output fmt) {
    if (fmt == Output::csv) {
        std::cout << csv;
        return;
    }
    std::istringstream in(csv);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) row.push_back(field);
        rows.push_back(row);
    }
    if (rows.empty()) return;
    if (fmt == Output::json_fmt) {
        json out = json::array();
        for (size_t i = 1; i < rows.size(); ++i) {
            json obj;
            for (size_t c = 0; c < rows[0].size() && c < rows[i].size(); ++c) {
                obj[rows[0][c]] = rows[i][c];
            }
            out.push_back(obj);
        }
        std::cout << out.dump(2) << "\n";
        return;
    }
    std::vector<size_t> widths(rows[0].size(), 0);
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size() && c < widths.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size() && c < widths.size(); ++c) {
            std::cout << row[c] << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        std::cout << "\n";
    }
}

json parse_gqa_evals_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    json evals = json::object();
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        if (row == 1 && line.rfind("gqa", 0) == 0) continue;  // optional header
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            std::cerr << "error: evals row " << row << ": expected 'gqa,loss'\n";
            std::exit(2);
        }
        std::string g = line.substr(0, comma);
        std::string l = line.substr(comma + 1);
        try {
            evals[std::to_string(std::stoll(g))] = std::stod(l);
        } catch (const std::exception&) {
            std::cerr << "error: evals row " << row << ": cannot parse '" << line << "'\n";
            std::exit(2);
        }
    }
    return evals;
}

std::vector<int64_t> parse_int_list(const std::string& s, const char* what) {
    std::vector<int64_t> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stoll(tok));
        } catch (const std::exception&) {
            std::cerr << "error: cannot parse " << what << " entry '" << tok << "'\n";
            std::exit(2);
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            std::cerr << "error: cannot parse " << what << " entry '" << tok << "'\n";
            std::exit(2);
        }
    }
    return out;
}

json arch_info_json(archscale_arch* arch, int64_t t_context, int64_t bytes_per_kv) {
    int64_t attn = 0, mlp = 0, per_layer = 0, n = 0;
    check(archscale_arch_params(arch, &attn, &mlp, &per_layer, &n));
    double x = 0, r = 0;
    int64_t d_q = 0, d_kv = 0, n_kv = 0;
    check(archscale_arch_metrics(arch, &x, &r, &d_q, &d_kv, &n_kv));
    double decode_flops = 0, kv_bytes = 0;
    check(archscale_decode_flops_per_token(arch, t_context, &decode_flops));
    check(archscale_kv_cache_bytes(arch, t_context, 1, bytes_per_kv, &kv_bytes));
    char* arch_json_str = nullptr;
    check(archscale_arch_to_json(arch, &arch_json_str));
    json j;
    j["architecture"] = json::parse(take_string(arch_json_str));
    j["n_nonembed"] = n;
    j["attn_params_per_layer"] = attn;
    j["mlp_params_per_layer"] = mlp;
    j["x"] = x;
    j["r"] = r;
    j["d_q"] = d_q;
    j["d_kv"] = d_kv;
    j["n_kv_heads"] = n_kv;
    j["t_context"] = t_context;
    j["decode_flops_per_token"] = decode_flops;
    j["kv_cache_bytes_per_sequence"] = kv_bytes;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"architecture-aware scaling laws for transformer LMs"};
    app.require_subcommand(1);

    // ---- arch ----
    auto* arch_cmd = app.add_subcommand("arch", "Architecture inspection and enumeration");
    arch_cmd->require_subcommand(1);

    auto* info = arch_cmd->add_subcommand("info", "Parameters, features and per-token costs");
    std::string info_config, info_output;
    int64_t info_t_context = 4096, info_bytes_per_kv = 2;
    info->add_option("--config", info_config, "Architecture JSON (file or inline)")->required();
    info->add_option("--t-context", info_t_context, "Context length for FLOPs/KV figures");
    info->add_option("--bytes-per-kv", info_bytes_per_kv, "Bytes per cached KV element");
    add_output_flag(info, &info_output);

    auto* enumerate = arch_cmd->add_subcommand("enumerate", "Fixed-budget variant sweep");
    std::string en_gqa, en_d_values, en_r_values, en_f_values, en_output;
    int64_t en_n_target = 0, en_layers = 0, en_d_head = 0, en_d_multiple = 0, en_f_multiple = 64;
    double en_tolerance = 0.10;
    enumerate->add_option("--n-target", en_n_target, "Non-embedding parameter budget")->required();
    enumerate->add_option("--layers", en_layers, "Layer count")->required();
    enumerate->add_option("--d-head", en_d_head, "Per-head dimension")->required();
    enumerate->add_option("--gqa", en_gqa, "Comma-separated gqa values")->required();
    enumerate->add_option("--d-values", en_d_values, "Comma-separated hidden sizes")->required();
    enumerate->add_option("--r-values", en_r_values, "Comma-separated mlp/attn ratios");
    enumerate->add_option("--f-values", en_f_values, "Comma-separated intermediate sizes");
    enumerate->add_option("--tolerance", en_tolerance, "Relative budget tolerance");
    enumerate->add_option("--d-multiple", en_d_multiple, "Hidden-size snap quantum");
    enumerate->add_option("--f-multiple", en_f_multiple, "Intermediate-size snap quantum");
    add_output_flag(enumerate, &en_output);

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "Fit a conditional scaling law to run records");
    std::string fit_data, fit_format = "csv", fit_form, fit_ref = "empirical", fit_holdout,
                fit_out, fit_output;
    double fit_r_min = 0.5, fit_r_max = 5.0;
    fit->add_option("--data", fit_data, "Run records file")->required();
    fit->add_option("--format", fit_format, "Data format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    fit->add_option("--form", fit_form, "multiplicative, additive or joint")
        ->required()
        ->check(CLI::IsMember({"multiplicative", "additive", "joint"}));
    fit->add_option("--ref", fit_ref, "empirical | empirical:<runs> | chinchilla:<json>");
    fit->add_option("--r-min", fit_r_min, "Lower mlp/attn outlier cut");
    fit->add_option("--r-max", fit_r_max, "Upper mlp/attn outlier cut");
    fit->add_option("--holdout", fit_holdout, "Held-out run records for MSE/Spearman");
    fit->add_option("--out", fit_out, "Where to write the fitted law JSON")->required();
    add_output_flag(fit, &fit_output);

    // ---- predict ----
    auto* predict = app.add_subcommand("predict", "Predicted loss for one architecture");
    std::string pr_law, pr_config, pr_ref, pr_output;
    int64_t pr_d_tokens = 0;
    predict->add_option("--law", pr_law, "Law JSON (file/inline) or task3|1b-only")->required();
    predict->add_option("--config", pr_config, "Architecture JSON")->required();
    predict->add_option("--ref", pr_ref, "empirical:<runs> | chinchilla:<json>")->required();
    predict->add_option("--d-tokens", pr_d_tokens, "Training tokens")->required();
    add_output_flag(predict, &pr_output);

    // ---- optimum ----
    auto* optimum = app.add_subcommand("optimum", "Closed-form optimal architecture");
    std::string op_law, op_output;
    int64_t op_n_target = 0, op_layers = 0, op_d_head = 0, op_gqa = 4, op_d_multiple = 0,
            op_f_multiple = 64;
    optimum->add_option("--law", op_law, "Law JSON (file/inline) or task3|1b-only")->required();
    optimum->add_option("--n-target", op_n_target, "Non-embedding parameter budget")->required();
    optimum->add_option("--layers", op_layers, "Layer count")->required();
    optimum->add_option("--d-head", op_d_head, "Per-head dimension")->required();
    optimum->add_option("--gqa", op_gqa, "Query heads per KV head");
    optimum->add_option("--d-multiple", op_d_multiple,
                        "Hidden-size snap quantum (default: d_head; published shapes use 512)");
    optimum->add_option("--f-multiple", op_f_multiple, "Intermediate-size snap quantum");
    add_output_flag(optimum, &op_output);

    // ---- optimize ----
    auto* optimize = app.add_subcommand(
        "optimize", "Constrained search: max modeled throughput under a loss budget");
    std::string oz_law, oz_ref, oz_budget, oz_hardware = "a100-40g", oz_grid, oz_evals,
                oz_csv_out, oz_output;
    int64_t oz_n_target = 0, oz_d_tokens = 0, oz_batch = 64, oz_t_in = 4096, oz_t_out = 1024,
            oz_baseline_gqa = 4;
    double oz_epsilon = 0.002;
    optimize->add_option("--law", oz_law, "Law JSON (file/inline) or task3|1b-only")->required();
    optimize->add_option("--ref", oz_ref, "empirical:<runs> | chinchilla:<json>")->required();
    optimize->add_option("--n-target", oz_n_target, "Non-embedding parameter budget")->required();
    optimize->add_option("--d-tokens", oz_d_tokens, "Training tokens")->required();
    optimize->add_option("--loss-budget", oz_budget, "Number, 'optimal' or 'unconstrained'")
        ->required();
    optimize->add_option("--hardware", oz_hardware, "Hardware JSON or 'a100-40g'");
    optimize->add_option("--batch", oz_batch, "Batch size");
    optimize->add_option("--input-tokens", oz_t_in, "Prompt tokens per sequence");
    optimize->add_option("--output-tokens", oz_t_out, "Generated tokens per sequence");
    optimize->add_option("--grid", oz_grid, "Grid spec JSON (file or inline)")->required();
    optimize->add_option("--gqa-evals", oz_evals, "CSV of gqa,loss enabling the gqa step");
    optimize->add_option("--epsilon", oz_epsilon, "Loss tolerance for the gqa step");
    optimize->add_option("--baseline-gqa", oz_baseline_gqa, "Baseline gqa");
    optimize->add_option("--csv-out", oz_csv_out, "Write the candidate CSV to a file");
    add_output_flag(optimize, &oz_output);

    // ---- gqa-search ----
    auto* gqa = app.add_subcommand("gqa-search", "Local gqa search with early stopping");
    std::string gq_config, gq_evals, gq_hardware = "a100-40g", gq_output;
    int64_t gq_baseline = 4, gq_batch = 64, gq_t_in = 4096, gq_t_out = 1024;
    double gq_epsilon = 0.002;
    gqa->add_option("--config", gq_config, "Base architecture JSON")->required();
    gqa->add_option("--evals", gq_evals, "CSV of gqa,loss measurements")->required();
    gqa->add_option("--epsilon", gq_epsilon, "Acceptable loss increase over the baseline");
    gqa->add_option("--baseline-gqa", gq_baseline, "Baseline gqa");
    gqa->add_option("--hardware", gq_hardware, "Hardware JSON or 'a100-40g'");
    gqa->add_option("--batch", gq_batch, "Batch size");
    gqa->add_option("--input-tokens", gq_t_in, "Prompt tokens per sequence");
    gqa->add_option("--output-tokens", gq_t_out, "Generated tokens per sequence");
    add_output_flag(gqa, &gq_output);

    // ---- throughput ----
    auto* tput = app.add_subcommand("throughput", "Roofline throughput estimate");
    std::string tp_config, tp_hardware = "a100-40g", tp_output;
    int64_t tp_batch = 64, tp_t_in = 4096, tp_t_out = 1024;
    tput->add_option("--config", tp_config, "Architecture JSON")->required();
    tput->add_option("--hardware", tp_hardware, "Hardware JSON or 'a100-40g'");
    tput->add_option("--batch", tp_batch, "Batch size");
    tput->add_option("--input-tokens", tp_t_in, "Prompt tokens per sequence");
    tput->add_option("--output-tokens", tp_t_out, "Generated tokens per sequence");
    add_output_flag(tput, &tp_output);

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "MSE and Spearman of a law on run records");
    std::string ev_law, ev_data, ev_format = "csv", ev_ref = "empirical", ev_output;
    eval->add_option("--law", ev_law, "Law JSON (file/inline) or task3|1b-only")->required();
    eval->add_option("--data", ev_data, "Run records file")->required();
    eval->add_option("--format", ev_format, "Data format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    eval->add_option("--ref", ev_ref, "empirical | empirical:<runs> | chinchilla:<json>");
    add_output_flag(eval, &ev_output);

    // ---- corpus ----
    auto* corpus_cmd = app.add_subcommand("corpus", "Bundled architecture tables");
    std::string co_size, co_output;
    corpus_cmd->add_option("--size", co_size, "Filter by size label (e.g. 80M)");
    add_output_flag(corpus_cmd, &co_output);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Synthetic run records over the bundled corpus");
    std::string sy_law = "task3", sy_ref, sy_sizes = "80M,145M,297M", sy_out;
    double sy_sigma = 0.002;
    uint64_t sy_seed = 7;
    synth->add_option("--law", sy_law, "Generator law (file/inline or task3|1b-only)");
    synth->add_option("--ref", sy_ref, "chinchilla:<json> | empirical:<runs>")->required();
    synth->add_option("--sizes", sy_sizes, "Comma-separated size labels");
    synth->add_option("--sigma", sy_sigma, "Gaussian noise level (nats)");
    synth->add_option("--seed", sy_seed, "RNG seed");
    synth->add_option("--out", sy_out, "Output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad flags are validation failures
    }

    if (info->parsed()) {
        archscale_arch* arch = load_arch(info_config);
        print_kv(arch_info_json(arch, info_t_context, info_bytes_per_kv),
                 parse_output(info_output));
        archscale_arch_free(arch);
        return 0;
    }

    if (enumerate->parsed()) {
        json grid;
        grid["n_target"] = en_n_target;
        grid["n_tolerance"] = en_tolerance;
        grid["n_layers"] = en_layers;
        grid["d_head"] = en_d_head;
        grid["gqa_values"] = parse_int_list(en_gqa, "--gqa");
        grid["d_model_values"] = parse_int_list(en_d_values, "--d-values");
        if (!en_r_values.empty()) grid["r_values"] = parse_double_list(en_r_values, "--r-values");
        if (!en_f_values.empty()) grid["f_values"] = parse_int_list(en_f_values, "--f-values");
        grid["snapping"] = {{"d_multiple", en_d_multiple}, {"f_multiple", en_f_multiple}};
        char* csv = nullptr;
        check(archscale_enumerate_variants(grid.dump().c_str(), &csv));
        print_csv_as(take_string(csv), parse_output(en_output));
        return 0;
    }

    if (fit->parsed()) {
        archscale_runs* runs = load_runs_arg(fit_data, fit_format);
        archscale_ref* ref = load_ref_arg(fit_ref, runs);
        json options = {{"r_min", fit_r_min}, {"r_max", fit_r_max}};
        archscale_law* law = nullptr;
        char* report_str = nullptr;
        check(archscale_fit_conditional_law(runs, fit_form.c_str(), ref,
                                            options.dump().c_str(), &law, &report_str));
        json report = json::parse(take_string(report_str));
        check(archscale_law_save(law, fit_out.c_str()));
        report["law_file"] = fit_out;
        if (!fit_holdout.empty()) {
            archscale_runs* holdout = load_runs_arg(fit_holdout, fit_format);
            char* metrics_str = nullptr;
            check(archscale_eval_law(law, holdout, ref, &metrics_str));
            json metrics = json::parse(take_string(metrics_str));
            report["holdout_mse"] = metrics["mse"];
            report["holdout_spearman"] = metrics["spearman"];
            report["holdout_n"] = metrics["n"];
            archscale_runs_free(holdout);
        }
        print_kv(report, parse_output(fit_output));
        archscale_law_free(law);
        archscale_ref_free(ref);
        archscale_runs_free(runs);
        return 0;
    }

    if (predict->parsed()) {
        archscale_law* law = load_law_arg(pr_law);
        archscale_arch* arch = load_arch(pr_config);
        archscale_ref* ref = load_ref_arg(pr_ref, nullptr);
        double x = 0, r = 0;
        check(archscale_arch_metrics(arch, &x, &r, nullptr, nullptr, nullptr));
        int64_t n = 0;
        check(archscale_arch_params(arch, nullptr, nullptr, nullptr, &n));
        double l_opt = 0, predicted = 0;
        check(archscale_ref_loss(ref, static_cast<double>(n), pr_d_tokens, &l_opt));
        check(archscale_conditional_loss(law, x, r, l_opt, &predicted));
        print_kv(json{{"x", x},
                      {"r", r},
                      {"n_nonembed", n},
                      {"d_tokens", pr_d_tokens},
                      {"l_opt", l_opt},
                      {"predicted_loss", predicted}},
                 parse_output(pr_output));
        archscale_ref_free(ref);
        archscale_arch_free(arch);
        archscale_law_free(law);
        return 0;
    }

    if (optimum->parsed()) {
        archscale_law* law = load_law_arg(op_law);
        double x_star = 0, r_star = 0, xr_star = 0;
        check(archscale_optimal_xr(law, &x_star, &r_star, &xr_star));
        archscale_arch* arch = nullptr;
        check(archscale_closed_form_architecture(law, op_n_target, op_layers, op_d_head, op_gqa,
                                                 op_d_multiple, op_f_multiple, &arch));
        json j = arch_info_json(arch, 4096, 2);
        j["x_star"] = x_star;
        j["r_star"] = r_star;
        print_kv(j, parse_output(op_output));
        archscale_arch_free(arch);
        archscale_law_free(law);
        return 0;
    }

    if (optimize->parsed()) {
        archscale_law* law = load_law_arg(oz_law);
        archscale_ref* ref = load_ref_arg(oz_ref, nullptr);
        archscale_hardware* hw = load_hardware_arg(oz_hardware);
        json problem;
        problem["n_target"] = oz_n_target;
        problem["d_tokens"] = oz_d_tokens;
        if (oz_budget == "optimal" || oz_budget == "unconstrained") {
            problem["loss_budget"] = oz_budget;
        } else {
            try {
                problem["loss_budget"] = std::stod(oz_budget);
            } catch (const std::exception&) {
                std::cerr << "error: --loss-budget must be a number, 'optimal' or "
                             "'unconstrained'\n";
                return 2;
            }
        }
        problem["grid"] = json::parse(file_or_inline(oz_grid));
        problem["workload"] = {{"batch", oz_batch}, {"t_in", oz_t_in}, {"t_out", oz_t_out}};
        problem["baseline_gqa"] = oz_baseline_gqa;
        problem["epsilon"] = oz_epsilon;
        std::string evals;
        if (!oz_evals.empty()) evals = parse_gqa_evals_csv(oz_evals).dump();
        char* report_str = nullptr;
        check(archscale_run_algorithm1(law, nullptr, ref, hw, problem.dump().c_str(),
                                       oz_evals.empty() ? nullptr : evals.c_str(), &report_str));
        json report = json::parse(take_string(report_str));
        std::string csv = report["candidates_csv"].get<std::string>();
        if (!oz_csv_out.empty()) {
            std::ofstream out(oz_csv_out, std::ios::binary | std::ios::trunc);
            out << csv;
        }
        Output fmt = parse_output(oz_output);
        if (fmt == Output::csv) {
            std::cout << csv;
        } else {
            report.erase("candidates_csv");
            print_kv(report, fmt);
        }
        archscale_hardware_free(hw);
        archscale_ref_free(ref);
        archscale_law_free(law);
        return 0;
    }

    if (gqa->parsed()) {
        archscale_arch* arch = load_arch(gq_config);
        archscale_hardware* hw = load_hardware_arg(gq_hardware);
        json evals = parse_gqa_evals_csv(gq_evals);
        char* report_str = nullptr;
        check(archscale_gqa_local_search(arch, evals.dump().c_str(), gq_baseline, gq_epsilon, hw,
                                         gq_batch, gq_t_in, gq_t_out, &report_str));
        json report = json::parse(take_string(report_str));
        Output fmt = parse_output(gq_output);
        if (fmt == Output::csv) {
            std::cout << "gqa,evaluator_loss,modeled_throughput,accepted\n";
            for (const auto& ev : report["evaluations"]) {
                std::cout << ev["gqa"] << "," << ev["evaluator_loss"] << ","
                          << ev["modeled_throughput"] << ","
                          << (ev["accepted"].get<bool>() ? "true" : "false") << "\n";
            }
        } else {
            print_kv(report, fmt);
        }
        archscale_hardware_free(hw);
        archscale_arch_free(arch);
        return 0;
    }

    if (tput->parsed()) {
        archscale_arch* arch = load_arch(tp_config);
        archscale_hardware* hw = load_hardware_arg(tp_hardware);
        archscale_cost_report rep{};
        check(archscale_estimate_throughput(arch, hw, tp_batch, tp_t_in, tp_t_out, &rep));
        print_kv(json{{"prefill_seconds", rep.prefill_seconds},
                      {"decode_seconds", rep.decode_seconds},
                      {"tokens_per_second", rep.tokens_per_second},
                      {"flops_per_decode_token", rep.flops_per_decode_token},
                      {"kv_bytes_per_sequence", rep.kv_bytes_per_sequence},
                      {"compute_bound_fraction", rep.compute_bound_fraction}},
                 parse_output(tp_output));
        archscale_hardware_free(hw);
        archscale_arch_free(arch);
        return 0;
    }

    if (eval->parsed()) {
        archscale_law* law = load_law_arg(ev_law);
        archscale_runs* runs = load_runs_arg(ev_data, ev_format);
        archscale_ref* ref = load_ref_arg(ev_ref, runs);
        char* metrics_str = nullptr;
        check(archscale_eval_law(law, runs, ref, &metrics_str));
        print_kv(json::parse(take_string(metrics_str)), parse_output(ev_output));
        archscale_ref_free(ref);
        archscale_runs_free(runs);
        archscale_law_free(law);
        return 0;
    }

    if (corpus_cmd->parsed()) {
        char* csv = nullptr;
        check(archscale_corpus_csv(&csv));
        std::string all = take_string(csv);
        if (!co_size.empty()) {
            std::istringstream in(all);
            std::string line, filtered;
            bool first = true;
            while (std::getline(in, line)) {
                if (first || line.rfind(co_size + ",", 0) == 0) filtered += line + "\n";
                first = false;
            }
            all = filtered;
        }
        print_csv_as(all, parse_output(co_output));
        return 0;
    }

    if (synth->parsed()) {
        archscale_law* law = load_law_arg(sy_law);
        archscale_ref* ref = load_ref_arg(sy_ref, nullptr);
        char* csv = nullptr;
        check(archscale_synth_runs_csv(law, ref, sy_sizes.c_str(), sy_sigma, sy_seed, &csv));
        std::string text = take_string(csv);
        if (sy_out.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(sy_out, std::ios::binary | std::ios::trunc);
            if (!out) {
                std::cerr << "error: cannot write '" << sy_out << "'\n";
                return 2;
            }
            out << text;
        }
        archscale_ref_free(ref);
        archscale_law_free(law);
        return 0;
    }

    return 0;
}
