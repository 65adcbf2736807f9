#include "archscale.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

#include "arch.hpp"
#include "corpus.hpp"
#include "cost.hpp"
#include "error.hpp"
#include "fit.hpp"
#include "io.hpp"
#include "laws.hpp"
#include "search.hpp"

using nlohmann::json;

struct archscale_arch {
    archscale::ArchitectureConfig value;
};
struct archscale_hardware {
    archscale::HardwareProfile value;
};
struct archscale_law {
    archscale::ConditionalLaw value;
};
struct archscale_ref {
    archscale::RefLossSource value;
};
struct archscale_runs {
    archscale::LoadedRuns value;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
archscale_status wrap(Fn&& fn) {
    try {
        fn();
        return ARCHSCALE_OK;
    } catch (const archscale::Error& e) {
        g_last_error = e.what();
        return e.kind() == archscale::ErrorKind::validation ? ARCHSCALE_ERROR_VALIDATION
                                                            : ARCHSCALE_ERROR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ARCHSCALE_ERROR_INTERNAL;
    }
}

template <typename T>
void require_arg(const T* p, const char* name) {
    if (!p) archscale::throw_validation(std::string("null argument '") + name + "'");
}

archscale::FitOptions parse_fit_options(const char* options_json) {
    archscale::FitOptions opts;
    if (!options_json || !*options_json) return opts;
    json j = json::parse(options_json, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        archscale::throw_validation("fit options: malformed JSON");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "max_iterations") opts.max_iterations = value.get<int>();
        else if (key == "lambda_init") opts.lambda_init = value.get<double>();
        else if (key == "nu") opts.nu = value.get<double>();
        else if (key == "rel_tol") opts.rel_tol = value.get<double>();
        else if (key == "r_min") opts.r_filter_min = value.get<double>();
        else if (key == "r_max") opts.r_filter_max = value.get<double>();
        else if (key == "multistart") {
            for (const auto& start : value) {
                opts.multistart_grid.push_back(start.get<std::vector<double>>());
            }
        } else {
            archscale::throw_validation("fit options: unknown key '" + key + "'");
        }
    }
    return opts;
}

json fit_report_json(const archscale::FitResult& fit) {
    json j;
    j["coefficients"] = fit.coefficients;
    j["sse"] = fit.sse;
    j["train_mse"] = fit.train_mse;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["start_index"] = fit.start_index;
    return j;
}

json arch_json(const archscale::ArchitectureConfig& c) {
    return json::parse(archscale::arch_to_json(c));
}

struct ParsedProblem {
    archscale::ArchGridSpec grid;
    archscale::Workload workload;
    int64_t n_target = 0;
    int64_t d_tokens = 0;
    double loss_budget = 0.0;
    bool optimal_budget = false;
    int64_t baseline_gqa = 4;
    double epsilon = 0.002;
};

ParsedProblem parse_problem(const char* problem_json) {
    require_arg(problem_json, "problem_json");
    json j = json::parse(problem_json, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        archscale::throw_validation("search problem: malformed JSON");
    }
    ParsedProblem p;
    if (!j.contains("n_target")) archscale::throw_validation("search problem: missing n_target");
    if (!j.contains("d_tokens")) archscale::throw_validation("search problem: missing d_tokens");
    if (!j.contains("grid")) archscale::throw_validation("search problem: missing grid");
    p.n_target = j.at("n_target").get<int64_t>();
    p.d_tokens = j.at("d_tokens").get<int64_t>();
    p.grid = archscale::grid_from_json(j.at("grid").dump());
    if (j.contains("workload")) {
        const auto& w = j.at("workload");
        if (w.contains("batch")) p.workload.batch = w.at("batch").get<int64_t>();
        if (w.contains("t_in")) p.workload.t_in = w.at("t_in").get<int64_t>();
        if (w.contains("t_out")) p.workload.t_out = w.at("t_out").get<int64_t>();
    }
    if (!j.contains("loss_budget")) {
        archscale::throw_validation("search problem: missing loss_budget");
    }
    const auto& budget = j.at("loss_budget");
    if (budget.is_string()) {
        std::string s = budget.get<std::string>();
        if (s == "optimal") {
            p.optimal_budget = true;
        } else if (s == "unconstrained") {
            p.loss_budget = std::numeric_limits<double>::infinity();
        } else {
            archscale::throw_validation(
                "search problem: loss_budget must be a number, \"optimal\" or \"unconstrained\"");
        }
    } else if (budget.is_number()) {
        p.loss_budget = budget.get<double>();
    } else {
        archscale::throw_validation("search problem: bad loss_budget");
    }
    if (j.contains("baseline_gqa")) p.baseline_gqa = j.at("baseline_gqa").get<int64_t>();
    if (j.contains("epsilon")) p.epsilon = j.at("epsilon").get<double>();
    return p;
}

archscale::GqaEvaluator evaluator_from_json(const char* evals_json) {
    require_arg(evals_json, "evals_json");
    json j = json::parse(evals_json, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        archscale::throw_validation("gqa evaluations: expected a JSON object of gqa -> loss");
    }
    auto table = std::make_shared<std::map<int64_t, double>>();
    for (const auto& [key, value] : j.items()) {
        int64_t gqa = 0;
        try {
            size_t pos = 0;
            gqa = std::stoll(key, &pos);
            if (pos != key.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            archscale::throw_validation("gqa evaluations: non-integer key '" + key + "'");
        }
        (*table)[gqa] = value.get<double>();
    }
    return [table](int64_t gqa) {
        auto it = table->find(gqa);
        if (it == table->end()) {
            archscale::throw_validation("gqa evaluator has no entry for gqa=" +
                                        std::to_string(gqa));
        }
        return it->second;
    };
}

json gqa_search_json(const archscale::GqaSearchResult& res) {
    json evals = json::array();
    for (const auto& ev : res.evaluations) {
        evals.push_back({{"gqa", ev.gqa},
                         {"arch", arch_json(ev.arch)},
                         {"evaluator_loss", ev.evaluator_loss},
                         {"modeled_throughput", ev.modeled_throughput},
                         {"accepted", ev.accepted}});
    }
    return json{{"baseline_loss", res.baseline_loss},
                {"chosen_gqa", res.chosen_gqa},
                {"chosen_arch", arch_json(res.chosen_arch)},
                {"evaluations", evals}};
}

json candidate_json(const archscale::CandidateEvaluation& c) {
    return json{{"architecture", arch_json(c.arch)},
                {"x", c.x},
                {"r", c.r},
                {"predicted_loss", c.predicted_loss},
                {"tokens_per_second", c.modeled_throughput},
                {"feasible", c.feasible},
                {"pareto", !c.dominated}};
}

}  // namespace

extern "C" {

const char* archscale_version(void) { return "1.0.0"; }

const char* archscale_last_error(void) { return g_last_error.c_str(); }

void archscale_string_free(char* s) { std::free(s); }

void archscale_int64_array_free(int64_t* values) { std::free(values); }

/* ---------- architectures ---------- */

archscale_status archscale_arch_from_json(const char* json_text, archscale_arch** out) {
    return wrap([&] {
        require_arg(json_text, "json");
        require_arg(out, "out");
        *out = new archscale_arch{archscale::arch_from_json(json_text)};
    });
}

archscale_status archscale_arch_create(const char* name, int64_t n_layers, int64_t d_model,
                                       int64_t n_head, int64_t d_head, int64_t gqa,
                                       int64_t f_size, archscale_arch** out) {
    return wrap([&] {
        require_arg(out, "out");
        archscale::ArchitectureConfig c;
        c.name = name ? name : "";
        c.n_layers = n_layers;
        c.d_model = d_model;
        c.n_head = n_head;
        c.d_head = d_head;
        c.gqa = gqa;
        c.f_size = f_size;
        *out = new archscale_arch{std::move(c)};
    });
}

void archscale_arch_free(archscale_arch* arch) { delete arch; }

archscale_status archscale_arch_to_json(const archscale_arch* arch, char** json_out) {
    return wrap([&] {
        require_arg(arch, "arch");
        require_arg(json_out, "json_out");
        *json_out = dup_string(archscale::arch_to_json(arch->value));
    });
}

archscale_status archscale_arch_violations(const archscale_arch* arch, char** json_out) {
    return wrap([&] {
        require_arg(arch, "arch");
        require_arg(json_out, "json_out");
        json j = archscale::validate(arch->value);
        *json_out = dup_string(j.dump());
    });
}

archscale_status archscale_arch_params(const archscale_arch* arch, int64_t* attn_per_layer,
                                       int64_t* mlp_per_layer, int64_t* per_layer_total,
                                       int64_t* n_nonembed) {
    return wrap([&] {
        require_arg(arch, "arch");
        auto p = archscale::count_params(arch->value);
        if (attn_per_layer) *attn_per_layer = p.attn_per_layer;
        if (mlp_per_layer) *mlp_per_layer = p.mlp_per_layer;
        if (per_layer_total) *per_layer_total = p.per_layer_total;
        if (n_nonembed) *n_nonembed = p.n_nonembed;
    });
}

archscale_status archscale_arch_metrics(const archscale_arch* arch, double* x, double* r,
                                        int64_t* d_q, int64_t* d_kv, int64_t* n_kv_heads) {
    return wrap([&] {
        require_arg(arch, "arch");
        auto m = archscale::derived_metrics(arch->value);
        if (x) *x = m.x;
        if (r) *r = m.r;
        if (d_q) *d_q = m.d_q;
        if (d_kv) *d_kv = m.d_kv;
        if (n_kv_heads) *n_kv_heads = m.n_kv_heads;
    });
}

archscale_status archscale_solve_intermediate_size(int64_t n_target, int64_t n_layers,
                                                   int64_t d_model, int64_t n_head,
                                                   int64_t d_head, int64_t gqa,
                                                   int64_t f_multiple, int64_t* f_size_out) {
    return wrap([&] {
        require_arg(f_size_out, "f_size_out");
        *f_size_out = archscale::solve_intermediate_size(
            n_target, n_layers, d_model, n_head, d_head, gqa, f_multiple > 0 ? f_multiple : 64);
    });
}

archscale_status archscale_solve_n_head(double r_target, int64_t d_head, int64_t gqa,
                                        int64_t f_size, int64_t* n_head_out) {
    return wrap([&] {
        require_arg(n_head_out, "n_head_out");
        *n_head_out = archscale::solve_n_head(r_target, d_head, gqa, f_size);
    });
}

archscale_status archscale_feasible_gqa(int64_t n_head, int64_t** values_out, size_t* count_out) {
    return wrap([&] {
        require_arg(values_out, "values_out");
        require_arg(count_out, "count_out");
        auto divisors = archscale::feasible_gqa(n_head);
        auto* buf = static_cast<int64_t*>(std::malloc(sizeof(int64_t) * divisors.size()));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, divisors.data(), sizeof(int64_t) * divisors.size());
        *values_out = buf;
        *count_out = divisors.size();
    });
}

archscale_status archscale_enumerate_variants(const char* grid_spec_json, char** csv_out) {
    return wrap([&] {
        require_arg(grid_spec_json, "grid_spec_json");
        require_arg(csv_out, "csv_out");
        auto spec = archscale::grid_from_json(grid_spec_json);
        auto variants = archscale::enumerate_variants(spec);
        std::ostringstream os;
        os << "name,n_layers,d_model,n_head,d_head,gqa,f_size,n_nonembed,x,r\n";
        os << std::setprecision(10);
        for (const auto& c : variants) {
            auto p = archscale::count_params(c);
            auto m = archscale::derived_metrics(c);
            os << c.name << "," << c.n_layers << "," << c.d_model << "," << c.n_head << ","
               << c.d_head << "," << c.gqa << "," << c.f_size << "," << p.n_nonembed << ","
               << m.x << "," << m.r << "\n";
        }
        *csv_out = dup_string(os.str());
    });
}

/* ---------- cost model ---------- */

archscale_status archscale_hardware_from_json(const char* json_text, archscale_hardware** out) {
    return wrap([&] {
        require_arg(json_text, "json");
        require_arg(out, "out");
        *out = new archscale_hardware{archscale::hardware_from_json(json_text)};
    });
}

archscale_status archscale_hardware_a100_40g(archscale_hardware** out) {
    return wrap([&] {
        require_arg(out, "out");
        *out = new archscale_hardware{archscale::a100_40g()};
    });
}

void archscale_hardware_free(archscale_hardware* hw) { delete hw; }

archscale_status archscale_hardware_to_json(const archscale_hardware* hw, char** json_out) {
    return wrap([&] {
        require_arg(hw, "hw");
        require_arg(json_out, "json_out");
        *json_out = dup_string(archscale::hardware_to_json(hw->value));
    });
}

archscale_status archscale_training_flops(double n_nonembed, double d_tokens, double* flops_out) {
    return wrap([&] {
        require_arg(flops_out, "flops_out");
        *flops_out = archscale::training_flops(n_nonembed, d_tokens);
    });
}

archscale_status archscale_decode_flops_per_token(const archscale_arch* arch, int64_t t_context,
                                                  double* out) {
    return wrap([&] {
        require_arg(arch, "arch");
        require_arg(out, "out");
        *out = archscale::decode_flops_per_token(arch->value, t_context);
    });
}

archscale_status archscale_kv_cache_bytes(const archscale_arch* arch, int64_t t_context,
                                          int64_t batch, int64_t bytes_per_kv, double* out) {
    return wrap([&] {
        require_arg(arch, "arch");
        require_arg(out, "out");
        *out = archscale::kv_cache_bytes(arch->value, t_context, batch, bytes_per_kv);
    });
}

archscale_status archscale_max_feasible_batch(const archscale_arch* arch,
                                              const archscale_hardware* hw, int64_t t_max,
                                              int64_t* out) {
    return wrap([&] {
        require_arg(arch, "arch");
        require_arg(hw, "hw");
        require_arg(out, "out");
        *out = archscale::max_feasible_batch(arch->value, hw->value, t_max);
    });
}

archscale_status archscale_estimate_throughput(const archscale_arch* arch,
                                               const archscale_hardware* hw, int64_t batch,
                                               int64_t t_in, int64_t t_out,
                                               archscale_cost_report* out) {
    return wrap([&] {
        require_arg(arch, "arch");
        require_arg(hw, "hw");
        require_arg(out, "out");
        auto rep = archscale::estimate_throughput(arch->value, hw->value,
                                                  archscale::Workload{batch, t_in, t_out});
        out->prefill_seconds = rep.prefill_seconds;
        out->decode_seconds = rep.decode_seconds;
        out->tokens_per_second = rep.tokens_per_second;
        out->flops_per_decode_token = rep.flops_per_decode_token;
        out->kv_bytes_per_sequence = rep.kv_bytes_per_sequence;
        out->compute_bound_fraction = rep.compute_bound_fraction;
    });
}

/* ---------- laws ---------- */

archscale_status archscale_law_from_json(const char* json_text, archscale_law** out) {
    return wrap([&] {
        require_arg(json_text, "json");
        require_arg(out, "out");
        *out = new archscale_law{archscale::law_from_json(json_text)};
    });
}

archscale_status archscale_law_builtin(const char* name, archscale_law** out) {
    return wrap([&] {
        require_arg(name, "name");
        require_arg(out, "out");
        std::string n = name;
        if (n == "task3") {
            *out = new archscale_law{archscale::task3_law()};
        } else if (n == "1b-only") {
            *out = new archscale_law{archscale::one_b_only_law()};
        } else {
            archscale::throw_validation("unknown builtin law '" + n +
                                        "' (expected 'task3' or '1b-only')");
        }
    });
}

archscale_status archscale_law_load(const char* path, archscale_law** out) {
    return wrap([&] {
        require_arg(path, "path");
        require_arg(out, "out");
        *out = new archscale_law{archscale::load_law(path)};
    });
}

archscale_status archscale_law_save(const archscale_law* law, const char* path) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(path, "path");
        archscale::save_law(law->value, path);
    });
}

archscale_status archscale_law_to_json(const archscale_law* law, char** json_out) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(json_out, "json_out");
        *json_out = dup_string(archscale::law_to_json(law->value));
    });
}

void archscale_law_free(archscale_law* law) { delete law; }

archscale_status archscale_conditional_loss(const archscale_law* law, double x, double r,
                                            double l_opt, double* out) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(out, "out");
        *out = archscale::conditional_loss(law->value, x, r, l_opt);
    });
}

archscale_status archscale_optimal_xr(const archscale_law* law, double* x_star, double* r_star,
                                      double* xr_star) {
    return wrap([&] {
        require_arg(law, "law");
        auto opt = archscale::optimal_xr(law->value);
        if (x_star) *x_star = opt.x_star;
        if (r_star) *r_star = opt.r_star;
        if (xr_star) *xr_star = opt.xr_star;
    });
}

archscale_status archscale_laws_equivalent(const archscale_law* a, const archscale_law* b,
                                           const double* xs, const double* rs, size_t n_probes,
                                           int* equal_out) {
    return wrap([&] {
        require_arg(a, "a");
        require_arg(b, "b");
        require_arg(equal_out, "equal_out");
        std::vector<std::pair<double, double>> grid;
        if (xs && rs && n_probes > 0) {
            for (size_t i = 0; i < n_probes; ++i) grid.emplace_back(xs[i], rs[i]);
        } else {
            grid = archscale::default_probe_grid();
        }
        *equal_out = archscale::laws_equivalent(a->value, b->value, grid) ? 1 : 0;
    });
}

archscale_status archscale_chinchilla_loss(double e, double a, double alpha, double b,
                                           double beta, double n, double d, double* out) {
    return wrap([&] {
        require_arg(out, "out");
        *out = archscale::chinchilla_loss({e, a, alpha, b, beta}, n, d);
    });
}

/* ---------- references ---------- */

archscale_status archscale_ref_chinchilla(double e, double a, double alpha, double b, double beta,
                                          archscale_ref** out) {
    return wrap([&] {
        require_arg(out, "out");
        *out = new archscale_ref{
            archscale::RefLossSource::from_chinchilla({e, a, alpha, b, beta})};
    });
}

archscale_status archscale_ref_chinchilla_from_json(const char* json_text, archscale_ref** out) {
    return wrap([&] {
        require_arg(json_text, "json");
        require_arg(out, "out");
        *out = new archscale_ref{archscale::RefLossSource::from_chinchilla(
            archscale::chinchilla_from_json(json_text))};
    });
}

void archscale_ref_free(archscale_ref* ref) { delete ref; }

archscale_status archscale_ref_loss(const archscale_ref* ref, double n_nonembed,
                                    int64_t d_tokens, double* out) {
    return wrap([&] {
        require_arg(ref, "ref");
        require_arg(out, "out");
        *out = archscale::ref_loss(ref->value, n_nonembed, d_tokens);
    });
}

/* ---------- runs ---------- */

archscale_status archscale_runs_load(const char* path, const char* format,
                                     archscale_runs** out) {
    return wrap([&] {
        require_arg(path, "path");
        require_arg(format, "format");
        require_arg(out, "out");
        *out = new archscale_runs{archscale::load_runs(path, format)};
    });
}

archscale_status archscale_runs_from_csv(const char* csv_text, archscale_runs** out) {
    return wrap([&] {
        require_arg(csv_text, "csv_text");
        require_arg(out, "out");
        *out = new archscale_runs{archscale::parse_runs_csv(csv_text)};
    });
}

size_t archscale_runs_count(const archscale_runs* runs) {
    return runs ? runs->value.records.size() : 0;
}

void archscale_runs_free(archscale_runs* runs) { delete runs; }

archscale_status archscale_runs_summary_json(const archscale_runs* runs, char** json_out) {
    return wrap([&] {
        require_arg(runs, "runs");
        require_arg(json_out, "json_out");
        json j;
        j["records"] = runs->value.records.size();
        j["duplicates"] = runs->value.duplicate_count;
        j["warnings"] = runs->value.warnings;
        *json_out = dup_string(j.dump());
    });
}

archscale_status archscale_ref_empirical_from_runs(const archscale_runs* runs,
                                                   archscale_ref** out) {
    return wrap([&] {
        require_arg(runs, "runs");
        require_arg(out, "out");
        *out = new archscale_ref{archscale::empirical_lopt(runs->value.records)};
    });
}

/* ---------- fitting ---------- */

archscale_status archscale_fit_conditional_law(const archscale_runs* runs, const char* form,
                                               const archscale_ref* ref,
                                               const char* options_json, archscale_law** law_out,
                                               char** report_json_out) {
    return wrap([&] {
        require_arg(runs, "runs");
        require_arg(form, "form");
        require_arg(ref, "ref");
        require_arg(law_out, "law_out");
        auto opts = parse_fit_options(options_json);
        auto result = archscale::fit_conditional_law(
            runs->value.records, archscale::law_form_from_string(form), ref->value, opts);
        json report = fit_report_json(result.fit);
        report["form"] = form;
        report["records_used"] = result.records_used;
        report["records_filtered"] = result.records_filtered;
        try {
            auto opt = archscale::optimal_xr(result.law);
            if (std::isfinite(opt.x_star)) {
                report["x_star"] = opt.x_star;
                report["r_star"] = opt.r_star;
            } else {
                report["xr_star"] = opt.xr_star;
            }
        } catch (const archscale::Error&) {
            // fitted coefficients admit no interior optimum; nothing to report
        }
        archscale::ConditionalLaw law = result.law;
        law.fit_meta = report.dump();
        *law_out = new archscale_law{law};
        if (report_json_out) *report_json_out = dup_string(report.dump());
    });
}

archscale_status archscale_fit_chinchilla(const archscale_runs* runs, const char* options_json,
                                          archscale_ref** ref_out, char** report_json_out) {
    return wrap([&] {
        require_arg(runs, "runs");
        require_arg(ref_out, "ref_out");
        auto opts = parse_fit_options(options_json);
        auto result = archscale::fit_chinchilla(runs->value.records, opts);
        *ref_out = new archscale_ref{archscale::RefLossSource::from_chinchilla(result.params)};
        if (report_json_out) {
            json report = fit_report_json(result.fit);
            report["params"] = json::parse(archscale::chinchilla_to_json(result.params));
            *report_json_out = dup_string(report.dump());
        }
    });
}

archscale_status archscale_eval_law(const archscale_law* law, const archscale_runs* runs,
                                    const archscale_ref* ref, char** json_out) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(runs, "runs");
        require_arg(ref, "ref");
        require_arg(json_out, "json_out");
        std::vector<double> predicted, actual;
        for (const auto& rec : runs->value.records) {
            archscale::validate_record(rec);
            auto m = archscale::derived_metrics(rec.arch);
            double n = static_cast<double>(archscale::count_params(rec.arch).n_nonembed);
            double l_opt = archscale::ref_loss(ref->value, n, rec.d_tokens);
            predicted.push_back(archscale::conditional_loss(law->value, m.x, m.r, l_opt));
            actual.push_back(rec.loss);
        }
        json j;
        j["n"] = predicted.size();
        j["mse"] = archscale::mse(predicted, actual);
        j["spearman"] = archscale::spearman(predicted, actual);
        *json_out = dup_string(j.dump());
    });
}

archscale_status archscale_mse(const double* predicted, const double* actual, size_t n,
                               double* out) {
    return wrap([&] {
        require_arg(predicted, "predicted");
        require_arg(actual, "actual");
        require_arg(out, "out");
        *out = archscale::mse({predicted, n}, {actual, n});
    });
}

archscale_status archscale_spearman(const double* predicted, const double* actual, size_t n,
                                    double* out) {
    return wrap([&] {
        require_arg(predicted, "predicted");
        require_arg(actual, "actual");
        require_arg(out, "out");
        *out = archscale::spearman({predicted, n}, {actual, n});
    });
}

/* ---------- search ---------- */

archscale_status archscale_closed_form_architecture(const archscale_law* law, int64_t n_target,
                                                    int64_t n_layers, int64_t d_head, int64_t gqa,
                                                    int64_t d_multiple, int64_t f_multiple,
                                                    archscale_arch** out) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(out, "out");
        archscale::Snapping snapping;
        snapping.d_multiple = d_multiple;
        snapping.f_multiple = f_multiple > 0 ? f_multiple : 64;
        *out = new archscale_arch{archscale::closed_form_architecture(
            law->value, n_target, n_layers, d_head, gqa, snapping)};
    });
}

archscale_status archscale_constrained_search(const archscale_law* law, const archscale_ref* ref,
                                              const archscale_hardware* hw,
                                              const char* problem_json, char** csv_out,
                                              char** best_json_out) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(ref, "ref");
        require_arg(hw, "hw");
        auto parsed = parse_problem(problem_json);
        if (parsed.optimal_budget) {
            archscale::throw_validation(
                "constrained search: use archscale_run_algorithm1 for the \"optimal\" budget");
        }
        archscale::SearchProblem problem;
        problem.law = law->value;
        problem.ref = ref->value;
        problem.n_target = parsed.n_target;
        problem.d_tokens = parsed.d_tokens;
        problem.loss_budget = parsed.loss_budget;
        problem.constraints = parsed.grid;
        problem.hardware = hw->value;
        problem.workload = parsed.workload;
        auto outcome = archscale::constrained_search(problem);
        if (csv_out) *csv_out = dup_string(archscale::candidates_to_csv(outcome.candidates));
        if (best_json_out) {
            *best_json_out = dup_string(candidate_json(outcome.candidates[outcome.best_index]).dump());
        }
    });
}

archscale_status archscale_gqa_local_search(const archscale_arch* base, const char* evals_json,
                                            int64_t baseline_gqa, double epsilon,
                                            const archscale_hardware* hw, int64_t batch,
                                            int64_t t_in, int64_t t_out,
                                            char** report_json_out) {
    return wrap([&] {
        require_arg(base, "base");
        require_arg(hw, "hw");
        require_arg(report_json_out, "report_json_out");
        auto evaluator = evaluator_from_json(evals_json);
        auto res = archscale::gqa_local_search(base->value, evaluator, baseline_gqa, epsilon,
                                               hw->value, archscale::Workload{batch, t_in, t_out});
        *report_json_out = dup_string(gqa_search_json(res).dump());
    });
}

archscale_status archscale_run_algorithm1(const archscale_law* law, const archscale_runs* runs,
                                          const archscale_ref* ref, const archscale_hardware* hw,
                                          const char* problem_json, const char* gqa_evals_json,
                                          char** report_json_out) {
    return wrap([&] {
        require_arg(hw, "hw");
        require_arg(report_json_out, "report_json_out");
        auto parsed = parse_problem(problem_json);
        archscale::Algorithm1Inputs in;
        if (law) in.law = law->value;
        if (runs) in.records = runs->value.records;
        if (ref) in.ref = ref->value;
        in.n_target = parsed.n_target;
        in.d_tokens = parsed.d_tokens;
        in.loss_budget = parsed.loss_budget;
        in.optimal_budget = parsed.optimal_budget;
        in.grid = parsed.grid;
        in.hardware = hw->value;
        in.workload = parsed.workload;
        in.baseline_gqa = parsed.baseline_gqa;
        in.epsilon = parsed.epsilon;
        if (gqa_evals_json) in.gqa_evaluator = evaluator_from_json(gqa_evals_json);

        auto res = archscale::run_algorithm1(in);
        json report;
        report["architecture"] = arch_json(res.architecture);
        report["gqa"] = res.chosen_gqa;
        report["predicted_loss"] = res.predicted_loss;
        report["modeled_throughput"] = res.modeled_throughput;
        report["fitted_law"] = res.fitted_law;
        report["fitted_ref"] = res.fitted_ref;
        report["law"] = json::parse(archscale::law_to_json(res.law));
        report["candidates_csv"] = archscale::candidates_to_csv(res.trace);
        if (res.gqa_search) {
            report["gqa_search"] = gqa_search_json(*res.gqa_search);
        }
        *report_json_out = dup_string(report.dump());
    });
}

/* ---------- corpus & synthetic data ---------- */

archscale_status archscale_corpus_csv(char** csv_out) {
    return wrap([&] {
        require_arg(csv_out, "csv_out");
        *csv_out = dup_string(archscale::corpus_to_csv());
    });
}

archscale_status archscale_corpus_arch(const char* size_label, const char* variant,
                                       archscale_arch** out) {
    return wrap([&] {
        require_arg(size_label, "size_label");
        require_arg(out, "out");
        *out = new archscale_arch{
            archscale::corpus_arch(size_label, variant ? variant : "")};
    });
}

archscale_status archscale_synth_runs_csv(const archscale_law* law, const archscale_ref* ref,
                                          const char* sizes_csv, double noise_sigma,
                                          uint64_t seed, char** csv_out) {
    return wrap([&] {
        require_arg(law, "law");
        require_arg(ref, "ref");
        require_arg(sizes_csv, "sizes_csv");
        require_arg(csv_out, "csv_out");
        std::vector<std::string> sizes;
        std::string token;
        std::istringstream in(sizes_csv);
        while (std::getline(in, token, ',')) {
            if (!token.empty()) sizes.push_back(token);
        }
        auto records = archscale::synthetic_runs(law->value, ref->value, sizes, noise_sigma, seed);
        *csv_out = dup_string(archscale::runs_to_csv(records));
    });
}

}  // extern "C"
