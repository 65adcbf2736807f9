#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace archscale {

namespace {

int64_t snap_round(double value, int64_t multiple) {
    if (multiple <= 0) multiple = 1;
    return std::llround(value / static_cast<double>(multiple)) * multiple;
}

std::string auto_name(const ArchitectureConfig& c) {
    std::ostringstream os;
    os << "d" << c.d_model << "_h" << c.n_head << "_f" << c.f_size << "_g" << c.gqa;
    return os.str();
}

// Architecture with the base's d_model and mlp-to-attention ratio rebuilt
// at a different gqa, holding the parameter budget.
ArchitectureConfig rebuild_at_gqa(const ArchitectureConfig& base, double r, int64_t n_target,
                                  int64_t gqa) {
    ArchitectureConfig c = base;
    c.gqa = gqa;
    c.n_head = solve_n_head(r, base.d_head, gqa, base.f_size);
    c.f_size = solve_intermediate_size(n_target, base.n_layers, base.d_model, c.n_head,
                                       base.d_head, gqa);
    c.name = auto_name(c);
    require_valid(c);
    return c;
}

bool lex_before(const ArchitectureConfig& a, const ArchitectureConfig& b) {
    if (a.d_model != b.d_model) return a.d_model < b.d_model;
    if (a.n_head != b.n_head) return a.n_head < b.n_head;
    if (a.f_size != b.f_size) return a.f_size < b.f_size;
    return a.gqa < b.gqa;
}

}  // namespace

ArchitectureConfig closed_form_architecture(const ConditionalLaw& law, int64_t n_target,
                                            int64_t n_layers, int64_t d_head, int64_t gqa,
                                            const Snapping& snapping) {
    if (n_target <= 0 || n_layers <= 0 || d_head <= 0 || gqa <= 0) {
        throw_validation("closed_form_architecture: all size arguments must be positive");
    }
    if (law.form == LawForm::joint) {
        throw_validation(
            "closed_form_architecture: the joint form pins only the x*r product, not d_model "
            "and r separately");
    }
    Optimum opt = optimal_xr(law);

    int64_t d_multiple = snapping.d_multiple > 0 ? snapping.d_multiple : d_head;
    int64_t d_model = snap_round(opt.x_star * std::sqrt(static_cast<double>(n_target)), d_multiple);
    auto infeasible = [&](const std::string& what) -> std::string {
        std::ostringstream os;
        os << "infeasible snapping: " << what << " (raw x*=" << opt.x_star
           << ", r*=" << opt.r_star << ")";
        return os.str();
    };
    if (d_model <= 0) throw_validation(infeasible("snapped d_model is not positive"));

    double per_layer = static_cast<double>(n_target) / static_cast<double>(n_layers);
    double attn_budget = per_layer / (1.0 + opt.r_star);
    double raw_heads = attn_budget / (2.0 * static_cast<double>(d_model) *
                                      static_cast<double>(d_head) *
                                      (1.0 + 1.0 / static_cast<double>(gqa)));
    int64_t n_head = snap_round(raw_heads, gqa);
    if (n_head < gqa) throw_validation(infeasible("snapped head count is below gqa"));

    ArchitectureConfig c;
    c.n_layers = n_layers;
    c.d_model = d_model;
    c.n_head = n_head;
    c.d_head = d_head;
    c.gqa = gqa;
    c.f_size = solve_intermediate_size(n_target, n_layers, d_model, n_head, d_head, gqa,
                                       snapping.f_multiple);
    c.name = auto_name(c);
    require_valid(c);
    return c;
}

std::vector<size_t> pareto_front(std::vector<CandidateEvaluation>& candidates) {
    const size_t n = candidates.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (candidates[a].predicted_loss != candidates[b].predicted_loss) {
            return candidates[a].predicted_loss < candidates[b].predicted_loss;
        }
        return candidates[a].modeled_throughput > candidates[b].modeled_throughput;
    });

    double best_lower_tput = -std::numeric_limits<double>::infinity();
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && candidates[order[j + 1]].predicted_loss ==
                                candidates[order[i]].predicted_loss) {
            ++j;
        }
        double group_max = candidates[order[i]].modeled_throughput;
        for (size_t k = i; k <= j; ++k) {
            auto& c = candidates[order[k]];
            // dominated by a strictly-lower-loss candidate with >= throughput,
            // or by an equal-loss candidate with strictly higher throughput
            c.dominated = (best_lower_tput >= c.modeled_throughput) ||
                          (c.modeled_throughput < group_max);
        }
        best_lower_tput = std::max(best_lower_tput, group_max);
        i = j + 1;
    }

    std::vector<size_t> front;
    for (size_t k = 0; k < n; ++k) {
        if (!candidates[k].dominated) front.push_back(k);
    }
    return front;
}

SearchOutcome constrained_search(const SearchProblem& problem) {
    validate_grid(problem.constraints);
    validate_hardware(problem.hardware);
    validate_workload(problem.workload);
    if (problem.n_target <= 0 || problem.d_tokens <= 0) {
        throw_validation("search problem: n_target and d_tokens must be positive");
    }
    if (!problem.optimal_budget && !std::isinf(problem.loss_budget)) {
        double l_opt = ref_loss(problem.ref, static_cast<double>(problem.n_target),
                                problem.d_tokens);
        if (problem.loss_budget < l_opt) {
            std::ostringstream os;
            os << "search problem: loss budget " << problem.loss_budget
               << " is below the reference loss " << l_opt;
            throw_validation(os.str());
        }
    }

    auto grid = enumerate_variants(problem.constraints);
    if (grid.empty()) {
        throw_validation("no feasible candidate: the constraint grid is empty");
    }

    SearchOutcome out;
    out.candidates.reserve(grid.size());
    for (const auto& arch : grid) {
        CandidateEvaluation ev;
        ev.arch = arch;
        auto m = derived_metrics(arch);
        ev.x = m.x;
        ev.r = m.r;
        double n = static_cast<double>(count_params(arch).n_nonembed);
        double l_opt = ref_loss(problem.ref, n, problem.d_tokens);
        ev.predicted_loss = conditional_loss(problem.law, m.x, m.r, l_opt);
        try {
            ev.modeled_throughput =
                estimate_throughput(arch, problem.hardware, problem.workload).tokens_per_second;
        } catch (const Error&) {
            ev.modeled_throughput = 0.0;  // not resident at this workload
        }
        ev.feasible = ev.predicted_loss <= problem.loss_budget;
        out.candidates.push_back(std::move(ev));
    }
    pareto_front(out.candidates);

    bool have_best = false;
    double min_loss = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < out.candidates.size(); ++i) {
        const auto& c = out.candidates[i];
        min_loss = std::min(min_loss, c.predicted_loss);
        if (!c.feasible) continue;
        if (!have_best) {
            out.best_index = i;
            have_best = true;
            continue;
        }
        const auto& b = out.candidates[out.best_index];
        if (c.modeled_throughput > b.modeled_throughput ||
            (c.modeled_throughput == b.modeled_throughput &&
             (c.predicted_loss < b.predicted_loss ||
              (c.predicted_loss == b.predicted_loss && lex_before(c.arch, b.arch))))) {
            out.best_index = i;
        }
    }
    if (!have_best) {
        std::ostringstream os;
        os << "no feasible candidate: minimum predicted loss " << min_loss
           << " exceeds the budget " << problem.loss_budget;
        throw_validation(os.str());
    }
    return out;
}

GqaSearchResult gqa_local_search(const ArchitectureConfig& base, const GqaEvaluator& evaluator,
                                 int64_t baseline_gqa, double epsilon,
                                 const HardwareProfile& hardware, const Workload& workload) {
    require_valid(base);
    if (!evaluator) throw_validation("gqa_local_search: evaluator is required");
    if (baseline_gqa <= 0) throw_validation("gqa_local_search: baseline gqa must be positive");
    if (epsilon < 0.0) throw_validation("gqa_local_search: epsilon must be >= 0");

    auto metrics = derived_metrics(base);
    int64_t n_target = count_params(base).n_nonembed;
    int64_t resolved_heads = solve_n_head(metrics.r, base.d_head, base.gqa, base.f_size);
    if (resolved_heads % baseline_gqa != 0) {
        std::ostringstream os;
        os << "gqa_local_search: baseline gqa " << baseline_gqa
           << " does not divide the resolved head count " << resolved_heads;
        throw_validation(os.str());
    }

    GqaSearchResult res;
    double baseline_loss = 0.0;
    for (int64_t gqa : feasible_gqa(resolved_heads)) {
        if (gqa < baseline_gqa) continue;
        GqaEvaluation ev;
        ev.gqa = gqa;
        ev.arch = rebuild_at_gqa(base, metrics.r, n_target, gqa);
        ev.evaluator_loss = evaluator(gqa);
        if (res.evaluations.empty()) {
            baseline_loss = ev.evaluator_loss;  // first candidate is the baseline
        }
        ev.modeled_throughput =
            estimate_throughput(ev.arch, hardware, workload).tokens_per_second;
        ev.accepted = ev.evaluator_loss <= baseline_loss + epsilon;
        bool stop = !ev.accepted;
        res.evaluations.push_back(std::move(ev));
        if (stop) break;
    }
    res.baseline_loss = baseline_loss;

    // highest-throughput accepted candidate; ties keep the smaller gqa
    bool have = false;
    double chosen_tput = 0.0;
    for (const auto& ev : res.evaluations) {
        if (!ev.accepted) continue;
        if (!have || ev.modeled_throughput > chosen_tput) {
            res.chosen_gqa = ev.gqa;
            res.chosen_arch = ev.arch;
            chosen_tput = ev.modeled_throughput;
            have = true;
        }
    }
    if (!have) {
        res.chosen_gqa = baseline_gqa;
        res.chosen_arch = base;
    }
    return res;
}

Algorithm1Result run_algorithm1(const Algorithm1Inputs& in) {
    Algorithm1Result res;

    if (in.ref) {
        res.ref = *in.ref;
    } else {
        if (in.records.empty()) {
            throw_validation("run_algorithm1: no reference and no records to fit one from");
        }
        res.ref = RefLossSource::from_chinchilla(fit_chinchilla(in.records, in.fit_options).params);
        res.fitted_ref = true;
    }

    if (in.law) {
        res.law = *in.law;
    } else {
        if (in.records.empty()) {
            throw_validation("run_algorithm1: no law and no records to fit one from");
        }
        res.law = fit_conditional_law(in.records, in.form, res.ref, in.fit_options).law;
        res.fitted_law = true;
    }

    ArchitectureConfig best;
    if (in.optimal_budget) {
        best = closed_form_architecture(res.law, in.n_target, in.grid.n_layers, in.grid.d_head,
                                        in.baseline_gqa, in.grid.snapping);
        CandidateEvaluation ev;
        ev.arch = best;
        auto m = derived_metrics(best);
        ev.x = m.x;
        ev.r = m.r;
        double n = static_cast<double>(count_params(best).n_nonembed);
        ev.predicted_loss = conditional_loss(res.law, m.x, m.r,
                                             ref_loss(res.ref, n, in.d_tokens));
        ev.modeled_throughput =
            estimate_throughput(best, in.hardware, in.workload).tokens_per_second;
        ev.feasible = true;
        res.trace.push_back(ev);
    } else {
        SearchProblem problem;
        problem.law = res.law;
        problem.ref = res.ref;
        problem.n_target = in.n_target;
        problem.d_tokens = in.d_tokens;
        problem.loss_budget = in.loss_budget;
        problem.constraints = in.grid;
        problem.hardware = in.hardware;
        problem.workload = in.workload;
        auto outcome = constrained_search(problem);
        best = outcome.candidates[outcome.best_index].arch;
        res.trace = std::move(outcome.candidates);
    }

    if (in.gqa_evaluator) {
        res.gqa_search = gqa_local_search(best, in.gqa_evaluator, in.baseline_gqa, in.epsilon,
                                          in.hardware, in.workload);
        res.architecture = res.gqa_search->chosen_arch;
        res.chosen_gqa = res.gqa_search->chosen_gqa;
    } else {
        res.architecture = best;
        res.chosen_gqa = best.gqa;
    }

    auto m = derived_metrics(res.architecture);
    double n = static_cast<double>(count_params(res.architecture).n_nonembed);
    res.predicted_loss = conditional_loss(res.law, m.x, m.r, ref_loss(res.ref, n, in.d_tokens));
    res.modeled_throughput =
        estimate_throughput(res.architecture, in.hardware, in.workload).tokens_per_second;
    return res;
}

}  // namespace archscale
