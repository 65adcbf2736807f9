#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "arch.hpp"
#include "cost.hpp"
#include "fit.hpp"
#include "laws.hpp"

namespace archscale {

// Constrained architecture search: maximize modeled inference throughput
// subject to predicted loss <= loss_budget over an enumerated grid.
struct SearchProblem {
    ConditionalLaw law;
    RefLossSource ref;
    int64_t n_target = 0;
    int64_t d_tokens = 0;
    double loss_budget = 0.0;    // may be +inf (unconstrained)
    bool optimal_budget = false; // budget = predicted minimum: closed-form path
    ArchGridSpec constraints;
    HardwareProfile hardware;
    Workload workload;
};

struct CandidateEvaluation {
    ArchitectureConfig arch;
    double x = 0.0;
    double r = 0.0;
    double predicted_loss = 0.0;
    double modeled_throughput = 0.0;  // 0 when the workload cannot be resident
    bool feasible = false;            // predicted_loss <= loss_budget
    bool dominated = false;
};

struct SearchOutcome {
    std::vector<CandidateEvaluation> candidates;  // grid order, dominated flags set
    size_t best_index = 0;                        // max throughput among feasible
};

struct GqaEvaluation {
    int64_t gqa = 0;
    ArchitectureConfig arch;
    double evaluator_loss = 0.0;
    double modeled_throughput = 0.0;
    bool accepted = false;
};

struct GqaSearchResult {
    std::vector<GqaEvaluation> evaluations;  // ascending gqa; ends at first rejection
    int64_t chosen_gqa = 0;
    ArchitectureConfig chosen_arch;
    double baseline_loss = 0.0;
};

// Realizes the law's stationary point (x*, r*) as a concrete architecture:
// d_model = snap(x* sqrt(n_target)), heads from the attention share at r*,
// f_size fills the remaining budget. snapping.d_multiple <= 0 means d_head.
ArchitectureConfig closed_form_architecture(const ConditionalLaw& law, int64_t n_target,
                                            int64_t n_layers, int64_t d_head, int64_t gqa,
                                            const Snapping& snapping);

// Enumerates the constraint grid, scores every candidate (predicted loss via
// the law against the reference, throughput via the roofline model) and
// picks the highest-throughput feasible candidate. Ties break by lower
// predicted loss, then by (d_model, n_head, f_size, gqa).
SearchOutcome constrained_search(const SearchProblem& problem);

// Marks dominated entries (some other candidate has loss <= and throughput
// >= with at least one strict) and returns the front's indices in the
// original order.
std::vector<size_t> pareto_front(std::vector<CandidateEvaluation>& candidates);

using GqaEvaluator = std::function<double(int64_t gqa)>;

// Local search over gqa at fixed (n_target, d_model, r): candidates are the
// divisors of the re-solved head count, visited in ascending order starting
// at baseline_gqa, stopping at the first candidate whose evaluated loss
// exceeds baseline + epsilon. Chooses the highest-throughput accepted
// candidate (ties toward smaller gqa).
GqaSearchResult gqa_local_search(const ArchitectureConfig& base, const GqaEvaluator& evaluator,
                                 int64_t baseline_gqa, double epsilon,
                                 const HardwareProfile& hardware, const Workload& workload);

struct Algorithm1Inputs {
    std::optional<ConditionalLaw> law;  // fit from records when absent
    std::vector<RunRecord> records;
    std::optional<RefLossSource> ref;   // Chinchilla-fit from records when absent
    LawForm form = LawForm::multiplicative;
    FitOptions fit_options;

    int64_t n_target = 0;
    int64_t d_tokens = 0;
    double loss_budget = 0.0;
    bool optimal_budget = false;
    ArchGridSpec grid;
    HardwareProfile hardware;
    Workload workload;

    GqaEvaluator gqa_evaluator;  // null keeps the baseline gqa
    int64_t baseline_gqa = 4;
    double epsilon = 0.002;
};

struct Algorithm1Result {
    ConditionalLaw law;
    RefLossSource ref;
    bool fitted_law = false;
    bool fitted_ref = false;
    ArchitectureConfig architecture;
    int64_t chosen_gqa = 0;
    double predicted_loss = 0.0;
    double modeled_throughput = 0.0;
    std::vector<CandidateEvaluation> trace;
    std::optional<GqaSearchResult> gqa_search;
};

// End-to-end pipeline: (1) ensure a reference (fit Chinchilla from records
// when none is given) and a law, (2) constrained search, or the closed form
// when the budget is "optimal", (3) gqa local search when an evaluator is
// supplied.
Algorithm1Result run_algorithm1(const Algorithm1Inputs& inputs);

}  // namespace archscale
