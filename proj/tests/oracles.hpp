// Test-side oracles, kept independent of the implementation paths they
// check.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "arch.hpp"
#include "search.hpp"

namespace oracles {

// Parameter count by enumerating the individual projection matrices
// (Q, K, V, O, up, gate, down) instead of the grouped closed form.
inline int64_t param_count_by_matrices(const archscale::ArchitectureConfig& c) {
    int64_t dq = c.n_head * c.d_head;
    int64_t dkv = (c.n_head / c.gqa) * c.d_head;
    int64_t q = c.d_model * dq;
    int64_t k = c.d_model * dkv;
    int64_t v = c.d_model * dkv;
    int64_t o = dq * c.d_model;
    int64_t up = c.d_model * c.f_size;
    int64_t gate = c.d_model * c.f_size;
    int64_t down = c.f_size * c.d_model;
    return c.n_layers * (q + k + v + o + up + gate + down);
}

// All divisors by exhaustive trial over 1..n.
inline std::vector<int64_t> divisors_by_trial(int64_t n) {
    std::vector<int64_t> out;
    for (int64_t d = 1; d <= n; ++d) {
        if (n % d == 0) out.push_back(d);
    }
    return out;
}

// O(n^2) domination check.
inline std::vector<bool> brute_force_dominated(
    const std::vector<archscale::CandidateEvaluation>& cs) {
    std::vector<bool> dominated(cs.size(), false);
    for (size_t i = 0; i < cs.size(); ++i) {
        for (size_t j = 0; j < cs.size(); ++j) {
            if (i == j) continue;
            bool no_worse = cs[j].predicted_loss <= cs[i].predicted_loss &&
                            cs[j].modeled_throughput >= cs[i].modeled_throughput;
            bool strict = cs[j].predicted_loss < cs[i].predicted_loss ||
                          cs[j].modeled_throughput > cs[i].modeled_throughput;
            if (no_worse && strict) {
                dominated[i] = true;
                break;
            }
        }
    }
    return dominated;
}

// Exhaustive best: max throughput among feasible, ties by loss then by
// (d_model, n_head, f_size, gqa).
inline ptrdiff_t brute_force_best(const std::vector<archscale::CandidateEvaluation>& cs) {
    ptrdiff_t best = -1;
    for (size_t i = 0; i < cs.size(); ++i) {
        if (!cs[i].feasible) continue;
        if (best < 0) {
            best = static_cast<ptrdiff_t>(i);
            continue;
        }
        const auto& b = cs[static_cast<size_t>(best)];
        const auto& c = cs[i];
        auto key = [](const archscale::CandidateEvaluation& e) {
            return std::make_tuple(e.arch.d_model, e.arch.n_head, e.arch.f_size, e.arch.gqa);
        };
        if (c.modeled_throughput > b.modeled_throughput ||
            (c.modeled_throughput == b.modeled_throughput &&
             (c.predicted_loss < b.predicted_loss ||
              (c.predicted_loss == b.predicted_loss && key(c) < key(b))))) {
            best = static_cast<ptrdiff_t>(i);
        }
    }
    return best;
}

// Central finite difference.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracles
