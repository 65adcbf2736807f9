#include "arch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace archscale {

std::vector<std::string> validate(const ArchitectureConfig& c) {
    std::vector<std::string> v;
    auto positive = [&](int64_t value, const char* field) {
        if (value <= 0) {
            v.push_back(std::string(field) + " must be positive");
        }
    };
    positive(c.n_layers, "n_layers");
    positive(c.d_model, "d_model");
    positive(c.n_head, "n_head");
    positive(c.d_head, "d_head");
    positive(c.gqa, "gqa");
    positive(c.f_size, "f_size");
    if (c.n_head > 0 && c.gqa > 0 && c.n_head % c.gqa != 0) {
        v.push_back("gqa must divide n_head");
    }
    if (v.empty()) {
        if (c.d_q() <= 0) v.push_back("d_q must be positive");
        if (c.d_kv() <= 0) v.push_back("d_kv must be positive");
    }
    return v;
}

void require_valid(const ArchitectureConfig& c) {
    auto v = validate(c);
    if (v.empty()) return;
    std::ostringstream os;
    os << "invalid architecture";
    if (!c.name.empty()) os << " '" << c.name << "'";
    os << ":";
    for (const auto& s : v) os << " " << s << ";";
    throw_validation(os.str());
}

ParamBreakdown count_params(const ArchitectureConfig& c) {
    require_valid(c);
    ParamBreakdown b;
    b.attn_per_layer = 2 * c.d_model * c.d_q() + 2 * c.d_model * c.d_kv();
    b.mlp_per_layer = 3 * c.d_model * c.f_size;
    b.per_layer_total = b.attn_per_layer + b.mlp_per_layer;
    b.n_nonembed = c.n_layers * b.per_layer_total;
    return b;
}

DerivedMetrics derived_metrics(const ArchitectureConfig& c) {
    auto p = count_params(c);
    DerivedMetrics m;
    m.d_q = c.d_q();
    m.d_kv = c.d_kv();
    m.n_kv_heads = c.n_head / c.gqa;
    m.x = static_cast<double>(c.d_model) / std::sqrt(static_cast<double>(p.n_nonembed));
    m.r = static_cast<double>(p.mlp_per_layer) / static_cast<double>(p.attn_per_layer);
    return m;
}

namespace {

int64_t snap_round(double value, int64_t multiple) {
    if (multiple <= 0) multiple = 1;
    return std::llround(value / static_cast<double>(multiple)) * multiple;
}

// Attention parameters per layer for a head count, as a double so callers
// can work with fractional head counts while solving.
double attn_params(double d_model, double d_head, double n_head, double gqa) {
    return 2.0 * d_model * d_head * n_head * (1.0 + 1.0 / gqa);
}

}  // namespace

int64_t solve_intermediate_size(int64_t n_target, int64_t n_layers, int64_t d_model,
                                int64_t n_head, int64_t d_head, int64_t gqa,
                                int64_t f_multiple) {
    if (n_target <= 0 || n_layers <= 0 || d_model <= 0 || n_head <= 0 || d_head <= 0 || gqa <= 0) {
        throw_validation("solve_intermediate_size: all arguments must be positive");
    }
    if (n_head % gqa != 0) {
        throw_validation("solve_intermediate_size: gqa must divide n_head");
    }
    double per_layer = static_cast<double>(n_target) / static_cast<double>(n_layers);
    double attn = attn_params(static_cast<double>(d_model), static_cast<double>(d_head),
                              static_cast<double>(n_head), static_cast<double>(gqa));
    double mlp_budget = per_layer - attn;
    if (mlp_budget <= 0.0) {
        std::ostringstream os;
        os << "budget too small: attention (" << static_cast<int64_t>(attn)
           << " params/layer) exceeds the per-layer budget "
           << static_cast<int64_t>(per_layer);
        throw_validation(os.str());
    }
    int64_t f = snap_round(mlp_budget / (3.0 * static_cast<double>(d_model)), f_multiple);
    if (f <= 0) {
        throw_validation("budget too small: snapped intermediate size is not positive");
    }
    return f;
}

int64_t solve_n_head(double r_target, int64_t d_head, int64_t gqa, int64_t f_size) {
    if (r_target <= 0.0) throw_validation("solve_n_head: r_target must be positive");
    if (d_head <= 0 || gqa <= 0 || f_size <= 0) {
        throw_validation("solve_n_head: d_head, gqa and f_size must be positive");
    }
    double raw = 3.0 * static_cast<double>(f_size) /
                 (2.0 * static_cast<double>(d_head) * r_target * (1.0 + 1.0 / static_cast<double>(gqa)));
    int64_t n_head = snap_round(raw, gqa);
    if (n_head < gqa) {
        std::ostringstream os;
        os << "infeasible head count: r=" << r_target << " needs " << raw
           << " heads, below gqa=" << gqa;
        throw_validation(os.str());
    }
    return n_head;
}

std::vector<int64_t> feasible_gqa(int64_t n_head) {
    if (n_head < 1) throw_validation("feasible_gqa: n_head must be >= 1");
    std::vector<int64_t> divisors;
    for (int64_t d = 1; d * d <= n_head; ++d) {
        if (n_head % d == 0) {
            divisors.push_back(d);
            if (d != n_head / d) divisors.push_back(n_head / d);
        }
    }
    std::sort(divisors.begin(), divisors.end());
    return divisors;
}

void validate_grid(const ArchGridSpec& spec) {
    if (spec.n_target <= 0) throw_validation("grid: n_target must be positive");
    if (!(spec.n_tolerance > 0.0 && spec.n_tolerance < 0.5)) {
        throw_validation("grid: n_tolerance must be in (0, 0.5)");
    }
    if (spec.n_layers <= 0) throw_validation("grid: n_layers must be positive");
    if (spec.d_head <= 0) throw_validation("grid: d_head must be positive");
    if (spec.gqa_values.empty()) throw_validation("grid: gqa_values must be non-empty");
    if (spec.d_model_values.empty()) throw_validation("grid: d_model_values must be non-empty");
    bool has_r = !spec.r_values.empty();
    bool has_f = !spec.f_values.empty();
    if (has_r == has_f) {
        throw_validation("grid: exactly one of r_values / f_values must be non-empty");
    }
    for (int64_t g : spec.gqa_values) {
        if (g <= 0) throw_validation("grid: gqa values must be positive");
    }
    for (int64_t d : spec.d_model_values) {
        if (d <= 0) throw_validation("grid: d_model values must be positive");
    }
    for (double r : spec.r_values) {
        if (r <= 0.0) throw_validation("grid: r values must be positive");
    }
    for (int64_t f : spec.f_values) {
        if (f <= 0) throw_validation("grid: f values must be positive");
    }
}

std::vector<ArchitectureConfig> enumerate_variants(const ArchGridSpec& spec) {
    validate_grid(spec);

    auto d_values = spec.d_model_values;
    std::sort(d_values.begin(), d_values.end());
    d_values.erase(std::unique(d_values.begin(), d_values.end()), d_values.end());
    auto gqa_values = spec.gqa_values;
    std::sort(gqa_values.begin(), gqa_values.end());
    gqa_values.erase(std::unique(gqa_values.begin(), gqa_values.end()), gqa_values.end());

    double per_layer = static_cast<double>(spec.n_target) / static_cast<double>(spec.n_layers);

    std::vector<ArchitectureConfig> out;
    auto consider = [&](int64_t d, int64_t gqa, int64_t n_head) {
        if (n_head < gqa) return;
        ArchitectureConfig c;
        c.n_layers = spec.n_layers;
        c.d_model = d;
        c.n_head = n_head;
        c.d_head = spec.d_head;
        c.gqa = gqa;
        try {
            c.f_size = solve_intermediate_size(spec.n_target, spec.n_layers, d, n_head,
                                               spec.d_head, gqa, spec.snapping.f_multiple);
        } catch (const Error&) {
            return;  // attention floor exceeds the budget at this (d, n_head)
        }
        if (!validate(c).empty()) return;
        auto p = count_params(c);
        double rel = std::abs(static_cast<double>(p.n_nonembed - spec.n_target)) /
                     static_cast<double>(spec.n_target);
        if (rel > spec.n_tolerance) return;
        std::ostringstream nm;
        nm << "d" << c.d_model << "_h" << c.n_head << "_f" << c.f_size << "_g" << c.gqa;
        c.name = nm.str();
        out.push_back(c);
    };

    for (int64_t d : d_values) {
        for (int64_t gqa : gqa_values) {
            if (!spec.r_values.empty()) {
                for (double r : spec.r_values) {
                    double attn_budget = per_layer / (1.0 + r);
                    double raw = attn_budget / attn_params(static_cast<double>(d),
                                                           static_cast<double>(spec.d_head), 1.0,
                                                           static_cast<double>(gqa));
                    int64_t n_head = snap_round(raw, gqa);
                    consider(d, gqa, n_head);
                }
            } else {
                for (int64_t f : spec.f_values) {
                    double attn_budget = per_layer - 3.0 * static_cast<double>(d) * static_cast<double>(f);
                    if (attn_budget <= 0.0) continue;
                    double raw = attn_budget / attn_params(static_cast<double>(d),
                                                           static_cast<double>(spec.d_head), 1.0,
                                                           static_cast<double>(gqa));
                    int64_t n_head = snap_round(raw, gqa);
                    consider(d, gqa, n_head);
                }
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const ArchitectureConfig& a, const ArchitectureConfig& b) {
        if (a.d_model != b.d_model) return a.d_model < b.d_model;
        double ra = derived_metrics(a).r;
        double rb = derived_metrics(b).r;
        if (ra != rb) return ra < rb;
        if (a.gqa != b.gqa) return a.gqa < b.gqa;
        return a.n_head < b.n_head;
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const ArchitectureConfig& a, const ArchitectureConfig& b) {
                              return a.d_model == b.d_model && a.n_head == b.n_head &&
                                     a.gqa == b.gqa && a.f_size == b.f_size &&
                                     a.n_layers == b.n_layers && a.d_head == b.d_head;
                          }),
              out.end());
    return out;
}

}  // namespace archscale
