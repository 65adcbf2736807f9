#include "laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "error.hpp"

namespace archscale {

const char* to_string(LawForm form) {
    switch (form) {
        case LawForm::multiplicative: return "multiplicative";
        case LawForm::additive: return "additive";
        case LawForm::joint: return "joint";
    }
    return "unknown";
}

LawForm law_form_from_string(const std::string& s) {
    if (s == "multiplicative") return LawForm::multiplicative;
    if (s == "additive") return LawForm::additive;
    if (s == "joint") return LawForm::joint;
    throw_validation("unknown law form '" + s + "'");
}

ConditionalLaw ConditionalLaw::multiplicative(double a0, double a1, double a2, double b0,
                                              double b1, double b2) {
    ConditionalLaw law;
    law.form = LawForm::multiplicative;
    law.a0 = a0;
    law.a1 = a1;
    law.a2 = a2;
    law.b0 = b0;
    law.b1 = b1;
    law.b2 = b2;
    return law;
}

ConditionalLaw ConditionalLaw::additive(double a0, double a1, double a2, double b1, double b2) {
    ConditionalLaw law;
    law.form = LawForm::additive;
    law.a0 = a0;
    law.a1 = a1;
    law.a2 = a2;
    law.b1 = b1;
    law.b2 = b2;
    return law;
}

ConditionalLaw ConditionalLaw::joint(double a0, double a1, double a2) {
    ConditionalLaw law;
    law.form = LawForm::joint;
    law.a0 = a0;
    law.a1 = a1;
    law.a2 = a2;
    return law;
}

ConditionalLaw task3_law() {
    return ConditionalLaw::multiplicative(2.697, 0.0974, 0.0078, 0.3870, 0.0063, 0.0065);
}

ConditionalLaw one_b_only_law() {
    return ConditionalLaw::multiplicative(2.319, 0.238, 0.0176, 0.5104, 0.0051, 0.0062);
}

RefLossSource RefLossSource::from_chinchilla(const ChinchillaParams& p) {
    validate_params(p);
    RefLossSource src;
    src.kind = Kind::chinchilla;
    src.chinchilla = p;
    return src;
}

RefLossSource RefLossSource::from_table(std::vector<EmpiricalBucket> table, double n_tolerance) {
    for (const auto& b : table) {
        if (b.n_center <= 0.0) throw_validation("empirical table: bucket center must be positive");
        if (b.d_tokens <= 0) throw_validation("empirical table: d_tokens must be positive");
        if (b.loss <= 0.0) throw_validation("empirical table: loss must be positive");
    }
    if (!(n_tolerance > 0.0 && n_tolerance < 1.0)) {
        throw_validation("empirical table: tolerance must be in (0, 1)");
    }
    RefLossSource src;
    src.kind = Kind::empirical;
    src.table = std::move(table);
    src.n_tolerance = n_tolerance;
    return src;
}

void validate_params(const ChinchillaParams& p) {
    if (p.a < 0.0 || p.b < 0.0) throw_validation("chinchilla: A and B must be >= 0");
    if (p.alpha <= 0.0 || p.beta <= 0.0) throw_validation("chinchilla: alpha and beta must be positive");
}

void validate_law(const ConditionalLaw& law) {
    switch (law.form) {
        case LawForm::multiplicative:
            if (!law.b0 || !law.b1 || !law.b2) {
                throw_validation("multiplicative law requires b0, b1 and b2");
            }
            break;
        case LawForm::additive:
            if (law.b0) throw_validation("additive law has no b0 coefficient");
            if (!law.b1 || !law.b2) throw_validation("additive law requires b1 and b2");
            break;
        case LawForm::joint:
            if (law.b0 || law.b1 || law.b2) {
                throw_validation("joint law uses only a0, a1, a2");
            }
            break;
    }
}

double chinchilla_loss(const ChinchillaParams& p, double n, double d) {
    validate_params(p);
    if (n <= 0.0 || d <= 0.0) throw_validation("chinchilla_loss: N and D must be positive");
    return p.e + p.a / std::pow(n, p.alpha) + p.b / std::pow(d, p.beta);
}

double x_factor(const ConditionalLaw& law, double x) {
    if (x <= 0.0) throw_validation("x must be positive");
    return law.a0 + law.a1 * std::log(x) + law.a2 / x;
}

double r_factor(const ConditionalLaw& law, double r) {
    if (r <= 0.0) throw_validation("r must be positive");
    validate_law(law);
    switch (law.form) {
        case LawForm::multiplicative:
            return *law.b0 + *law.b1 * std::log(r) + *law.b2 / r;
        case LawForm::additive:
            return *law.b1 * std::log(r) + *law.b2 / r;
        case LawForm::joint:
            throw_validation("joint law has no separate r factor");
    }
    return 0.0;
}

double conditional_loss(const ConditionalLaw& law, double x, double r, double l_opt) {
    validate_law(law);
    if (x <= 0.0) throw_validation("conditional_loss: x must be positive");
    if (r <= 0.0) throw_validation("conditional_loss: r must be positive");
    if (l_opt <= 0.0) throw_validation("conditional_loss: l_opt must be positive");
    switch (law.form) {
        case LawForm::multiplicative:
            return x_factor(law, x) * (*law.b0 + *law.b1 * std::log(r) + *law.b2 / r) * l_opt;
        case LawForm::additive:
            return x_factor(law, x) + (*law.b1 * std::log(r) + *law.b2 / r) + l_opt;
        case LawForm::joint: {
            double xr = x * r;
            return (law.a0 + law.a1 * std::log(xr) + law.a2 / xr) * l_opt;
        }
    }
    throw_numeric("conditional_loss: unreachable form");
}

Optimum optimal_xr(const ConditionalLaw& law) {
    validate_law(law);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (law.form == LawForm::joint) {
        if (law.a1 <= 0.0 || law.a2 <= 0.0) {
            throw_validation("no interior optimum: joint law needs a1 > 0 and a2 > 0");
        }
        return Optimum{nan, nan, law.a2 / law.a1};
    }
    // Each term c1*ln(y) + c2/y has the unique stationary point y = c2/c1,
    // a minimum when both are positive.
    if (law.a1 <= 0.0 || law.a2 <= 0.0 || *law.b1 <= 0.0 || *law.b2 <= 0.0) {
        throw_validation("no interior optimum: requires a1, a2, b1, b2 all positive");
    }
    return Optimum{law.a2 / law.a1, *law.b2 / *law.b1, nan};
}

double ref_loss(const RefLossSource& src, double n, int64_t d_tokens) {
    if (n <= 0.0 || d_tokens <= 0) throw_validation("ref_loss: N and D must be positive");
    if (src.kind == RefLossSource::Kind::chinchilla) {
        return chinchilla_loss(src.chinchilla, n, static_cast<double>(d_tokens));
    }
    const EmpiricalBucket* best = nullptr;
    double best_dist = 0.0;
    for (const auto& b : src.table) {
        if (b.d_tokens != d_tokens) continue;
        double dist = std::abs(n - b.n_center) / b.n_center;
        if (dist > src.n_tolerance) continue;
        if (!best || dist < best_dist) {
            best = &b;
            best_dist = dist;
        }
    }
    if (!best) {
        std::ostringstream os;
        os << "no reference for (N=" << n << ", D=" << d_tokens << ")";
        throw_validation(os.str());
    }
    return best->loss;
}

void validate_record(const RunRecord& rec) {
    require_valid(rec.arch);
    if (rec.d_tokens <= 0) throw_validation("run record: d_tokens must be positive");
    if (rec.loss <= 0.0) throw_validation("run record: loss must be positive");
}

RefLossSource empirical_lopt(const std::vector<RunRecord>& records, double n_tolerance) {
    if (records.empty()) throw_validation("empirical_lopt: no records");
    if (!(n_tolerance > 0.0 && n_tolerance < 1.0)) {
        throw_validation("empirical_lopt: tolerance must be in (0, 1)");
    }

    struct Obs {
        std::string label;
        double n;
        int64_t d;
        double loss;
    };
    std::vector<Obs> labeled;
    std::vector<Obs> unlabeled;
    for (const auto& rec : records) {
        validate_record(rec);
        double n = static_cast<double>(count_params(rec.arch).n_nonembed);
        Obs obs{rec.size_label, n, rec.d_tokens, rec.loss};
        (rec.size_label.empty() ? unlabeled : labeled).push_back(obs);
    }

    std::vector<EmpiricalBucket> table;
    // Labeled records group by (label, D); the bucket center is the group
    // mean so lookups by exact N stay inside the tolerance.
    std::map<std::pair<std::string, int64_t>, std::vector<Obs>> groups;
    for (const auto& o : labeled) groups[{o.label, o.d}].push_back(o);
    for (const auto& [key, group] : groups) {
        EmpiricalBucket b;
        b.label = key.first;
        b.d_tokens = key.second;
        double sum = 0.0;
        b.loss = group.front().loss;
        for (const auto& o : group) {
            sum += o.n;
            b.loss = std::min(b.loss, o.loss);
        }
        b.n_center = sum / static_cast<double>(group.size());
        table.push_back(b);
    }

    // Unlabeled records cluster greedily by N: a new cluster starts when a
    // record exceeds the tolerance around the cluster's first member.
    std::sort(unlabeled.begin(), unlabeled.end(), [](const Obs& a, const Obs& b) {
        if (a.n != b.n) return a.n < b.n;
        return a.d < b.d;
    });
    size_t i = 0;
    while (i < unlabeled.size()) {
        double lead = unlabeled[i].n;
        size_t j = i;
        while (j < unlabeled.size() && unlabeled[j].n <= lead * (1.0 + n_tolerance)) ++j;
        std::map<int64_t, std::vector<Obs>> by_d;
        for (size_t k = i; k < j; ++k) by_d[unlabeled[k].d].push_back(unlabeled[k]);
        for (const auto& [d, group] : by_d) {
            EmpiricalBucket b;
            b.d_tokens = d;
            double sum = 0.0;
            b.loss = group.front().loss;
            for (const auto& o : group) {
                sum += o.n;
                b.loss = std::min(b.loss, o.loss);
            }
            b.n_center = sum / static_cast<double>(group.size());
            table.push_back(b);
        }
        i = j;
    }

    return RefLossSource::from_table(std::move(table), n_tolerance);
}

bool laws_equivalent(const ConditionalLaw& a, const ConditionalLaw& b,
                     const std::vector<std::pair<double, double>>& probe_grid) {
    validate_law(a);
    validate_law(b);
    if (a.form != b.form) throw_validation("laws_equivalent: forms differ");
    if (probe_grid.empty()) throw_validation("laws_equivalent: empty probe grid");
    for (const auto& [x, r] : probe_grid) {
        double va = conditional_loss(a, x, r, 1.0);
        double vb = conditional_loss(b, x, r, 1.0);
        double scale = std::max({std::abs(va), std::abs(vb), 1e-300});
        if (std::abs(va - vb) > 1e-9 * scale) return false;
    }
    return true;
}

std::vector<std::pair<double, double>> default_probe_grid() {
    std::vector<std::pair<double, double>> grid;
    const double xs[] = {0.03, 0.05, 0.08, 0.12, 0.2, 0.34};
    const double rs[] = {0.3, 0.6, 1.0, 1.5, 2.5, 5.0};
    for (double x : xs) {
        for (double r : rs) grid.emplace_back(x, r);
    }
    return grid;
}

}  // namespace archscale
