#pragma once

// Test-only reference computations and random generators. Nothing here calls
// into the engine's inference or evaluation code.

#include "brb/types.hpp"

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace brb::testing {

struct ErOutcome {
    std::vector<double> beliefs;
    double residual = 0.0;
};

/// Recursive evidential-reasoning combination, one piece of evidence at a time.
/// Each rule contributes masses w*beta_j, an unweighted remainder 1 - w and an
/// incompleteness remainder w*(1 - sum beta).
inline ErOutcome er_pairwise(const std::vector<double>& weights, const std::vector<std::vector<double>>& beliefs) {
    const std::size_t n = beliefs.front().size();
    std::vector<double> m;
    double m_bar = 0.0, m_tilde = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double w = weights[k];
        double s = 0.0;
        for (double b : beliefs[k]) s += b;
        std::vector<double> mk(n);
        for (std::size_t j = 0; j < n; ++j) mk[j] = w * beliefs[k][j];
        const double bar_k = 1.0 - w;
        const double tilde_k = w * (1.0 - s);
        if (k == 0) {
            m = mk;
            m_bar = bar_k;
            m_tilde = tilde_k;
            continue;
        }
        const double mh_i = m_bar + m_tilde;
        const double mh_k = bar_k + tilde_k;
        double conflict = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t j = 0; j < n; ++j)
                if (t != j) conflict += m[t] * mk[j];
        const double scale = 1.0 / (1.0 - conflict);
        for (std::size_t j = 0; j < n; ++j) m[j] = scale * (m[j] * mk[j] + mh_i * mk[j] + m[j] * mh_k);
        const double tilde = scale * (m_tilde * tilde_k + m_bar * tilde_k + m_tilde * bar_k);
        m_bar = scale * (m_bar * bar_k);
        m_tilde = tilde;
    }
    ErOutcome out;
    double sum = 0.0;
    for (double x : m) {
        out.beliefs.push_back(x / (1.0 - m_bar));
        sum += out.beliefs.back();
    }
    out.residual = 1.0 - sum;
    return out;
}

/// AUC by enumerating every positive/negative pair; ties count one half.
inline double auc_by_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

struct Table2Row {
    const char* id;
    double brbes;
    double expert;
    double rbfl;
    int benchmark;
};

/// The twelve published rows of the crime-zone assessment table.
inline const std::vector<Table2Row>& table2_rows() {
    static const std::vector<Table2Row> rows = {
        {"1", 79.95, 69.44, 74.34, 1},  {"2", 89.39, 70.32, 78.23, 1},  {"3", 73.15, 60.13, 67.15, 1},
        {"4", 58.1, 45.15, 46.23, 1},   {"5", 40.45, 30.45, 22.25, 0},  {"6", 44.52, 37.57, 38.54, 0},
        {"7", 55.01, 50.65, 51.55, 1},  {"8", 41.57, 45.56, 42.26, 0},  {"9", 33.27, 30.29, 30.25, 0},
        {"48", 91.85, 79.24, 82.37, 1}, {"49", 61.54, 53.53, 56.24, 1}, {"50", 24.15, 18.73, 21.45, 0},
    };
    return rows;
}

/// Random belief vector over `n` grades; complete (sums to 1) unless
/// `incomplete`, in which case the sum lies in [0.3, 1).
inline std::vector<double> random_beliefs(std::mt19937_64& rng, std::size_t n, bool incomplete) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> b(n);
    double sum = 0.0;
    for (auto& x : b) {
        x = u(rng) < 0.2 ? 0.0 : u(rng);
        sum += x;
    }
    if (sum == 0.0) {
        b[0] = 1.0;
        sum = 1.0;
    }
    const double target = incomplete ? 0.3 + 0.7 * u(rng) * 0.999 : 1.0;
    for (auto& x : b) x = x / sum * target;
    return b;
}

inline std::vector<ReferentialGrade> random_grades(std::mt19937_64& rng, std::size_t n, const std::string& prefix) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> utilities(n);
    double acc = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    for (auto& x : utilities) {
        acc += u(rng);
        x = acc;
    }
    if (rng() & 1) std::reverse(utilities.begin(), utilities.end());
    std::vector<ReferentialGrade> grades;
    for (std::size_t j = 0; j < n; ++j) {
        ReferentialGrade g{prefix + "g" + std::to_string(j), utilities[j], std::nullopt};
        if (rng() % 3 == 0) g.band = Band{utilities[j] - 0.01, utilities[j] + 0.01};
        grades.push_back(std::move(g));
    }
    return grades;
}

struct RandomKbOptions {
    std::size_t max_attributes = 4;
    std::size_t max_grades = 4;
    std::size_t max_consequent_grades = 5;
    bool full_grid = true;
};

/// A random rule base that passes validation.
inline RuleBase random_rule_base(std::mt19937_64& rng, RandomKbOptions opt = {}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

    RuleBase rb;
    rb.name = "random-" + std::to_string(rng() % 100000);
    rb.version = std::to_string(pick(1, 9));
    const std::size_t n_attr = pick(1, opt.max_attributes);
    for (std::size_t i = 0; i < n_attr; ++i) {
        AttributeDef a;
        a.name = "A" + std::to_string(i);
        a.grades = random_grades(rng, pick(2, opt.max_grades), a.name);
        a.weight = u(rng);
        rb.attributes.push_back(std::move(a));
    }
    rb.consequent.name = "C";
    rb.consequent.grades = random_grades(rng, pick(2, opt.max_consequent_grades), "C");

    std::vector<std::size_t> point(n_attr, 0);
    for (bool done = false; !done;) {
        if (opt.full_grid || u(rng) < 0.6) {
            BeliefRule r;
            r.antecedents = point;
            r.theta = 0.05 + 0.95 * u(rng);
            r.delta.resize(n_attr);
            for (auto& d : r.delta) d = u(rng) < 0.15 ? 0.0 : u(rng);
            r.delta[pick(0, n_attr - 1)] = 0.1 + 0.9 * u(rng);
            r.beliefs = random_beliefs(rng, rb.consequent.grades.size(), u(rng) < 0.3);
            rb.rules.push_back(std::move(r));
        }
        std::size_t i = n_attr;
        done = true;
        while (i > 0) {
            --i;
            if (++point[i] < rb.attributes[i].grades.size()) {
                done = false;
                break;
            }
            point[i] = 0;
        }
    }
    if (rb.rules.empty()) {
        BeliefRule r;
        r.antecedents.assign(n_attr, 0);
        r.delta.assign(n_attr, 1.0);
        r.beliefs = random_beliefs(rng, rb.consequent.grades.size(), false);
        rb.rules.push_back(std::move(r));
    }
    return rb;
}

/// An in-range value for every attribute.
inline InputMap random_inputs(std::mt19937_64& rng, const RuleBase& rb) {
    InputMap inputs;
    for (const auto& a : rb.attributes) {
        double lo = a.grades.front().utility, hi = lo;
        for (const auto& g : a.grades) {
            lo = std::min(lo, g.utility);
            hi = std::max(hi, g.utility);
        }
        inputs[a.name] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    return inputs;
}

} // namespace brb::testing
