#pragma once

// Belief-rule-base inference: input transformation, rule activation,
// incompleteness update, analytical evidential-reasoning aggregation and
// expected-utility scoring. Every function here is pure.

#include "brb/error.hpp"
#include "brb/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace brb {

/// Maps a crisp value onto an attribute's referential grades. The value is
/// split between the two grades whose utilities bracket it; values outside the
/// grade range clamp to the nearest extreme grade.
inline std::vector<double> transform_input(std::span<const ReferentialGrade> grades, double value) {
    if (grades.size() < 2)
        throw Error(ErrorCode::Schema, "attribute needs at least 2 grades");
    if (!std::isfinite(value))
        throw Error(ErrorCode::InvalidInput, "input value is not finite");

    std::vector<double> alpha(grades.size(), 0.0);
    auto by_utility = [](const ReferentialGrade& a, const ReferentialGrade& b) { return a.utility < b.utility; };
    auto [lo, hi] = std::minmax_element(grades.begin(), grades.end(), by_utility);
    if (value >= hi->utility) {
        alpha[static_cast<std::size_t>(hi - grades.begin())] = 1.0;
        return alpha;
    }
    if (value <= lo->utility) {
        alpha[static_cast<std::size_t>(lo - grades.begin())] = 1.0;
        return alpha;
    }
    for (std::size_t j = 0; j + 1 < grades.size(); ++j) {
        const double a = grades[j].utility;
        const double b = grades[j + 1].utility;
        if ((a >= value && value >= b) || (a <= value && value <= b)) {
            alpha[j] = (value - b) / (a - b);
            alpha[j + 1] = 1.0 - alpha[j];
            return alpha;
        }
    }
    // Only reachable with non-monotone grades, which validation rejects.
    throw Error(ErrorCode::Schema, "grade utilities are not monotone");
}

inline std::vector<double> transform_input(const AttributeDef& attr, double value) {
    return transform_input(std::span<const ReferentialGrade>(attr.grades), value);
}

/// Transforms every supplied input. Attributes without a value get an all-zero
/// matching vector and completeness 0.
inline TransformedInput transform_all(const RuleBase& rb, const InputMap& inputs) {
    for (const auto& [name, value] : inputs) {
        if (!rb.find_attribute(name))
            throw Error(ErrorCode::InvalidInput, "unknown attribute '" + name + "'", "inputs." + name);
    }
    TransformedInput ti;
    ti.attributes.reserve(rb.attributes.size());
    for (const auto& attr : rb.attributes) {
        AttributeMatch m;
        auto it = inputs.find(attr.name);
        if (it != inputs.end() && it->second) {
            try {
                m.matching = transform_input(attr, *it->second);
            } catch (const Error& e) {
                throw Error(e.code(), attr.name + ": " + e.what(), "inputs." + attr.name);
            }
            m.completeness = std::accumulate(m.matching.begin(), m.matching.end(), 0.0);
        } else {
            m.matching.assign(attr.grades.size(), 0.0);
        }
        ti.attributes.push_back(std::move(m));
    }
    return ti;
}

namespace detail {

inline void check_shape(const RuleBase& rb, const TransformedInput& ti) {
    if (ti.attributes.size() != rb.attributes.size())
        throw Error(ErrorCode::InvalidInput, "transformed input does not match rule base attributes");
    for (std::size_t i = 0; i < rb.attributes.size(); ++i)
        if (ti.attributes[i].matching.size() != rb.attributes[i].grades.size())
            throw Error(ErrorCode::InvalidInput, "matching vector size mismatch", "attributes[" + std::to_string(i) + "]");
}

// 0^0 = 1: a zero-weight attribute never suppresses a rule.
inline double weighted_power(double base, double exponent) {
    if (exponent == 0.0) return 1.0;
    return std::pow(base, exponent);
}

} // namespace detail

/// Normalised activation weight of every rule. Attributes with no input
/// (completeness 0) take no part in matching.
inline std::vector<double> activation_weights(const RuleBase& rb, const TransformedInput& ti) {
    detail::check_shape(rb, ti);
    std::vector<double> raw(rb.rules.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < rb.rules.size(); ++k) {
        const auto& rule = rb.rules[k];
        if (rule.antecedents.size() != rb.attributes.size() || rule.delta.size() != rb.attributes.size())
            throw Error(ErrorCode::Schema, "rule shape does not match attributes", "rules[" + std::to_string(k) + "]");
        for (std::size_t i = 0; i < rb.attributes.size(); ++i)
            if (rule.antecedents[i] >= rb.attributes[i].grades.size())
                throw Error(ErrorCode::Schema, "rule references an unknown grade", "rules[" + std::to_string(k) + "].antecedents");
        const double max_delta = rule.delta.empty() ? 0.0 : *std::max_element(rule.delta.begin(), rule.delta.end());
        double match = 1.0;
        for (std::size_t i = 0; i < rb.attributes.size() && match > 0.0; ++i) {
            if (ti.attributes[i].completeness <= 0.0) continue;
            const double relative = max_delta > 0.0 ? rule.delta[i] / max_delta : 0.0;
            match *= detail::weighted_power(ti.attributes[i].matching[rule.antecedents[i]], relative);
        }
        raw[k] = rule.theta * match;
        total += raw[k];
    }
    if (!(total > 0.0))
        throw Error(ErrorCode::NoRuleActivated, "no rule is activated by the given inputs");
    for (double& w : raw) w /= total;
    return raw;
}

/// Discounts each rule's consequent beliefs by the mean completeness of the
/// attributes it uses (those with delta > 0).
inline std::vector<std::vector<double>> update_beliefs_incomplete(const RuleBase& rb, const TransformedInput& ti) {
    detail::check_shape(rb, ti);
    std::vector<std::vector<double>> adjusted;
    adjusted.reserve(rb.rules.size());
    for (const auto& rule : rb.rules) {
        double used = 0.0;
        double completeness = 0.0;
        for (std::size_t i = 0; i < rb.attributes.size(); ++i) {
            if (rule.delta[i] > 0.0) {
                used += 1.0;
                completeness += ti.attributes[i].completeness;
            }
        }
        const double factor = used > 0.0 ? completeness / used : 1.0;
        auto b = rule.beliefs;
        if (factor != 1.0)
            for (double& x : b) x *= factor;
        adjusted.push_back(std::move(b));
    }
    return adjusted;
}

struct Aggregation {
    std::vector<double> beliefs;
    double residual = 0.0;
};

/// Analytical evidential-reasoning combination of weighted belief
/// distributions. `weights` must sum to 1; each row of `beliefs` must sum to
/// at most 1 and share one length.
inline Aggregation er_aggregate(std::span<const double> weights, const std::vector<std::vector<double>>& beliefs) {
    if (weights.size() != beliefs.size() || beliefs.empty())
        throw Error(ErrorCode::InvalidInput, "weights and belief rows must be non-empty and equal in number");
    const std::size_t grades = beliefs.front().size();
    if (grades == 0)
        throw Error(ErrorCode::InvalidInput, "belief rows are empty");

    std::vector<double> p(grades, 1.0);
    double q = 1.0;
    double r = 1.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const auto& b = beliefs[k];
        if (b.size() != grades)
            throw Error(ErrorCode::InvalidInput, "belief rows differ in length", "beliefs[" + std::to_string(k) + "]");
        const double w = weights[k];
        const double unassigned = 1.0 - w * std::accumulate(b.begin(), b.end(), 0.0);
        for (std::size_t j = 0; j < grades; ++j) p[j] *= w * b[j] + unassigned;
        q *= unassigned;
        r *= 1.0 - w;
    }

    const double denom = std::accumulate(p.begin(), p.end(), 0.0) - static_cast<double>(grades - 1) * q;
    if (!(denom > 0.0))
        throw Error(ErrorCode::AggregationDegenerate,
                    "ER normalisation denominator is " + std::to_string(denom));
    const double mu = 1.0 / denom;
    const double scale = 1.0 - mu * r;
    if (!(scale > 0.0))
        throw Error(ErrorCode::AggregationDegenerate,
                    "ER weight normalisation 1 - mu*R is " + std::to_string(scale) +
                        "; the weights concentrate on rules carrying no information");

    Aggregation out;
    out.beliefs.resize(grades);
    double sum = 0.0;
    for (std::size_t j = 0; j < grades; ++j) {
        out.beliefs[j] = std::clamp(mu * (p[j] - q) / scale, 0.0, 1.0);
        sum += out.beliefs[j];
    }
    out.residual = std::max(0.0, 1.0 - sum);
    return out;
}

/// Consequent utilities rescaled so the lowest grade is 0 and the highest 100.
inline std::vector<double> scaled_utilities(const ConsequentDef& consequent) {
    if (consequent.grades.size() < 2)
        throw Error(ErrorCode::Schema, "consequent needs at least 2 grades");
    auto by_utility = [](const ReferentialGrade& a, const ReferentialGrade& b) { return a.utility < b.utility; };
    auto [lo, hi] = std::minmax_element(consequent.grades.begin(), consequent.grades.end(), by_utility);
    const double span = hi->utility - lo->utility;
    if (!(span > 0.0))
        throw Error(ErrorCode::Schema, "consequent utilities are all equal");
    std::vector<double> u;
    u.reserve(consequent.grades.size());
    for (const auto& g : consequent.grades) u.push_back(100.0 * (g.utility - lo->utility) / span);
    return u;
}

struct UtilityScore {
    double point = 0.0;
    double low = 0.0;
    double high = 0.0;
};

/// Expected utility on 0-100. `utilities` must already be on that scale; the
/// residual is reported as the [worst, best] interval around the point score.
inline UtilityScore expected_utility(std::span<const double> beliefs, double residual, std::span<const double> utilities) {
    if (beliefs.size() != utilities.size())
        throw Error(ErrorCode::InvalidInput, "belief and utility vectors differ in length");
    UtilityScore s;
    for (std::size_t j = 0; j < beliefs.size(); ++j) s.point += beliefs[j] * utilities[j];
    const auto [lo, hi] = std::minmax_element(utilities.begin(), utilities.end());
    s.low = s.point + residual * *lo;
    s.high = s.point + residual * *hi;
    return s;
}

/// Full pipeline: transform, activate, update, aggregate, score.
inline AssessmentResult assess(const RuleBase& rb, const InputMap& inputs) {
    const bool any = std::any_of(inputs.begin(), inputs.end(), [](const auto& kv) { return kv.second.has_value(); });
    if (!any)
        throw Error(ErrorCode::InvalidInput, "at least one input value is required", "inputs");
    if (rb.rules.empty())
        throw Error(ErrorCode::Schema, "rule base has no rules");

    const auto ti = transform_all(rb, inputs);
    AssessmentResult result;
    result.activations = activation_weights(rb, ti);
    const auto adjusted = update_beliefs_incomplete(rb, ti);
    auto agg = er_aggregate(result.activations, adjusted);
    const auto utilities = scaled_utilities(rb.consequent);
    const auto score = expected_utility(agg.beliefs, agg.residual, utilities);
    result.beliefs = std::move(agg.beliefs);
    result.residual = agg.residual;
    result.score = score.point;
    result.score_low = score.low;
    result.score_high = score.high;
    return result;
}

} // namespace brb
