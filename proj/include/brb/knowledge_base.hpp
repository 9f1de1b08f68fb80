#pragma once

#include "brb/error.hpp"
#include "brb/inference.hpp"
#include "brb/types.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <set>
#include <string>
#include <vector>

namespace brb {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kGridLimit = 1e6;
inline constexpr double kBeliefSumTolerance = 1e-9;

/// A rule base as stored on disk, with bookkeeping fields.
struct RuleBaseDocument {
    int schema_version = kSchemaVersion;
    RuleBase rule_base;
    std::string created;  // ISO-8601 UTC
    std::string modified; // ISO-8601 UTC
    std::string notes;

    friend bool operator==(const RuleBaseDocument&, const RuleBaseDocument&) = default;
};

enum class Severity { Error, Warning };

struct Finding {
    Severity severity = Severity::Error;
    std::string location;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& f : findings) n += f.severity == Severity::Error;
        return n;
    }
    std::size_t warning_count() const { return findings.size() - error_count(); }
    bool ok() const { return error_count() == 0; }
};

namespace detail {

inline std::string shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline bool unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

inline void validate_grades(const std::vector<ReferentialGrade>& grades, const std::string& where,
                            ValidationReport& report) {
    auto error = [&](std::string loc, std::string msg) {
        report.findings.push_back({Severity::Error, std::move(loc), std::move(msg)});
    };
    if (grades.size() < 2) {
        error(where, "at least 2 grades required, found " + std::to_string(grades.size()));
        return;
    }
    std::set<std::string> labels;
    for (std::size_t j = 0; j < grades.size(); ++j) {
        const auto loc = where + "[" + std::to_string(j) + "]";
        const auto& g = grades[j];
        if (g.label.empty()) error(loc + ".label", "empty grade label");
        if (!labels.insert(g.label).second) error(loc + ".label", "duplicate grade label '" + g.label + "'");
        if (!std::isfinite(g.utility)) error(loc + ".utility", "utility is not finite");
        if (g.band && !g.band->contains(g.utility))
            error(loc + ".band", "band [" + shortest(g.band->low) + ", " + shortest(g.band->high) +
                                     "] does not contain utility " + shortest(g.utility));
    }
    const bool decreasing = grades[0].utility > grades[1].utility;
    for (std::size_t j = 0; j + 1 < grades.size(); ++j) {
        const double a = grades[j].utility;
        const double b = grades[j + 1].utility;
        if (decreasing ? !(a > b) : !(a < b)) {
            error(where, "grade utilities are not strictly monotone");
            break;
        }
    }
}

} // namespace detail

/// Checks every structural and belief-structure constraint. Findings are
/// data; this never throws.
inline ValidationReport validate(const RuleBase& rb) {
    ValidationReport report;
    auto error = [&](std::string loc, std::string msg) {
        report.findings.push_back({Severity::Error, std::move(loc), std::move(msg)});
    };
    auto warn = [&](std::string loc, std::string msg) {
        report.findings.push_back({Severity::Warning, std::move(loc), std::move(msg)});
    };

    if (rb.attributes.empty()) error("attributes", "rule base has no attributes");
    std::set<std::string> names;
    for (std::size_t i = 0; i < rb.attributes.size(); ++i) {
        const auto& a = rb.attributes[i];
        const auto loc = "attributes[" + std::to_string(i) + "]";
        if (a.name.empty()) error(loc + ".name", "empty attribute name");
        if (!names.insert(a.name).second) error(loc + ".name", "duplicate attribute name '" + a.name + "'");
        if (!detail::unit_interval(a.weight)) error(loc + ".weight", "weight " + detail::shortest(a.weight) + " outside [0,1]");
        detail::validate_grades(a.grades, loc + ".grades", report);
    }
    detail::validate_grades(rb.consequent.grades, "consequent.grades", report);

    if (rb.rules.empty()) error("rules", "rule base has no rules");
    const std::size_t n_attr = rb.attributes.size();
    const std::size_t n_cons = rb.consequent.grades.size();
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t k = 0; k < rb.rules.size(); ++k) {
        const auto& r = rb.rules[k];
        const auto loc = "rules[" + std::to_string(k) + "]";
        bool shape_ok = true;
        if (r.antecedents.size() != n_attr) {
            error(loc + ".antecedents", "expected " + std::to_string(n_attr) + " grade indices, found " +
                                            std::to_string(r.antecedents.size()));
            shape_ok = false;
        } else {
            for (std::size_t i = 0; i < n_attr; ++i) {
                if (r.antecedents[i] >= rb.attributes[i].grades.size()) {
                    error(loc + ".antecedents[" + std::to_string(i) + "]",
                          "grade index " + std::to_string(r.antecedents[i]) + " unknown for attribute '" +
                              rb.attributes[i].name + "'");
                    shape_ok = false;
                }
            }
        }
        if (shape_ok && !seen.insert(r.antecedents).second)
            error(loc + ".antecedents", "duplicate antecedent combination");

        if (!detail::unit_interval(r.theta)) error(loc + ".theta", "rule weight " + detail::shortest(r.theta) + " outside [0,1]");

        if (r.delta.size() != n_attr) {
            error(loc + ".delta", "expected " + std::to_string(n_attr) + " attribute weights, found " +
                                      std::to_string(r.delta.size()));
        } else {
            bool any_positive = false;
            for (std::size_t i = 0; i < n_attr; ++i) {
                if (!detail::unit_interval(r.delta[i]))
                    error(loc + ".delta[" + std::to_string(i) + "]",
                          "attribute weight " + detail::shortest(r.delta[i]) + " outside [0,1]");
                any_positive = any_positive || r.delta[i] > 0.0;
            }
            if (!any_positive && n_attr > 0) warn(loc + ".delta", "all attribute weights are zero");
        }

        if (r.beliefs.size() != n_cons) {
            error(loc + ".beliefs", "expected " + std::to_string(n_cons) + " belief degrees, found " +
                                        std::to_string(r.beliefs.size()));
        } else {
            double sum = 0.0;
            for (std::size_t j = 0; j < n_cons; ++j) {
                if (!detail::unit_interval(r.beliefs[j]))
                    error(loc + ".beliefs[" + std::to_string(j) + "]",
                          "belief degree " + detail::shortest(r.beliefs[j]) + " outside [0,1]");
                sum += r.beliefs[j];
            }
            if (sum > 1.0 + kBeliefSumTolerance)
                error(loc + ".beliefs", "belief sum " + detail::shortest(sum) + " > 1");
        }
    }

    if (n_attr > 0) {
        double grid = 1.0;
        for (const auto& a : rb.attributes) grid *= static_cast<double>(a.grades.size());
        const auto covered = static_cast<double>(seen.size());
        if (covered < grid)
            warn("rules", detail::shortest(covered) + "/" + detail::shortest(grid) + " antecedent combinations covered");
    }
    return report;
}

/// One rule per point of the full grade grid, with theta = delta = 1 and
/// consequent beliefs obtained by placing the mean normalised antecedent
/// utility on the consequent scale and transforming it like any input.
inline RuleBase generate_initial(const std::vector<AttributeDef>& attributes, const ConsequentDef& consequent) {
    if (attributes.empty())
        throw Error(ErrorCode::Schema, "at least one attribute is required", "attributes");
    double grid = 1.0;
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i].grades.size() < 2)
            throw Error(ErrorCode::Schema, "attribute '" + attributes[i].name + "' needs at least 2 grades",
                        "attributes[" + std::to_string(i) + "]");
        grid *= static_cast<double>(attributes[i].grades.size());
    }
    if (grid > kGridLimit)
        throw Error(ErrorCode::GridTooLarge,
                    "grade grid of " + detail::shortest(grid) + " rules exceeds the limit of " + detail::shortest(kGridLimit));
    if (consequent.grades.size() < 2)
        throw Error(ErrorCode::Schema, "consequent needs at least 2 grades", "consequent");

    // Normalised position (0 = lowest utility, 1 = highest) of every grade.
    std::vector<std::vector<double>> position(attributes.size());
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        const auto& g = attributes[i].grades;
        double lo = g.front().utility, hi = g.front().utility;
        for (const auto& x : g) {
            lo = std::min(lo, x.utility);
            hi = std::max(hi, x.utility);
        }
        for (const auto& x : g) position[i].push_back(hi > lo ? (x.utility - lo) / (hi - lo) : 0.0);
    }
    double c_lo = consequent.grades.front().utility, c_hi = c_lo;
    for (const auto& x : consequent.grades) {
        c_lo = std::min(c_lo, x.utility);
        c_hi = std::max(c_hi, x.utility);
    }

    RuleBase rb;
    rb.attributes = attributes;
    rb.consequent = consequent;
    rb.rules.reserve(static_cast<std::size_t>(grid));

    std::vector<std::size_t> point(attributes.size(), 0);
    for (;;) {
        double mean = 0.0;
        for (std::size_t i = 0; i < point.size(); ++i) mean += position[i][point[i]];
        mean /= static_cast<double>(point.size());

        BeliefRule rule;
        rule.antecedents = point;
        rule.theta = 1.0;
        rule.delta.assign(attributes.size(), 1.0);
        rule.beliefs = transform_input(consequent.grades, c_lo + mean * (c_hi - c_lo));
        rb.rules.push_back(std::move(rule));

        // Odometer increment, last attribute fastest.
        std::size_t i = point.size();
        while (i > 0) {
            --i;
            if (++point[i] < attributes[i].grades.size()) break;
            point[i] = 0;
            if (i == 0) return rb;
        }
    }
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace templates {

inline std::vector<ReferentialGrade> three_grades(std::string top, std::string mid, std::string low) {
    return {
        {std::move(top), 1.0, Band{0.7, 1.0}},
        {std::move(mid), 0.5, Band{0.4, 0.6}},
        {std::move(low), 0.0, Band{0.0, 0.3}},
    };
}

inline ConsequentDef risk_consequent(std::string name) {
    return {std::move(name),
            {{"High", 100.0, Band{70.0, 100.0}}, {"Mid", 50.0, Band{40.0, 60.0}}, {"Low", 0.0, Band{0.0, 30.0}}}};
}

/// Behavioural-impact rule base: five three-grade antecedents scored 1 / 0.5 / 0.
inline RuleBaseDocument behavioral_impact() {
    std::vector<AttributeDef> attrs = {
        {"LandType", three_grades("High", "Mid", "Low"), 1.0},
        {"WaterRemoval", three_grades("Early", "Average", "Late"), 1.0},
        {"Drainage", three_grades("Well", "Good", "Poor"), 1.0},
        {"SoilTexture", three_grades("Sandy", "Silt", "Clay"), 1.0},
        {"pH", three_grades("Acid", "Neutral", "Alkynes"), 1.0},
    };
    RuleBaseDocument doc;
    doc.rule_base = generate_initial(attrs, risk_consequent("BehavioralImpact"));
    doc.rule_base.name = "behavioral-impact";
    doc.rule_base.version = "1";
    doc.notes = "Evaluation grades 1 / 0.5 / 0 per antecedent with display bands High [0.7,1.0], "
                "Mid [0.4,0.6], Low [0.0,0.3]. Initial consequent beliefs from mean-utility interpolation.";
    return doc;
}

/// Five crime-zone factors (outside-visitor rate, resident density,
/// unemployment, education rate, traffic). The choice of five factors is
/// editorial. Every factor is scored so that 1 means the highest contribution
/// to crime risk; for EducationRate that is the lowest education level.
inline RuleBaseDocument crime_factors() {
    std::vector<AttributeDef> attrs = {
        {"OutsideVisitorRate", three_grades("High", "Mid", "Low"), 1.0},
        {"ResidentDensity", three_grades("High", "Mid", "Low"), 1.0},
        {"Unemployment", three_grades("High", "Mid", "Low"), 1.0},
        {"EducationRate", three_grades("High", "Mid", "Low"), 1.0},
        {"Traffic", three_grades("High", "Mid", "Low"), 1.0},
    };
    RuleBaseDocument doc;
    doc.rule_base = generate_initial(attrs, risk_consequent("CrimeZoneRisk"));
    doc.rule_base.name = "crime-factors";
    doc.rule_base.version = "1";
    doc.notes = "Editorial selection of five crime-zone factors. Inputs are risk contributions on 0..1: "
                "1 = High risk contribution. EducationRate is entered inverted (low education = 1).";
    return doc;
}

} // namespace templates

} // namespace brb
