#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace brb {

/// Closed interval used only for presenting a grade (e.g. High = [0.7, 1.0]).
struct Band {
    double low = 0.0;
    double high = 0.0;

    bool contains(double x) const noexcept { return low <= x && x <= high; }
    friend bool operator==(const Band&, const Band&) = default;
};

/// A named anchor point on an attribute's scale.
struct ReferentialGrade {
    std::string label;
    double utility = 0.0;
    std::optional<Band> band;

    friend bool operator==(const ReferentialGrade&, const ReferentialGrade&) = default;
};

/// An antecedent attribute. Grades are listed with strictly monotone utilities
/// (either orientation).
struct AttributeDef {
    std::string name;
    std::vector<ReferentialGrade> grades;
    double weight = 1.0;

    std::size_t grade_count() const noexcept { return grades.size(); }
    friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

/// The consequent scale. Utilities are rescaled to 0-100 for scoring.
struct ConsequentDef {
    std::string name;
    std::vector<ReferentialGrade> grades;

    std::size_t grade_count() const noexcept { return grades.size(); }
    friend bool operator==(const ConsequentDef&, const ConsequentDef&) = default;
};

struct BeliefRule {
    std::vector<std::size_t> antecedents; // grade index per attribute
    double theta = 1.0;                   // rule weight
    std::vector<double> delta;            // attribute weight per attribute
    std::vector<double> beliefs;          // belief degree per consequent grade

    friend bool operator==(const BeliefRule&, const BeliefRule&) = default;
};

struct RuleBase {
    std::string name;
    std::string version;
    std::vector<AttributeDef> attributes;
    ConsequentDef consequent;
    std::vector<BeliefRule> rules;

    /// Index of the attribute called `name`, if any.
    std::optional<std::size_t> find_attribute(const std::string& attr) const {
        for (std::size_t i = 0; i < attributes.size(); ++i)
            if (attributes[i].name == attr) return i;
        return std::nullopt;
    }

    friend bool operator==(const RuleBase&, const RuleBase&) = default;
};

/// Crisp inputs keyed by attribute name; nullopt marks a value the user left out.
using InputMap = std::map<std::string, std::optional<double>>;

struct AttributeMatch {
    std::vector<double> matching; // one matching degree per grade
    double completeness = 0.0;    // sum of `matching`
};

/// Per-attribute matching degrees, in rule-base attribute order.
struct TransformedInput {
    std::vector<AttributeMatch> attributes;
};

struct AssessmentResult {
    std::vector<double> beliefs;     // per consequent grade
    double residual = 0.0;           // belief assigned to no grade
    double score = 0.0;              // residual contributes nothing
    double score_low = 0.0;          // residual on the worst grade
    double score_high = 0.0;         // residual on the best grade
    std::vector<double> activations; // per rule, sums to 1
};

} // namespace brb
