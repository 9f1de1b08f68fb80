#pragma once

// Structured-text (JSON) encodings of rule-base documents, assessment results,
// validation reports and evaluation reports. Field names are part of the file
// and wire contract.

#include "brb/error.hpp"
#include "brb/evaluation.hpp"
#include "brb/knowledge_base.hpp"
#include "brb/types.hpp"

#include "json.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace brb::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::Schema, where + " must be an object", where);
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::Schema, "missing field '" + std::string(key) + "'", where + "." + key);
    return *it;
}

inline double number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw Error(ErrorCode::Schema, where + " must be a number", where);
    return j.get<double>();
}

inline std::string text(const Json& j, const std::string& where) {
    if (!j.is_string()) throw Error(ErrorCode::Schema, where + " must be a string", where);
    return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& where) {
    if (!j.is_array()) throw Error(ErrorCode::Schema, where + " must be an array", where);
    return j;
}

inline std::vector<double> numbers(const Json& j, const std::string& where) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(j, where).size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::string optional_text(const Json& j, const char* key) {
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

inline Json grades_to_json(const std::vector<ReferentialGrade>& grades) {
    Json arr = Json::array();
    for (const auto& g : grades) {
        Json o;
        o["label"] = g.label;
        o["utility"] = g.utility;
        if (g.band) o["band"] = Json::array({g.band->low, g.band->high});
        arr.push_back(std::move(o));
    }
    return arr;
}

inline std::vector<ReferentialGrade> grades_from_json(const Json& j, const std::string& where) {
    std::vector<ReferentialGrade> out;
    for (std::size_t i = 0; i < array(j, where).size(); ++i) {
        const auto loc = where + "[" + std::to_string(i) + "]";
        ReferentialGrade g;
        g.label = text(require(j[i], "label", loc), loc + ".label");
        g.utility = number(require(j[i], "utility", loc), loc + ".utility");
        if (auto it = j[i].find("band"); it != j[i].end() && !it->is_null()) {
            auto b = numbers(*it, loc + ".band");
            if (b.size() != 2) throw Error(ErrorCode::Schema, "band must hold exactly two numbers", loc + ".band");
            g.band = Band{b[0], b[1]};
        }
        out.push_back(std::move(g));
    }
    return out;
}

inline Json rule_to_json(const BeliefRule& r) {
    Json o;
    o["antecedents"] = r.antecedents;
    o["theta"] = r.theta;
    o["delta"] = r.delta;
    o["beliefs"] = r.beliefs;
    return o;
}

} // namespace detail

inline Json to_json(const RuleBaseDocument& doc, bool include_rules = true) {
    const auto& rb = doc.rule_base;
    Json j;
    j["schema_version"] = doc.schema_version;
    j["name"] = rb.name;
    j["version"] = rb.version;
    j["created"] = doc.created;
    j["modified"] = doc.modified;
    j["notes"] = doc.notes;
    j["consequent"] = {{"name", rb.consequent.name}, {"grades", detail::grades_to_json(rb.consequent.grades)}};
    Json attrs = Json::array();
    for (const auto& a : rb.attributes)
        attrs.push_back({{"name", a.name}, {"weight", a.weight}, {"grades", detail::grades_to_json(a.grades)}});
    j["attributes"] = std::move(attrs);
    if (include_rules) {
        Json rules = Json::array();
        for (const auto& r : rb.rules) rules.push_back(detail::rule_to_json(r));
        j["rules"] = std::move(rules);
    }
    return j;
}

/// Canonical file text: two-space indentation, one rule per line, trailing
/// newline. Doubles are written in shortest round-trip form.
inline std::string dump_document(const RuleBaseDocument& doc) {
    std::string head = to_json(doc, false).dump(2);
    // Reopen the object to append the rules array as its final member.
    head.erase(head.find_last_of('}'));
    while (!head.empty() && (head.back() == '\n' || head.back() == ' ')) head.pop_back();
    head += ",\n  \"rules\": [";
    const auto& rules = doc.rule_base.rules;
    for (std::size_t k = 0; k < rules.size(); ++k) {
        head += k ? ",\n    " : "\n    ";
        head += detail::rule_to_json(rules[k]).dump();
    }
    head += rules.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return head;
}

inline RuleBaseDocument document_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::Schema, "rule base document must be an object");
    RuleBaseDocument doc;
    const auto& sv = detail::require(j, "schema_version", "");
    if (!sv.is_number_integer()) throw Error(ErrorCode::Schema, "schema_version must be an integer", "schema_version");
    doc.schema_version = sv.get<int>();
    if (doc.schema_version != kSchemaVersion)
        throw Error(ErrorCode::Schema, "unsupported schema_version " + std::to_string(doc.schema_version), "schema_version");
    auto& rb = doc.rule_base;
    rb.name = detail::text(detail::require(j, "name", ""), "name");
    rb.version = detail::optional_text(j, "version");
    doc.created = detail::optional_text(j, "created");
    doc.modified = detail::optional_text(j, "modified");
    doc.notes = detail::optional_text(j, "notes");

    const auto& cons = detail::require(j, "consequent", "");
    rb.consequent.name = detail::optional_text(cons, "name");
    rb.consequent.grades = detail::grades_from_json(detail::require(cons, "grades", "consequent"), "consequent.grades");

    const auto& attrs = detail::array(detail::require(j, "attributes", ""), "attributes");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        const auto loc = "attributes[" + std::to_string(i) + "]";
        AttributeDef a;
        a.name = detail::text(detail::require(attrs[i], "name", loc), loc + ".name");
        a.weight = detail::number(detail::require(attrs[i], "weight", loc), loc + ".weight");
        a.grades = detail::grades_from_json(detail::require(attrs[i], "grades", loc), loc + ".grades");
        rb.attributes.push_back(std::move(a));
    }

    const auto& rules = detail::array(detail::require(j, "rules", ""), "rules");
    for (std::size_t k = 0; k < rules.size(); ++k) {
        const auto loc = "rules[" + std::to_string(k) + "]";
        BeliefRule r;
        const auto& ants = detail::array(detail::require(rules[k], "antecedents", loc), loc + ".antecedents");
        for (std::size_t i = 0; i < ants.size(); ++i) {
            if (!ants[i].is_number_unsigned())
                throw Error(ErrorCode::Schema, "grade index must be a non-negative integer",
                            loc + ".antecedents[" + std::to_string(i) + "]");
            r.antecedents.push_back(ants[i].get<std::size_t>());
        }
        r.theta = detail::number(detail::require(rules[k], "theta", loc), loc + ".theta");
        r.delta = detail::numbers(detail::require(rules[k], "delta", loc), loc + ".delta");
        r.beliefs = detail::numbers(detail::require(rules[k], "beliefs", loc), loc + ".beliefs");
        rb.rules.push_back(std::move(r));
    }
    return doc;
}

inline RuleBaseDocument parse_document(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Schema, std::string("malformed rule base document: ") + e.what());
    }
    return document_from_json(j);
}

inline Json to_json(const ValidationReport& report) {
    Json findings = Json::array();
    for (const auto& f : report.findings)
        findings.push_back({{"severity", f.severity == Severity::Error ? "error" : "warning"},
                            {"location", f.location},
                            {"message", f.message}});
    return {{"errors", report.error_count()}, {"warnings", report.warning_count()}, {"findings", std::move(findings)}};
}

/// Indices of the `limit` most strongly activated rules, strongest first.
inline std::vector<std::size_t> top_rules(const AssessmentResult& result, std::size_t limit) {
    std::vector<std::size_t> idx(result.activations.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return result.activations[a] > result.activations[b]; });
    idx.erase(std::remove_if(idx.begin(), idx.end(), [&](std::size_t k) { return result.activations[k] <= 0.0; }),
              idx.end());
    if (idx.size() > limit) idx.resize(limit);
    return idx;
}

inline Json rule_summary(const RuleBase& rb, std::size_t k, double weight) {
    Json ants = Json::object();
    const auto& rule = rb.rules[k];
    for (std::size_t i = 0; i < rb.attributes.size(); ++i)
        ants[rb.attributes[i].name] = rb.attributes[i].grades[rule.antecedents[i]].label;
    return {{"rule", k}, {"weight", weight}, {"antecedents", std::move(ants)}, {"beliefs", rule.beliefs}};
}

inline Json to_json(const RuleBase& rb, const AssessmentResult& result, std::size_t top = 5) {
    Json grades = Json::array();
    for (const auto& g : rb.consequent.grades) grades.push_back(g.label);
    Json top_json = Json::array();
    for (auto k : top_rules(result, top)) top_json.push_back(rule_summary(rb, k, result.activations[k]));
    Json j;
    j["consequent"] = rb.consequent.name;
    j["grades"] = std::move(grades);
    j["beliefs"] = result.beliefs;
    j["residual"] = result.residual;
    j["score"] = result.score;
    j["score_interval"] = Json::array({result.score_low, result.score_high});
    j["activations"] = result.activations;
    j["top_rules"] = std::move(top_json);
    return j;
}

inline Json to_json(const eval::RocResult& roc) {
    Json pts = Json::array();
    for (const auto& p : roc.points) pts.push_back(Json::array({p.fpr, p.tpr}));
    Json j;
    j["auc"] = roc.auc;
    j["ci"] = Json::array({roc.ci_low, roc.ci_high});
    j["n_pos"] = roc.n_pos;
    j["n_neg"] = roc.n_neg;
    j["points"] = std::move(pts);
    return j;
}

inline Json to_json(const eval::EvaluationReport& report) {
    Json cols = Json::array();
    for (const auto& c : report.columns) {
        Json o = {{"name", c.name}};
        o.update(to_json(c.roc));
        cols.push_back(std::move(o));
    }
    Json j;
    j["columns"] = std::move(cols);
    j["ranking"] = report.ranking;
    j["labels"] = report.labels;
    j["derived_labels"] = report.derived_labels;
    return j;
}

/// Cases from the wire shape: an array of flat objects holding `id`,
/// optional `benchmark` and one number per score column.
inline std::vector<eval::ScoredCase> cases_from_json(const Json& rows) {
    std::vector<eval::ScoredCase> out;
    for (std::size_t r = 0; r < detail::array(rows, "rows").size(); ++r) {
        const auto& row = rows[r];
        const auto loc = "rows[" + std::to_string(r) + "]";
        if (!row.is_object()) throw Error(ErrorCode::InvalidInput, loc + " must be an object", loc);
        eval::ScoredCase c;
        c.id = std::to_string(r + 1);
        for (const auto& [key, value] : row.items()) {
            if (key == "id") {
                c.id = value.is_string() ? value.get<std::string>() : value.dump();
            } else if (key == "benchmark") {
                if (value.is_null()) continue;
                if (!value.is_number_integer() || (value.get<int>() != 0 && value.get<int>() != 1))
                    throw Error(ErrorCode::InvalidInput, "benchmark must be 0 or 1", loc + ".benchmark");
                c.benchmark = value.get<int>();
            } else {
                if (!value.is_number()) throw Error(ErrorCode::InvalidInput, key + " must be a number", loc + "." + key);
                c.scores[key] = value.get<double>();
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace brb::io
