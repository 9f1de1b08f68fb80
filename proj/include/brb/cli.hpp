#pragma once

// Command-line front end. Exit codes: 0 ok, 2 input or validation problem,
// 3 inference failure (no rule activated, degenerate aggregation or labels).

#include "brb/csv.hpp"
#include "brb/error.hpp"
#include "brb/evaluation.hpp"
#include "brb/inference.hpp"
#include "brb/knowledge_base.hpp"
#include "brb/serialization.hpp"
#include "brb/service.hpp"
#include "brb/store.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace brb::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kInferenceError = 3 };

enum class Format { Human, Structured };

struct CliConfig {
    std::string kb_path;
    std::vector<std::string> bindings;
    Format format = Format::Human;
    int port = 8080;
};

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NoRuleActivated:
        case ErrorCode::AggregationDegenerate:
        case ErrorCode::DegenerateLabels: return kInferenceError;
        default: return kInputError;
    }
}

inline std::string fixed2(double x) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << x;
    return ss.str();
}

inline std::string full_precision(double x) { return brb::detail::shortest(x); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path, path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v && *v) return std::string(v);
    return std::nullopt;
}

inline void print_report(std::ostream& os, const ValidationReport& report) {
    for (const auto& f : report.findings)
        os << (f.severity == Severity::Error ? "error" : "warning") << ": " << f.location << ": " << f.message << "\n";
    os << report.error_count() << " error(s), " << report.warning_count() << " warning(s)\n";
}

/// Parses NAME=VALUE bindings. An empty VALUE leaves the attribute unset.
inline InputMap parse_bindings(const std::vector<std::string>& bindings) {
    InputMap inputs;
    for (const auto& b : bindings) {
        const auto eq = b.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorCode::InvalidInput, "binding '" + b + "' is not NAME=VALUE", "--in");
        const auto name = csv::trim(std::string_view(b).substr(0, eq));
        const auto value = csv::trim(std::string_view(b).substr(eq + 1));
        if (value.empty()) {
            inputs[name] = std::nullopt;
            continue;
        }
        auto v = csv::parse_number(value);
        if (!v) throw Error(ErrorCode::InvalidInput, "value '" + value + "' for " + name + " is not a number", "inputs." + name);
        inputs[name] = *v;
    }
    return inputs;
}

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(std::vector<std::string> args) {
        CLI::App app{"Belief-rule-base assessment engine"};
        app.require_subcommand(1, 1);
        std::string format_name = "human";
        auto add_format = [&](CLI::App* sub) {
            sub->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"human", "structured"}));
        };

        auto* assess_cmd = app.add_subcommand("assess", "Assess one set of inputs");
        assess_cmd->add_option("--kb", cfg_.kb_path, "Rule base file (default: latest in $BRB_KB_STORE)");
        assess_cmd->add_option("--in", cfg_.bindings, "Input binding NAME=VALUE (repeatable)");
        add_format(assess_cmd);

        std::string cases_path, out_path;
        auto* batch_cmd = app.add_subcommand("batch", "Score every row of a case file");
        batch_cmd->add_option("--kb", cfg_.kb_path, "Rule base file");
        batch_cmd->add_option("cases", cases_path, "CSV with one column per attribute")->required();
        batch_cmd->add_option("--out", out_path, "Output CSV (default: stdout)");

        std::string cols;
        auto* eval_cmd = app.add_subcommand("eval", "ROC/AUC comparison of score columns");
        eval_cmd->add_option("cases", cases_path, "CSV with id, score columns and optional benchmark")->required();
        eval_cmd->add_option("--cols", cols, "Comma-separated score columns (default: all)");
        add_format(eval_cmd);

        auto* kb_cmd = app.add_subcommand("kb", "Rule base management");
        kb_cmd->require_subcommand(1, 1);
        std::string template_name = "table1";
        auto* kb_init = kb_cmd->add_subcommand("init", "Generate an initial rule base");
        kb_init->add_option("--template", template_name, "table1 | behavioral-impact | crime-factors")
            ->check(CLI::IsMember({"table1", "behavioral-impact", "crime-factors"}));
        kb_init->add_option("--out", out_path, "Output file")->required();
        std::string validate_path;
        auto* kb_validate = kb_cmd->add_subcommand("validate", "Validate a rule base file");
        kb_validate->add_option("file", validate_path, "Rule base file");
        kb_validate->add_option("--kb", cfg_.kb_path, "Rule base file");
        add_format(kb_validate);
        auto* kb_save = kb_cmd->add_subcommand("save", "Commit a rule base file to $BRB_KB_STORE");
        kb_save->add_option("--kb", cfg_.kb_path, "Rule base file")->required();
        auto* kb_versions = kb_cmd->add_subcommand("versions", "List versions in $BRB_KB_STORE");
        add_format(kb_versions);

        std::string host = "127.0.0.1", static_dir;
        std::optional<int> port;
        auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
        serve_cmd->add_option("--port", port, "Port (default: $BRB_PORT or 8080)");
        serve_cmd->add_option("--kb", cfg_.kb_path, "Seed the store with this rule base when it is empty");
        serve_cmd->add_option("--host", host, "Bind address");
        serve_cmd->add_option("--static", static_dir, "Console bundle directory");

        std::vector<const char*> argv{"brb"};
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp&) {
            out_ << app.help();
            return kOk;
        } catch (const CLI::ParseError& e) {
            err_ << e.what() << "\n";
            return kInputError;
        }
        cfg_.format = format_name == "structured" ? Format::Structured : Format::Human;

        try {
            if (*assess_cmd) return cmd_assess();
            if (*batch_cmd) return cmd_batch(cases_path, out_path);
            if (*eval_cmd) return cmd_eval(cases_path, cols);
            if (*kb_init) return cmd_kb_init(template_name, out_path);
            if (*kb_validate) return cmd_kb_validate(validate_path.empty() ? cfg_.kb_path : validate_path);
            if (*kb_save) return cmd_kb_save();
            if (*kb_versions) return cmd_kb_versions();
            if (*serve_cmd) {
                if (port) cfg_.port = *port;
                else if (auto p = env("BRB_PORT")) cfg_.port = std::stoi(*p);
                return cmd_serve(host, static_dir);
            }
        } catch (const ValidationError& e) {
            err_ << e.what() << "\n";
            print_report(err_, e.report());
            return kInputError;
        } catch (const Error& e) {
            err_ << to_string(e.code()) << ": " << e.what() << "\n";
            return exit_code_for(e.code());
        }
        return kInputError;
    }

private:
    KbStore open_store() const {
        auto dir = env("BRB_KB_STORE");
        if (!dir) throw Error(ErrorCode::InvalidInput, "BRB_KB_STORE is not set", "BRB_KB_STORE");
        return KbStore(*dir);
    }

    /// The rule base named by --kb, or the latest stored one. Invalid rule
    /// bases are rejected with their report.
    RuleBaseDocument load_kb() const {
        RuleBaseDocument doc;
        if (!cfg_.kb_path.empty()) doc = io::parse_document(read_file(cfg_.kb_path));
        else doc = open_store().load_latest();
        auto report = validate(doc.rule_base);
        if (!report.ok()) throw ValidationError(std::move(report));
        return doc;
    }

    int cmd_assess() {
        const auto doc = load_kb();
        const auto& rb = doc.rule_base;
        const auto result = assess(rb, parse_bindings(cfg_.bindings));
        if (cfg_.format == Format::Structured) {
            out_ << io::to_json(rb, result).dump(2) << "\n";
            return kOk;
        }
        out_ << "Rule base: " << rb.name << (rb.version.empty() ? "" : " v" + rb.version) << "\n";
        out_ << "Score:     " << fixed2(result.score);
        if (result.residual > 0.0)
            out_ << "  (interval " << fixed2(result.score_low) << " - " << fixed2(result.score_high) << ")";
        out_ << "\nBeliefs:  ";
        for (std::size_t j = 0; j < result.beliefs.size(); ++j)
            out_ << " " << rb.consequent.grades[j].label << " " << fixed2(result.beliefs[j]);
        out_ << "\nResidual:  " << fixed2(result.residual) << "\n";
        out_ << "Top rules:\n";
        for (auto k : io::top_rules(result, 5)) {
            out_ << "  #" << k << "  w=" << fixed2(result.activations[k]) << "  ";
            for (std::size_t i = 0; i < rb.attributes.size(); ++i)
                out_ << (i ? ", " : "") << rb.attributes[i].name << "="
                     << rb.attributes[i].grades[rb.rules[k].antecedents[i]].label;
            out_ << "\n";
        }
        return kOk;
    }

    int cmd_batch(const std::string& cases_path, const std::string& out_path) {
        const auto doc = load_kb();
        const auto& rb = doc.rule_base;
        auto table = csv::parse(read_file(cases_path));
        if (table.rows.empty()) throw Error(ErrorCode::InvalidInput, "case file has no rows", cases_path);

        std::vector<std::pair<std::size_t, std::string>> attr_cols;
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (rb.find_attribute(table.header[i])) attr_cols.emplace_back(i, table.header[i]);
        const auto inputs_col = table.column("inputs");
        if (attr_cols.empty() && !inputs_col)
            throw Error(ErrorCode::InvalidInput, "case file has no column named after a rule base attribute", cases_path);

        std::size_t scored = 0, inference_failures = 0;
        table.header.insert(table.header.end(), {"score", "residual", "error"});
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            auto& row = table.rows[r];
            const std::size_t width = table.header.size() - 3;
            row.resize(std::max(row.size(), width));
            std::string score, residual, error;
            try {
                InputMap inputs;
                for (const auto& [col, name] : attr_cols) {
                    if (row[col].empty()) {
                        inputs[name] = std::nullopt;
                        continue;
                    }
                    auto v = csv::parse_number(row[col]);
                    if (!v) throw Error(ErrorCode::InvalidInput, "'" + row[col] + "' is not a number for " + name);
                    inputs[name] = *v;
                }
                if (inputs_col && !row[*inputs_col].empty()) {
                    std::vector<std::string> bindings;
                    std::stringstream ss(row[*inputs_col]);
                    for (std::string b; std::getline(ss, b, ';');)
                        if (!csv::trim(b).empty()) bindings.push_back(b);
                    for (auto& [k, v] : parse_bindings(bindings)) inputs[k] = v;
                }
                const auto result = assess(rb, inputs);
                score = full_precision(result.score);
                residual = full_precision(result.residual);
                ++scored;
            } catch (const Error& e) {
                error = std::string(to_string(e.code())) + ": " + e.what();
                if (exit_code_for(e.code()) == kInferenceError) ++inference_failures;
            }
            row.resize(width);
            row.insert(row.end(), {score, residual, error});
        }

        const auto text = csv::write(table);
        if (out_path.empty()) {
            out_ << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + out_path, out_path);
            out << text;
        }
        err_ << scored << "/" << table.rows.size() << " row(s) scored\n";
        if (scored > 0) return kOk;
        return inference_failures > 0 ? kInferenceError : kInputError;
    }

    int cmd_eval(const std::string& cases_path, const std::string& cols) {
        const auto cases = csv::to_cases(csv::parse(read_file(cases_path)));
        std::vector<std::string> columns;
        std::stringstream ss(cols);
        for (std::string c; std::getline(ss, c, ',');)
            if (!csv::trim(c).empty()) columns.push_back(csv::trim(c));
        if (columns.empty() && !cases.empty())
            for (const auto& [name, _] : cases.front().scores) columns.push_back(name);

        const auto report = eval::compare(cases, columns);
        if (cfg_.format == Format::Structured) {
            out_ << io::to_json(report).dump(2) << "\n";
            return kOk;
        }
        out_ << cases.size() << " case(s), " << report.derived_labels << " benchmark label(s) derived from "
             << eval::kExpertColumn << "\n";
        out_ << std::left << std::setw(12) << "column" << std::setw(10) << "AUC" << std::setw(20) << "95% CI"
             << "pos/neg\n";
        for (const auto& c : report.columns) {
            out_ << std::left << std::setw(12) << c.name << std::setw(10) << fixed2(c.roc.auc)
                 << std::setw(20) << (fixed2(c.roc.ci_low) + " - " + fixed2(c.roc.ci_high)) << c.roc.n_pos << "/"
                 << c.roc.n_neg << "\n";
        }
        out_ << "ranking:";
        for (const auto& n : report.ranking) out_ << " " << n;
        out_ << "\n";
        return kOk;
    }

    int cmd_kb_init(const std::string& template_name, const std::string& out_path) {
        auto doc = template_name == "crime-factors" ? templates::crime_factors() : templates::behavioral_impact();
        doc.created = doc.modified = utc_timestamp();
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + out_path, out_path);
        out << io::dump_document(doc);
        out_ << "wrote " << out_path << " (" << doc.rule_base.rules.size() << " rules)\n";
        return kOk;
    }

    int cmd_kb_validate(const std::string& path) {
        if (path.empty()) throw Error(ErrorCode::InvalidInput, "no rule base file given", "file");
        const auto doc = io::parse_document(read_file(path));
        const auto report = validate(doc.rule_base);
        if (cfg_.format == Format::Structured) out_ << io::to_json(report).dump(2) << "\n";
        else print_report(out_, report);
        return report.ok() ? kOk : kInputError;
    }

    int cmd_kb_save() {
        auto doc = io::parse_document(read_file(cfg_.kb_path));
        auto store = open_store();
        const auto id = store.save(doc);
        out_ << "saved version " << id << "\n";
        return kOk;
    }

    int cmd_kb_versions() {
        const auto store = open_store();
        const auto versions = store.list_versions();
        if (cfg_.format == Format::Structured) {
            io::Json arr = io::Json::array();
            for (const auto& v : versions)
                arr.push_back({{"version", v.id}, {"name", v.name}, {"modified", v.modified}, {"rules", v.rules}});
            out_ << io::Json{{"versions", arr}}.dump(2) << "\n";
            return kOk;
        }
        for (const auto& v : versions)
            out_ << v.id << "\t" << v.modified << "\t" << v.name << "\t" << v.rules << " rules\n";
        return kOk;
    }

    int cmd_serve(const std::string& host, const std::string& static_dir) {
        auto store = open_store();
        if (!store.latest_id() && !cfg_.kb_path.empty()) {
            auto doc = io::parse_document(read_file(cfg_.kb_path));
            err_ << "seeded store with version " << store.save(doc) << "\n";
        }
        Service service(store, {static_dir});
        httplib::Server server;
        service.mount(server);
        err_ << "listening on http://" << host << ":" << cfg_.port << "\n";
        if (!server.listen(host, cfg_.port)) {
            err_ << "cannot listen on " << host << ":" << cfg_.port << "\n";
            return kInputError;
        }
        return kOk;
    }

    std::ostream& out_;
    std::ostream& err_;
    CliConfig cfg_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return Runner(out, err).run(args);
}

} // namespace brb::cli
