#pragma once

// HTTP front end over the rule-base store, the inference pipeline and the
// evaluation module. Every non-2xx response carries one ApiError object:
//   {"error": {"code": "...", "message": "...", "location": "..."}}

#include "brb/error.hpp"
#include "brb/evaluation.hpp"
#include "brb/inference.hpp"
#include "brb/serialization.hpp"
#include "brb/store.hpp"

#include "httplib.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>

namespace brb {

struct ApiErrorCode {
    const char* code;
    int status;
};

inline ApiErrorCode api_error_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::KbInvalid: return {"KB_INVALID", 422};
        case ErrorCode::NoRuleActivated: return {"NO_RULE_ACTIVATED", 409};
        case ErrorCode::NotFound: return {"NOT_FOUND", 404};
        case ErrorCode::AggregationDegenerate:
        case ErrorCode::DegenerateLabels: return {"DEGENERATE", 422};
        default: return {"INVALID_INPUT", 400};
    }
}

inline constexpr const char* kConsolePage = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>BRB assessment console</title></head>
<body>
<h1>BRB assessment console</h1>
<p>The console bundle is not installed. Point <code>--static</code> at a built
console directory, or use the API directly:</p>
<ul>
<li><code>GET /api/kb</code>, <code>PUT /api/kb</code>, <code>GET /api/kb/versions</code></li>
<li><code>POST /api/assess</code> with <code>{"inputs": {"NAME": value}}</code></li>
<li><code>POST /api/evaluate</code> with <code>{"rows": [...], "columns": [...]}</code></li>
</ul>
</body>
</html>
)";

class Service {
public:
    struct Options {
        std::filesystem::path static_dir; // optional console bundle (index.html + assets/)
    };

    explicit Service(KbStore& store, Options options = {}) : store_(store), options_(std::move(options)) {}

    /// Registers every route on `server`.
    void mount(httplib::Server& server) {
        server.Get("/api/kb", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { get_kb(req, res); });
        });
        server.Put("/api/kb", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { put_kb(req, res); });
        });
        server.Get("/api/kb/versions", [this](const httplib::Request&, httplib::Response& res) {
            handle(res, [&] { get_versions(res); });
        });
        server.Post("/api/assess", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { post_assess(req, res); });
        });
        server.Post("/api/evaluate", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { post_evaluate(req, res); });
        });
        server.Get("/", [this](const httplib::Request&, httplib::Response& res) { get_console(res); });
        if (!options_.static_dir.empty()) {
            const auto assets = options_.static_dir / "assets";
            if (std::filesystem::is_directory(assets)) {
                server.set_mount_point("/assets", assets.string(),
                                       {{"Cache-Control", "public, max-age=31536000, immutable"}});
            }
        }
        server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
            if (res.status == 404 && res.body.empty())
                send_error(res, ErrorCode::NotFound, "no route for " + req.method + " " + req.path, req.path);
        });
    }

    static void send_error(httplib::Response& res, ErrorCode code, const std::string& message,
                           const std::string& location = {}, std::optional<io::Json> report = std::nullopt) {
        const auto api = api_error_for(code);
        io::Json err = {{"code", api.code}, {"message", message}};
        if (!location.empty()) err["location"] = location;
        if (report) err["report"] = std::move(*report);
        res.status = api.status;
        res.set_content(io::Json{{"error", std::move(err)}}.dump(), "application/json");
    }

private:
    struct Snapshot {
        VersionId id = 0;
        RuleBaseDocument doc;
    };

    template <typename Fn>
    static void handle(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const ValidationError& e) {
            send_error(res, e.code(), e.what(), e.location(), io::to_json(e.report()));
        } catch (const Error& e) {
            send_error(res, e.code(), e.what(), e.location());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, ErrorCode::InvalidInput, std::string("malformed request body: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, ErrorCode::InvalidInput, e.what());
        }
    }

    static io::Json parse_body(const httplib::Request& req) {
        try {
            return io::Json::parse(req.body);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::InvalidInput, std::string("request body is not valid JSON: ") + e.what(), "body");
        }
    }

    /// Latest committed rule base, reloaded when the store has moved on.
    std::shared_ptr<const Snapshot> current() {
        const auto latest = store_.latest_id();
        if (!latest) throw Error(ErrorCode::NotFound, "no rule base has been stored yet", "kb");
        {
            std::shared_lock lock(cache_mutex_);
            if (cache_ && cache_->id == *latest) return cache_;
        }
        auto snap = std::make_shared<Snapshot>();
        snap->id = *latest;
        snap->doc = store_.load(*latest);
        std::unique_lock lock(cache_mutex_);
        if (!cache_ || cache_->id < snap->id) cache_ = snap;
        return cache_->id == snap->id ? cache_ : snap;
    }

    void get_kb(const httplib::Request& req, httplib::Response& res) {
        VersionId id = 0;
        if (req.has_param("version")) {
            const auto v = req.get_param_value("version");
            if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
                throw Error(ErrorCode::InvalidInput, "version must be a positive integer", "version");
            id = std::stoull(v);
        } else {
            auto latest = store_.latest_id();
            if (!latest) throw Error(ErrorCode::NotFound, "no rule base has been stored yet", "kb");
            id = *latest;
        }
        res.set_header("X-KB-Version", std::to_string(id));
        res.set_content(store_.load_bytes(id), "application/json");
    }

    void put_kb(const httplib::Request& req, httplib::Response& res) {
        RuleBaseDocument doc;
        try {
            doc = io::parse_document(req.body);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidInput, e.what(), e.location());
        }
        const auto now = utc_timestamp();
        if (doc.created.empty()) doc.created = now;
        doc.modified = now;
        const auto id = store_.save(doc);
        res.status = 201;
        res.set_content(io::Json{{"version", id}}.dump(), "application/json");
    }

    void get_versions(httplib::Response& res) {
        io::Json versions = io::Json::array();
        for (const auto& v : store_.list_versions())
            versions.push_back(
                {{"version", v.id}, {"name", v.name}, {"modified", v.modified}, {"rules", v.rules}, {"bytes", v.bytes}});
        res.set_content(io::Json{{"versions", std::move(versions)}}.dump(), "application/json");
    }

    void post_assess(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.is_object() || !body.contains("inputs") || !body["inputs"].is_object())
            throw Error(ErrorCode::InvalidInput, "body must be {\"inputs\": {NAME: value}}", "inputs");
        InputMap inputs;
        for (const auto& [name, value] : body["inputs"].items()) {
            if (value.is_null()) {
                inputs[name] = std::nullopt;
            } else if (value.is_number()) {
                inputs[name] = value.get<double>();
            } else {
                throw Error(ErrorCode::InvalidInput, "input '" + name + "' must be a number or null", "inputs." + name);
            }
        }
        const auto snap = current();
        const auto result = assess(snap->doc.rule_base, inputs);
        auto out = io::to_json(snap->doc.rule_base, result);
        out["kb_version"] = snap->id;
        res.set_content(out.dump(), "application/json");
    }

    void post_evaluate(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.is_object() || !body.contains("rows"))
            throw Error(ErrorCode::InvalidInput, "body must be {\"rows\": [...], \"columns\": [...]}", "rows");
        const auto cases = io::cases_from_json(body["rows"]);
        std::vector<std::string> columns;
        if (body.contains("columns")) {
            if (!body["columns"].is_array()) throw Error(ErrorCode::InvalidInput, "columns must be an array", "columns");
            for (const auto& c : body["columns"]) {
                if (!c.is_string()) throw Error(ErrorCode::InvalidInput, "column names must be strings", "columns");
                columns.push_back(c.get<std::string>());
            }
        } else if (!cases.empty()) {
            for (const auto& [name, _] : cases.front().scores) columns.push_back(name);
        }
        try {
            res.set_content(io::to_json(eval::compare(cases, columns)).dump(), "application/json");
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NotFound) throw Error(ErrorCode::InvalidInput, e.what(), "columns." + e.location());
            throw;
        }
    }

    void get_console(httplib::Response& res) {
        if (!options_.static_dir.empty()) {
            std::ifstream in(options_.static_dir / "index.html", std::ios::binary);
            if (in) {
                std::ostringstream ss;
                ss << in.rdbuf();
                res.set_header("Cache-Control", "no-cache");
                res.set_content(ss.str(), "text/html; charset=utf-8");
                return;
            }
        }
        res.set_content(kConsolePage, "text/html; charset=utf-8");
    }

    KbStore& store_;
    Options options_;
    std::shared_mutex cache_mutex_;
    std::shared_ptr<const Snapshot> cache_;
};

} // namespace brb
