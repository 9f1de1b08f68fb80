#pragma once

// File-backed, append-only store of rule-base documents. Each save writes a
// complete document to a temporary file, flushes it, then links it under the
// next version name; a version file is therefore either absent or complete.

#include "brb/error.hpp"
#include "brb/knowledge_base.hpp"
#include "brb/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

namespace brb {

/// Thrown when a document with validation errors is offered to the store.
class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report)
        : Error(ErrorCode::KbInvalid, summary(report)), report_(std::move(report)) {}

    const ValidationReport& report() const noexcept { return report_; }

private:
    static std::string summary(const ValidationReport& r) {
        std::string msg = "rule base has " + std::to_string(r.error_count()) + " validation error(s)";
        for (const auto& f : r.findings)
            if (f.severity == Severity::Error) return msg + "; first: " + f.location + ": " + f.message;
        return msg;
    }
    ValidationReport report_;
};

using VersionId = std::uint64_t;

struct VersionInfo {
    VersionId id = 0;
    std::string name;
    std::string modified;
    std::size_t rules = 0;
    std::uintmax_t bytes = 0;
};

class KbStore {
public:
    /// Points at which a save can be interrupted; used for fault injection.
    enum class SaveStage { WriteTemp, Flush, Commit, Cleanup };
    using FaultHook = std::function<void(SaveStage)>;

    explicit KbStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create store directory " + dir_.string() + ": " + ec.message());
    }

    const std::filesystem::path& directory() const noexcept { return dir_; }

    void set_fault_hook(FaultHook hook) { hook_ = std::move(hook); }

    /// Validates and appends `doc` as a new version.
    VersionId save(const RuleBaseDocument& doc) {
        auto report = validate(doc.rule_base);
        if (!report.ok()) throw ValidationError(std::move(report));
        const std::string bytes = io::dump_document(doc);

        std::lock_guard lock(write_mutex_);
        const auto temp = dir_ / (".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(next_temp_number()));
        stage(SaveStage::WriteTemp);
        write_file(temp, bytes);
        stage(SaveStage::Commit);
        // link() refuses to replace an existing name, so racing writers in
        // other processes each get a distinct version.
        VersionId id = latest_id().value_or(0);
        for (;;) {
            ++id;
            if (::link(temp.c_str(), path_for(id).c_str()) == 0) break;
            if (errno != EEXIST) {
                const int err = errno;
                std::filesystem::remove(temp);
                throw Error(ErrorCode::Io, "cannot commit version: " + std::string(std::strerror(err)));
            }
        }
        sync_directory();
        stage(SaveStage::Cleanup);
        std::error_code ec;
        std::filesystem::remove(temp, ec);
        return id;
    }

    /// Raw stored bytes of a version.
    std::string load_bytes(VersionId id) const {
        std::ifstream in(path_for(id), std::ios::binary);
        if (!in) throw Error(ErrorCode::NotFound, "version " + std::to_string(id) + " not found", "version");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    RuleBaseDocument load(VersionId id) const { return io::parse_document(load_bytes(id)); }

    RuleBaseDocument load_latest() const {
        auto id = latest_id();
        if (!id) throw Error(ErrorCode::NotFound, "store " + dir_.string() + " holds no rule base", "version");
        return load(*id);
    }

    std::optional<VersionId> latest_id() const {
        auto ids = version_ids();
        if (ids.empty()) return std::nullopt;
        return ids.back();
    }

    /// Committed versions, oldest first.
    std::vector<VersionInfo> list_versions() const {
        std::vector<VersionInfo> out;
        for (auto id : version_ids()) {
            VersionInfo info;
            info.id = id;
            std::error_code ec;
            info.bytes = std::filesystem::file_size(path_for(id), ec);
            try {
                const auto doc = load(id);
                info.name = doc.rule_base.name;
                info.modified = doc.modified;
                info.rules = doc.rule_base.rules.size();
            } catch (const Error&) {
                // Listed anyway; load() reports the problem.
            }
            out.push_back(std::move(info));
        }
        return out;
    }

    std::vector<VersionId> version_ids() const {
        std::vector<VersionId> ids;
        std::error_code ec;
        for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
            if (auto id = parse_name(entry.path().filename().string())) ids.push_back(*id);
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

private:
    std::filesystem::path path_for(VersionId id) const {
        char name[32];
        std::snprintf(name, sizeof name, "v%06llu.kb", static_cast<unsigned long long>(id));
        return dir_ / name;
    }

    static std::optional<VersionId> parse_name(const std::string& name) {
        if (name.size() < 5 || name.front() != 'v' || !name.ends_with(".kb")) return std::nullopt;
        const auto digits = name.substr(1, name.size() - 4);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
        return static_cast<VersionId>(std::stoull(digits));
    }

    static std::uint64_t next_temp_number() {
        static std::atomic<std::uint64_t> counter{0};
        return ++counter;
    }

    void stage(SaveStage s) const {
        if (hook_) hook_(s);
    }

    void write_file(const std::filesystem::path& path, const std::string& bytes) const {
        const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
        if (fd < 0) throw Error(ErrorCode::Io, "cannot create " + path.string() + ": " + std::strerror(errno));
        std::size_t written = 0;
        while (written < bytes.size()) {
            const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                const int err = errno;
                ::close(fd);
                throw Error(ErrorCode::Io, "write failed: " + std::string(std::strerror(err)));
            }
            written += static_cast<std::size_t>(n);
        }
        try {
            stage(SaveStage::Flush);
        } catch (...) {
            ::close(fd);
            throw;
        }
        ::fsync(fd);
        ::close(fd);
    }

    void sync_directory() const {
        const int fd = ::open(dir_.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
        if (fd >= 0) {
            ::fsync(fd);
            ::close(fd);
        }
    }

    std::filesystem::path dir_;
    FaultHook hook_;
    std::mutex write_mutex_;
};

} // namespace brb
