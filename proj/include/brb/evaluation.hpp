#pragma once

// Benchmark-based evaluation of score columns: binary benchmark labels from
// expert scores, ROC curves, Mann-Whitney AUC and Hanley-McNeil intervals.

#include "brb/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <string>
#include <vector>

namespace brb::eval {

inline constexpr double kBenchmarkThreshold = 50.0;
inline constexpr double kZ95 = 1.959964;
inline constexpr const char* kExpertColumn = "EXPERT";

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocResult {
    std::vector<RocPoint> points;
    double auc = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

struct ScoredCase {
    std::string id;
    std::map<std::string, double> scores;
    std::optional<int> benchmark;
};

struct ColumnResult {
    std::string name;
    RocResult roc;
};

struct EvaluationReport {
    std::vector<ColumnResult> columns;
    std::vector<std::string> ranking; // column names by AUC, best first
    std::vector<int> labels;          // benchmark label used per case
    std::size_t derived_labels = 0;   // how many labels came from the expert column
};

/// 1 iff the expert score is at least 50.
inline int benchmark_label(double expert_score) { return expert_score >= kBenchmarkThreshold ? 1 : 0; }

inline std::vector<int> derive_benchmark(std::span<const double> expert_scores) {
    std::vector<int> labels;
    labels.reserve(expert_scores.size());
    for (double s : expert_scores) {
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidInput, "expert score is not finite");
        labels.push_back(benchmark_label(s));
    }
    return labels;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> count_classes(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::InvalidInput, "scores and labels differ in length");
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw Error(ErrorCode::InvalidInput, "labels must be 0 or 1");
        if (!std::isfinite(scores[i]))
            throw Error(ErrorCode::InvalidInput, "score is not finite");
        (labels[i] == 1 ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0)
        throw Error(ErrorCode::DegenerateLabels, "ROC analysis needs at least one positive and one negative label");
    return {pos, neg};
}

} // namespace detail

/// ROC points from sweeping the threshold down through each distinct score.
/// Tied scores move the curve diagonally in one step.
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const auto [n_pos, n_neg] = detail::count_classes(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> points{{0.0, 0.0}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == threshold; ++i) (labels[order[i]] == 1 ? tp : fp) += 1;
        points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                          static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return points;
}

/// Area under a piecewise-linear ROC curve.
inline double trapezoid_area(std::span<const RocPoint> points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
    return area;
}

/// Mann-Whitney AUC via mid-ranks (ties count one half).
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    const auto [n_pos, n_neg] = detail::count_classes(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) rank_sum += mid_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Standard normal quantile for a two-sided `level`, by bisection on erfc.
inline double two_sided_z(double level) {
    if (level == 0.95) return kZ95;
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidInput, "confidence level must be in (0,1)");
    const double tail = 1.0 - level; // P(|Z| > z) = erfc(z / sqrt2)
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo + hi) / 2.0;
        (std::erfc(mid / std::sqrt(2.0)) > tail ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
}

/// Hanley-McNeil standard error of an AUC.
inline double hanley_mcneil_se(double a, std::size_t n_pos, std::size_t n_neg) {
    const double q1 = a / (2.0 - a);
    const double q2 = 2.0 * a * a / (1.0 + a);
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    const double var = (a * (1.0 - a) + (np - 1.0) * (q1 - a * a) + (nn - 1.0) * (q2 - a * a)) / (np * nn);
    return std::sqrt(std::max(var, 0.0));
}

inline std::pair<double, double> auc_confidence(double a, std::size_t n_pos, std::size_t n_neg, double level = 0.95) {
    if (n_pos < 1 || n_neg < 1) throw Error(ErrorCode::InvalidInput, "confidence interval needs both classes");
    const double half = two_sided_z(level) * hanley_mcneil_se(a, n_pos, n_neg);
    return {std::max(0.0, a - half), std::min(1.0, a + half)};
}

inline RocResult analyse(std::span<const double> scores, std::span<const int> labels) {
    RocResult r;
    r.points = roc_curve(scores, labels);
    r.auc = auc(scores, labels);
    r.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    r.n_neg = labels.size() - r.n_pos;
    std::tie(r.ci_low, r.ci_high) = auc_confidence(r.auc, r.n_pos, r.n_neg);
    return r;
}

/// Benchmark label of every case: its own label when given, otherwise derived
/// from the EXPERT column.
inline std::vector<int> resolve_labels(std::span<const ScoredCase> cases, std::size_t* derived = nullptr) {
    std::vector<int> labels;
    labels.reserve(cases.size());
    std::size_t n_derived = 0;
    for (const auto& c : cases) {
        if (c.benchmark) {
            if (*c.benchmark != 0 && *c.benchmark != 1)
                throw Error(ErrorCode::InvalidInput, "benchmark of case '" + c.id + "' is not 0 or 1", "benchmark");
            labels.push_back(*c.benchmark);
            continue;
        }
        auto it = c.scores.find(kExpertColumn);
        if (it == c.scores.end())
            throw Error(ErrorCode::InvalidInput,
                        "case '" + c.id + "' has no benchmark and no EXPERT score to derive one from", "benchmark");
        labels.push_back(benchmark_label(it->second));
        ++n_derived;
    }
    if (derived) *derived = n_derived;
    return labels;
}

/// ROC analysis of each named column against the benchmark, ranked by AUC.
inline EvaluationReport compare(std::span<const ScoredCase> cases, const std::vector<std::string>& columns) {
    if (cases.empty()) throw Error(ErrorCode::InvalidInput, "no cases to evaluate", "rows");
    if (columns.empty()) throw Error(ErrorCode::InvalidInput, "no score columns selected", "columns");

    EvaluationReport report;
    report.labels = resolve_labels(cases, &report.derived_labels);
    for (const auto& col : columns) {
        std::vector<double> scores;
        scores.reserve(cases.size());
        for (const auto& c : cases) {
            auto it = c.scores.find(col);
            if (it == c.scores.end())
                throw Error(ErrorCode::NotFound, "missing column '" + col + "' in case '" + c.id + "'", col);
            scores.push_back(it->second);
        }
        report.columns.push_back({col, analyse(scores, report.labels)});
    }
    std::vector<std::size_t> order(report.columns.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.columns[a].roc.auc > report.columns[b].roc.auc;
    });
    for (auto i : order) report.ranking.push_back(report.columns[i].name);
    return report;
}

} // namespace brb::eval
