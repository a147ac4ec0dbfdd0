#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sicov/diff.hpp" // detail::split_lines
#include "sicov/error.hpp"

namespace sicov {

/// Where counters are inserted: by the compiler frontend before optimization
/// (line-level mapping, higher overhead) or during IR optimization passes
/// (function-level only, lower overhead).
enum class InstrumentationMode { FE, IR };

inline std::string_view mode_name(InstrumentationMode m) {
    return m == InstrumentationMode::FE ? "fe" : "ir";
}

inline std::optional<InstrumentationMode> parse_mode(std::string_view text) {
    if (text == "fe" || text == "FE")
        return InstrumentationMode::FE;
    if (text == "ir" || text == "IR")
        return InstrumentationMode::IR;
    return std::nullopt;
}

/// Fitted overhead model. Defaults are the published fit: t_CPU slopes of
/// 128.08 (FE) and 139.84 (IR) per unit IFR over an intercept of 1.0, and a
/// median extraction cost of 8.33% of baseline compilation per changed file.
struct OverheadModel {
    double slope_fe = 128.08;
    double slope_ir = 139.84;
    double intercept = 1.0;
    double per_file_coefficient = 0.0833;

    double slope(InstrumentationMode mode) const {
        return mode == InstrumentationMode::FE ? slope_fe : slope_ir;
    }
};

// Full instrumentation without a profile list bypasses the list-size model;
// the measured t_CPU ratios are kept as documentation constants only.
inline constexpr double kFullInstrumentationTcpuFe = 1.75;
inline constexpr double kFullInstrumentationTcpuIr = 1.00;

// Reference IFR values for the measured instrumentation contexts.
inline constexpr double kMedianCommitIfr = 2.78e-6;
inline constexpr double kLargestCommitIfr = 5.56e-4;
inline constexpr double kBatch100Ifr = 1.11e-3;
inline constexpr double kWorstCaseIfr = 5.56e-4;

enum class FpsContext { MedianCommit, LargestCommit, Batch100, WorstCase, Full };

inline std::string_view fps_context_name(FpsContext c) {
    switch (c) {
    case FpsContext::MedianCommit: return "median-commit";
    case FpsContext::LargestCommit: return "largest-commit";
    case FpsContext::Batch100: return "batch-100";
    case FpsContext::WorstCase: return "worst-case";
    case FpsContext::Full: return "full";
    }
    return "";
}

inline std::optional<FpsContext> parse_fps_context(std::string_view text) {
    if (text == "median-commit")
        return FpsContext::MedianCommit;
    if (text == "largest-commit")
        return FpsContext::LargestCommit;
    if (text == "batch-100")
        return FpsContext::Batch100;
    if (text == "worst-case")
        return FpsContext::WorstCase;
    if (text == "full")
        return FpsContext::Full;
    return std::nullopt;
}

/// An FPS Ratio reference value. Commit-scale contexts were reported as
/// "above" a threshold, so those entries are lower bounds, not point
/// estimates.
struct FpsEntry {
    double ratio = 1.0;
    bool lower_bound = false;

    friend bool operator==(const FpsEntry&, const FpsEntry&) = default;
};

/// Reference FPS Ratios per (mode, context), shipped with the published
/// values and overridable via config.
struct FpsReference {
    struct Row {
        InstrumentationMode mode;
        FpsContext context;
        FpsEntry entry;
    };
    std::vector<Row> rows;

    static FpsReference defaults() {
        FpsReference table;
        using M = InstrumentationMode;
        using C = FpsContext;
        for (M m : {M::FE, M::IR}) {
            table.set(m, C::MedianCommit, {0.9, true});
            table.set(m, C::LargestCommit, {0.9, true});
            table.set(m, C::Batch100, {0.9, true});
            table.set(m, C::WorstCase, {0.5, true});
        }
        table.set(M::FE, C::Full, {0.297, false});
        table.set(M::IR, C::Full, {0.369, false});
        return table;
    }

    void set(InstrumentationMode mode, FpsContext context, FpsEntry entry) {
        for (auto& row : rows) {
            if (row.mode == mode && row.context == context) {
                row.entry = entry;
                return;
            }
        }
        rows.push_back({mode, context, entry});
    }

    std::optional<FpsEntry> find(InstrumentationMode mode, FpsContext context) const {
        for (const auto& row : rows)
            if (row.mode == mode && row.context == context)
                return row.entry;
        return std::nullopt;
    }
};

/// IFR = |SIC| / |F|: the proportion of the codebase that is instrumented.
inline double compute_ifr(long long sic_size, long long total_functions) {
    if (total_functions < 1)
        throw std::domain_error("total_functions must be >= 1");
    if (sic_size < 0 || sic_size > total_functions)
        throw std::domain_error("sic_size must lie in [0, total_functions]");
    return static_cast<double>(sic_size) / static_cast<double>(total_functions);
}

/// PER estimate: proportional wall-clock increase from profile-list
/// extraction, linear in the number of files changed.
inline double estimate_per(long long files_changed, const OverheadModel& model = {}) {
    if (files_changed < 0)
        throw std::domain_error("files_changed must be >= 0");
    return static_cast<double>(files_changed) * model.per_file_coefficient;
}

/// t_CPU estimate: intercept + slope(mode) * IFR. An empty profile list
/// costs the baseline.
inline double estimate_tcpu(const OverheadModel& model, InstrumentationMode mode, double ifr) {
    if (ifr < 0.0 || ifr > 1.0)
        throw std::domain_error("ifr must lie in [0, 1]");
    return model.intercept + model.slope(mode) * ifr;
}

/// Inverse of estimate_tcpu: the largest IFR keeping t_CPU within budget.
inline double max_ifr_within_budget(const OverheadModel& model, InstrumentationMode mode,
                                    double budget) {
    if (budget <= model.intercept)
        throw std::domain_error("budget must exceed the intercept");
    return (budget - model.intercept) / model.slope(mode);
}

/// How many commits of the given per-commit IFR fit under a t_CPU budget.
inline long long estimate_commit_budget(const OverheadModel& model, InstrumentationMode mode,
                                        double per_commit_ifr, double budget) {
    if (per_commit_ifr <= 0.0)
        throw std::domain_error("per_commit_ifr must be > 0");
    return static_cast<long long>(std::floor(max_ifr_within_budget(model, mode, budget) /
                                             per_commit_ifr));
}

/// How many commits of the given per-commit IFR fit under an explicit IFR
/// cap (the published estimate uses the 1% threshold directly).
inline long long estimate_commit_budget_for_cap(double per_commit_ifr, double ifr_cap) {
    if (per_commit_ifr <= 0.0)
        throw std::domain_error("per_commit_ifr must be > 0");
    if (ifr_cap <= 0.0)
        throw std::domain_error("ifr_cap must be > 0");
    return static_cast<long long>(std::floor(ifr_cap / per_commit_ifr));
}

/// Looks up the stored reference FPS Ratio for (mode, context).
inline std::optional<FpsEntry> fps_reference(InstrumentationMode mode, FpsContext context,
                                             const FpsReference& table = FpsReference::defaults()) {
    return table.find(mode, context);
}

// ---------------------------------------------------------------------------
// Config file (key=value text)
// ---------------------------------------------------------------------------

struct ModelConfig {
    OverheadModel model;
    FpsReference fps = FpsReference::defaults();
};

/// Parses `key=value` lines: slope_fe, slope_ir, intercept,
/// per_file_coefficient, and fps_<mode>_<context> overrides (append `,bound`
/// to mark a value as a lower bound). `#` comments and blank lines skipped.
inline ModelConfig parse_model_config(std::string_view text) {
    ModelConfig config;
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        const int line_no = static_cast<int>(i) + 1;
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw parse_error("expected key=value", line_no);
        std::string key(line.substr(0, eq));
        std::string value(line.substr(eq + 1));
        auto to_double = [&](const std::string& v) {
            char* end = nullptr;
            double d = std::strtod(v.c_str(), &end);
            if (end != v.c_str() + v.size() || v.empty())
                throw parse_error("malformed number '" + v + "'", line_no);
            return d;
        };
        if (key == "slope_fe")
            config.model.slope_fe = to_double(value);
        else if (key == "slope_ir")
            config.model.slope_ir = to_double(value);
        else if (key == "intercept")
            config.model.intercept = to_double(value);
        else if (key == "per_file_coefficient")
            config.model.per_file_coefficient = to_double(value);
        else if (key.rfind("fps_", 0) == 0) {
            std::string rest = key.substr(4);
            std::size_t underscore = rest.find('_');
            if (underscore == std::string::npos)
                throw parse_error("expected fps_<mode>_<context>", line_no);
            auto mode = parse_mode(rest.substr(0, underscore));
            auto context = parse_fps_context(rest.substr(underscore + 1));
            if (!mode || !context)
                throw parse_error("unknown fps key '" + key + "'", line_no);
            FpsEntry entry;
            std::size_t comma = value.find(',');
            if (comma != std::string::npos) {
                if (value.substr(comma + 1) != "bound")
                    throw parse_error("unknown fps qualifier '" + value.substr(comma + 1) + "'",
                                      line_no);
                entry.lower_bound = true;
                value = value.substr(0, comma);
            }
            entry.ratio = to_double(value);
            config.fps.set(*mode, *context, entry);
        } else {
            throw parse_error("unknown config key '" + key + "'", line_no);
        }
    }
    return config;
}

} // namespace sicov
