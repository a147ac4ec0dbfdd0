#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sicov/error.hpp"
#include "sicov/sic.hpp"

namespace sicov {

/// Unique key linking a build to its coverage report.
struct BuildId {
    std::string value;

    bool valid() const {
        if (value.empty())
            return false;
        for (char c : value)
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '/' || c == '\\')
                return false;
        return true;
    }
    friend bool operator==(const BuildId&, const BuildId&) = default;
};

/// One instrumented symbol's accumulated hit count.
struct CoverageRecord {
    std::string symbol;
    long long hit_count = 0;

    friend bool operator==(const CoverageRecord&, const CoverageRecord&) = default;
};

struct TargetCoverage {
    std::string pattern;
    long long matched_symbols = 0;
    long long total_hits = 0;
    bool covered = false;

    friend bool operator==(const TargetCoverage&, const TargetCoverage&) = default;
};

struct CoverageReport {
    BuildId build_id;
    std::string commit_id;
    std::vector<TargetCoverage> per_target;
    double commit_coverage = 0.0; // covered targets / total targets, 0 if none
    long long unmatched_symbols = 0;

    friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

/// Matches a profile pattern against a symbol: `*` any sequence, `?` one
/// character, everything else literal.
inline bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t] || pattern[p] == '?')) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_t = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*')
        ++p;
    return p == pattern.size();
}

/// Parses a coverage record document: one `<symbol> <decimal hits>` per
/// line, `#` comments permitted. Duplicate symbols merge by summing.
inline std::vector<CoverageRecord> ingest_records(std::string_view text) {
    std::vector<CoverageRecord> records;
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        const int line_no = static_cast<int>(i) + 1;
        if (line.empty() || line.front() == '#')
            continue;
        std::size_t space = line.find(' ');
        if (space == std::string_view::npos || space == 0)
            throw parse_error("expected '<symbol> <hit count>'", line_no);
        std::string_view symbol = line.substr(0, space);
        std::string_view count_text = line.substr(space + 1);
        if (count_text.empty())
            throw parse_error("missing hit count", line_no);
        if (count_text.front() == '-')
            throw parse_error("negative hit count", line_no);
        long long count = 0;
        auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
        if (ec != std::errc() || ptr != count_text.data() + count_text.size())
            throw parse_error("malformed hit count '" + std::string(count_text) + "'", line_no);
        bool merged = false;
        for (auto& r : records) {
            if (r.symbol == symbol) {
                r.hit_count += count;
                merged = true;
                break;
            }
        }
        if (!merged)
            records.push_back({std::string(symbol), count});
    }
    return records;
}

/// Joins coverage records against a SIC. Mangled targets match by exact
/// symbol equality; fallback patterns match with glob semantics. Records
/// matched by no target count as unmatched_symbols.
inline CoverageReport build_report(const SelectiveInstrumentationContext& sic,
                                   const std::vector<CoverageRecord>& records, BuildId build_id) {
    CoverageReport report;
    report.build_id = std::move(build_id);
    report.commit_id = sic.commit_id;

    std::vector<bool> record_matched(records.size(), false);
    long long covered_targets = 0;
    for (const auto& target : sic.targets) {
        TargetCoverage tc;
        tc.pattern = target.pattern();
        const bool is_glob = !target.mangled.has_value();
        for (std::size_t i = 0; i < records.size(); ++i) {
            const bool hit = is_glob ? glob_match(tc.pattern, records[i].symbol)
                                     : records[i].symbol == tc.pattern;
            if (hit) {
                ++tc.matched_symbols;
                tc.total_hits += records[i].hit_count;
                record_matched[i] = true;
            }
        }
        tc.covered = tc.total_hits > 0;
        if (tc.covered)
            ++covered_targets;
        report.per_target.push_back(std::move(tc));
    }
    for (bool m : record_matched)
        if (!m)
            ++report.unmatched_symbols;
    report.commit_coverage =
        sic.targets.empty() ? 0.0
                            : static_cast<double>(covered_targets) /
                                  static_cast<double>(sic.targets.size());
    return report;
}

// ---------------------------------------------------------------------------
// Report persistence
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Serializes a report as line-oriented text with a stable field order.
/// Target lines hold the numeric fields first so the pattern (last field)
/// may contain arbitrary non-newline bytes.
inline std::string serialize_report(const CoverageReport& report) {
    std::string out = "# sicov coverage report v1\n";
    out += "build_id=" + report.build_id.value + "\n";
    out += "commit_id=" + report.commit_id + "\n";
    out += "commit_coverage=" + detail::format_double(report.commit_coverage) + "\n";
    out += "unmatched_symbols=" + std::to_string(report.unmatched_symbols) + "\n";
    out += "targets=" + std::to_string(report.per_target.size()) + "\n";
    for (const auto& tc : report.per_target) {
        out += "target " + std::to_string(tc.matched_symbols) + " " +
               std::to_string(tc.total_hits) + " " + (tc.covered ? "1" : "0") + " " + tc.pattern +
               "\n";
    }
    return out;
}

inline CoverageReport parse_report(std::string_view text) {
    CoverageReport report;
    const auto lines = detail::split_lines(text);
    std::size_t expected_targets = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        const int line_no = static_cast<int>(i) + 1;
        if (line.empty() || line.front() == '#')
            continue;
        if (line.rfind("target ", 0) == 0) {
            std::string_view rest = line.substr(7);
            TargetCoverage tc;
            std::size_t s1 = rest.find(' ');
            std::size_t s2 = rest.find(' ', s1 + 1);
            std::size_t s3 = rest.find(' ', s2 + 1);
            if (s1 == std::string_view::npos || s2 == std::string_view::npos ||
                s3 == std::string_view::npos)
                throw parse_error("malformed target line", line_no);
            auto to_ll = [&](std::string_view f) {
                long long v = 0;
                auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
                if (ec != std::errc() || ptr != f.data() + f.size())
                    throw parse_error("malformed number in target line", line_no);
                return v;
            };
            tc.matched_symbols = to_ll(rest.substr(0, s1));
            tc.total_hits = to_ll(rest.substr(s1 + 1, s2 - s1 - 1));
            std::string_view covered = rest.substr(s2 + 1, s3 - s2 - 1);
            if (covered != "0" && covered != "1")
                throw parse_error("malformed covered flag", line_no);
            tc.covered = covered == "1";
            tc.pattern = std::string(rest.substr(s3 + 1));
            report.per_target.push_back(std::move(tc));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw parse_error("unrecognized report line", line_no);
        std::string key(line.substr(0, eq));
        std::string value(line.substr(eq + 1));
        if (key == "build_id")
            report.build_id.value = value;
        else if (key == "commit_id")
            report.commit_id = value;
        else if (key == "commit_coverage")
            report.commit_coverage = std::strtod(value.c_str(), nullptr);
        else if (key == "unmatched_symbols")
            report.unmatched_symbols = std::stoll(value);
        else if (key == "targets")
            expected_targets = static_cast<std::size_t>(std::stoull(value));
        else
            throw parse_error("unknown report field '" + key + "'", line_no);
    }
    if (report.per_target.size() != expected_targets)
        throw parse_error("target count mismatch: header says " +
                          std::to_string(expected_targets) + ", found " +
                          std::to_string(report.per_target.size()));
    return report;
}

enum class StoreMode {
    Reject,    // collision is an error (default)
    Overwrite, // force flag
    MergeSum,  // fold hit counts into an existing report for the same SIC
};

/// Merges two reports over the same target set by summing hits. Reports
/// with different commit ids or target patterns do not merge.
inline CoverageReport merge_reports(const CoverageReport& existing, const CoverageReport& incoming) {
    if (existing.commit_id != incoming.commit_id ||
        existing.per_target.size() != incoming.per_target.size())
        throw conflict_error("reports cover different SICs; refusing to merge");
    CoverageReport merged = existing;
    merged.build_id = incoming.build_id;
    long long covered = 0;
    for (std::size_t i = 0; i < merged.per_target.size(); ++i) {
        if (merged.per_target[i].pattern != incoming.per_target[i].pattern)
            throw conflict_error("reports cover different SICs; refusing to merge");
        merged.per_target[i].matched_symbols += incoming.per_target[i].matched_symbols;
        merged.per_target[i].total_hits += incoming.per_target[i].total_hits;
        merged.per_target[i].covered = merged.per_target[i].total_hits > 0;
        if (merged.per_target[i].covered)
            ++covered;
    }
    merged.unmatched_symbols += incoming.unmatched_symbols;
    merged.commit_coverage = merged.per_target.empty()
                                 ? 0.0
                                 : static_cast<double>(covered) /
                                       static_cast<double>(merged.per_target.size());
    return merged;
}

namespace detail {

inline std::filesystem::path report_path(const std::filesystem::path& root, const BuildId& id) {
    return root / (id.value + ".covreport");
}

} // namespace detail

/// Loads the report stored for a build id.
inline CoverageReport load_report(const std::filesystem::path& store_root, const BuildId& id) {
    auto path = detail::report_path(store_root, id);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw not_found_error("no report stored for build id '" + id.value + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_report(text);
}

/// Stores a report document atomically (write-temp-then-rename). A second
/// store for the same build id is rejected unless mode says otherwise;
/// collision detection happens at link time, so concurrent writers cannot
/// both win.
inline void store_report(const CoverageReport& report, const std::filesystem::path& store_root,
                         StoreMode mode = StoreMode::Reject) {
    if (!report.build_id.valid())
        throw parse_error("invalid build id '" + report.build_id.value + "'");
    std::filesystem::create_directories(store_root);
    const auto final_path = detail::report_path(store_root, report.build_id);

    CoverageReport to_write = report;
    if (mode == StoreMode::MergeSum && std::filesystem::exists(final_path))
        to_write = merge_reports(load_report(store_root, report.build_id), report);

    static std::mt19937_64 rng{std::random_device{}()};
    const auto tmp_path =
        store_root / (report.build_id.value + ".tmp" + std::to_string(rng()) + "~");
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        out << serialize_report(to_write);
        if (!out)
            throw std::runtime_error("failed to write " + tmp_path.string());
    }
    std::error_code ec;
    if (mode == StoreMode::Reject) {
        std::filesystem::create_hard_link(tmp_path, final_path, ec);
        std::filesystem::remove(tmp_path);
        if (ec)
            throw conflict_error("report already stored for build id '" + report.build_id.value +
                                 "' (use force to overwrite)");
    } else {
        std::filesystem::rename(tmp_path, final_path, ec);
        if (ec) {
            std::filesystem::remove(tmp_path);
            throw std::runtime_error("failed to store report: " + ec.message());
        }
    }
}

} // namespace sicov
