#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sicov/diff.hpp"
#include "sicov/error.hpp"
#include "sicov/mangle.hpp"
#include "sicov/scan.hpp"

namespace sicov {

/// A function chosen for instrumentation. Carries either the exact mangled
/// symbol or, when the signature is outside the mangleable subset, a
/// wildcard fallback pattern — never both.
struct FunctionTarget {
    FunctionSignature signature;
    LineRange span;
    std::string file;
    std::optional<MangledName> mangled;
    std::optional<std::string> fallback_pattern;

    const std::string& pattern() const {
        return mangled ? mangled->text : *fallback_pattern;
    }
};

struct SelectiveInstrumentationContext {
    std::string commit_id;
    std::vector<FunctionTarget> targets;
    std::optional<long long> total_functions_hint; // |F| when known
};

enum class ProfileAction { Allow, Skip, Forbid };

struct ProfileEntry {
    std::string kind; // only "function" is emitted
    std::string pattern;
    ProfileAction action;

    friend bool operator==(const ProfileEntry&, const ProfileEntry&) = default;
};

/// Ordered instrumentation directives with a default action. Entries are
/// unique by (kind, pattern); duplicates are rejected at insertion.
class ProfileList {
public:
    explicit ProfileList(ProfileAction default_action = ProfileAction::Skip)
        : default_action_(default_action) {}

    ProfileAction default_action() const { return default_action_; }
    void set_default_action(ProfileAction a) { default_action_ = a; }

    const std::vector<ProfileEntry>& entries() const { return entries_; }

    void add_entry(ProfileEntry entry) {
        for (const auto& e : entries_)
            if (e.kind == entry.kind && e.pattern == entry.pattern)
                throw parse_error("duplicate profile entry: " + entry.kind + ":" + entry.pattern);
        entries_.push_back(std::move(entry));
    }

private:
    ProfileAction default_action_;
    std::vector<ProfileEntry> entries_;
};

namespace detail {

inline std::string_view action_token(ProfileAction a) {
    switch (a) {
    case ProfileAction::Allow: return "allow";
    case ProfileAction::Skip: return "skip";
    case ProfileAction::Forbid: return "forbid";
    }
    return "skip";
}

inline std::optional<ProfileAction> parse_action(std::string_view token) {
    if (token == "allow")
        return ProfileAction::Allow;
    if (token == "skip")
        return ProfileAction::Skip;
    if (token == "forbid")
        return ProfileAction::Forbid;
    return std::nullopt;
}

} // namespace detail

/// Applies the overlap rule: a span is selected iff it intersects any
/// post-image hunk range (closed intervals). Added files select every span.
inline std::vector<const FunctionSpan*> select_target_spans(const std::vector<FunctionSpan>& spans,
                                                            const FileChange& change) {
    std::vector<const FunctionSpan*> selected;
    for (const auto& span : spans) {
        bool hit = change.kind == ChangeKind::Added;
        for (const auto& hunk : change.hunks) {
            if (hit)
                break;
            hit = span.span.overlaps(hunk);
        }
        if (hit)
            selected.push_back(&span);
    }
    return selected;
}

/// Wildcard fallback used when a changed function cannot be named exactly.
inline std::string fallback_pattern_for(const FunctionSpan& span) {
    return "*" + span.signature.terminal_name() + "*";
}

/// Turns a selected span into a FunctionTarget, mangling when possible and
/// degrading to a name wildcard otherwise.
inline FunctionTarget make_target(const FunctionSpan& span) {
    FunctionTarget target;
    target.signature = span.signature;
    target.span = span.span;
    target.file = span.file;
    if (is_mangleable(span))
        target.mangled = mangle(span.signature);
    else
        target.fallback_pattern = fallback_pattern_for(span);
    return target;
}

/// Convenience wrapper returning owned targets for one file change.
inline std::vector<FunctionTarget> select_targets(const std::vector<FunctionSpan>& spans,
                                                  const FileChange& change) {
    std::vector<FunctionTarget> targets;
    for (const FunctionSpan* span : select_target_spans(spans, change))
        targets.push_back(make_target(*span));
    return targets;
}

/// Builds the SIC for a commit. Per file, the overlap rule identifies the
/// changed functions; their terminal names then select every scanned
/// signature with a matching name, so all overloads of a changed function
/// come along (the documented precision loss of name-only matching).
/// Targets are ordered by (file path, span start); every changed file must
/// come with a scan.
inline SelectiveInstrumentationContext
build_sic(const CommitDiff& diff, const std::map<std::string, std::vector<FunctionSpan>>& scans,
          std::optional<long long> total_functions_hint = std::nullopt) {
    std::vector<std::string> missing;
    for (const auto& change : diff.changes)
        if (!scans.count(change.path))
            missing.push_back(change.path);
    if (!missing.empty()) {
        std::string msg = "missing scan for changed file(s):";
        for (const auto& path : missing)
            msg += " " + path;
        throw pipeline_error(msg);
    }

    SelectiveInstrumentationContext sic;
    sic.commit_id = diff.commit_id;
    sic.total_functions_hint = total_functions_hint;

    std::vector<const FileChange*> ordered;
    for (const auto& change : diff.changes)
        ordered.push_back(&change);
    std::sort(ordered.begin(), ordered.end(),
              [](const FileChange* a, const FileChange* b) { return a->path < b->path; });

    std::set<std::pair<std::string, int>> seen; // (file, span start)
    for (const FileChange* change : ordered) {
        const auto& spans = scans.at(change->path);
        std::unordered_set<std::string> target_names;
        for (const FunctionSpan* span : select_target_spans(spans, *change))
            target_names.insert(span->signature.terminal_name());
        std::vector<FunctionTarget> targets;
        for (const auto& span : spans)
            if (target_names.count(span.signature.terminal_name()))
                targets.push_back(make_target(span));
        std::sort(targets.begin(), targets.end(), [](const FunctionTarget& a, const FunctionTarget& b) {
            return a.span.start < b.span.start;
        });
        for (auto& target : targets) {
            if (seen.emplace(target.file, target.span.start).second)
                sic.targets.push_back(std::move(target));
        }
    }
    return sic;
}

/// Folds several commit SICs into one batch SIC, deduplicating entries by
/// pattern. Target order follows first occurrence.
inline SelectiveInstrumentationContext
merge_sics(const std::vector<SelectiveInstrumentationContext>& sics, std::string batch_id) {
    SelectiveInstrumentationContext batch;
    batch.commit_id = std::move(batch_id);
    std::set<std::string> seen;
    for (const auto& sic : sics) {
        for (const auto& target : sic.targets)
            if (seen.insert(target.pattern()).second)
                batch.targets.push_back(target);
        if (sic.total_functions_hint)
            batch.total_functions_hint = sic.total_functions_hint;
    }
    return batch;
}

/// Emits the profile-list document: comment header carrying the commit id,
/// `default:skip`, then one allow line per target in SIC order. UTF-8, LF
/// endings, no trailing whitespace, ends with a single LF. Byte-stable for
/// equal SICs.
inline std::string emit_profile_list(const SelectiveInstrumentationContext& sic) {
    std::string out = "# sicov profile list commit=" + sic.commit_id + "\n";
    out += "default:skip\n";
    for (const auto& target : sic.targets)
        out += "function:" + target.pattern() + "=allow\n";
    return out;
}

/// Parses a profile-list document. Blank lines, `#` comments, and bracketed
/// section headers are tolerated anywhere; anything else must be a
/// `default:` line or a `function:<pattern>=<action>` entry.
inline ProfileList parse_profile_list(std::string_view text) {
    ProfileList list(ProfileAction::Skip);
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        const int line_no = static_cast<int>(i) + 1;
        // trim
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        if (line.front() == '[' && line.back() == ']')
            continue; // section headers are comment-equivalent
        if (line.rfind("default:", 0) == 0) {
            auto action = detail::parse_action(line.substr(8));
            if (!action)
                throw parse_error("unknown default action '" + std::string(line.substr(8)) + "'",
                                  line_no);
            list.set_default_action(*action);
            continue;
        }
        std::size_t colon = line.find(':');
        std::size_t eq = line.rfind('=');
        if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon)
            throw parse_error("unrecognized profile list line", line_no);
        std::string kind(line.substr(0, colon));
        std::string pattern(line.substr(colon + 1, eq - colon - 1));
        auto action = detail::parse_action(line.substr(eq + 1));
        if (kind != "function")
            throw parse_error("unknown entry kind '" + kind + "'", line_no);
        if (pattern.empty())
            throw parse_error("empty pattern", line_no);
        if (!action)
            throw parse_error("unknown action '" + std::string(line.substr(eq + 1)) + "'", line_no);
        list.add_entry({std::move(kind), std::move(pattern), *action});
    }
    return list;
}

/// Extracts the commit id recorded in an emitted profile list header, if any.
inline std::optional<std::string> profile_list_commit_id(std::string_view text) {
    const auto lines = detail::split_lines(text);
    for (auto line : lines) {
        constexpr std::string_view kTag = "# sicov profile list commit=";
        if (line.rfind(kTag, 0) == 0)
            return std::string(line.substr(kTag.size()));
    }
    return std::nullopt;
}

} // namespace sicov
