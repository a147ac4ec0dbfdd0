#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sicov/error.hpp"

namespace sicov {

/// Inclusive 1-based line range in post-image coordinates.
struct LineRange {
    int start = 1;
    int end = 1;

    bool valid() const { return start >= 1 && end >= start; }
    bool contains(int line) const { return line >= start && line <= end; }
    bool overlaps(const LineRange& other) const {
        return start <= other.end && other.start <= end;
    }
    friend bool operator==(const LineRange&, const LineRange&) = default;
};

enum class ChangeKind { Added, Modified };

/// One changed file with its post-image hunk ranges, sorted and disjoint.
struct FileChange {
    std::string path;
    ChangeKind kind = ChangeKind::Modified;
    std::vector<LineRange> hunks;

    friend bool operator==(const FileChange&, const FileChange&) = default;
};

struct CommitDiff {
    std::string commit_id;
    std::vector<FileChange> changes;

    friend bool operator==(const CommitDiff&, const CommitDiff&) = default;
};

namespace detail {

inline std::string_view rstrip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

// Splits text into lines on LF; a trailing LF does not create an empty line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(rstrip_cr(text.substr(pos)));
            break;
        }
        lines.push_back(rstrip_cr(text.substr(pos, nl - pos)));
        pos = nl + 1;
    }
    return lines;
}

// Parses "start[,count]" from a hunk header side. Returns false on junk.
inline bool parse_range_field(std::string_view text, long& start, long& count) {
    if (text.empty() || text[0] < '0' || text[0] > '9')
        return false;
    std::size_t i = 0;
    start = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9')
        start = start * 10 + (text[i++] - '0');
    count = 1;
    if (i < text.size()) {
        if (text[i] != ',')
            return false;
        ++i;
        if (i >= text.size() || text[i] < '0' || text[i] > '9')
            return false;
        count = 0;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9')
            count = count * 10 + (text[i++] - '0');
    }
    return i == text.size();
}

// Parses "@@ -a[,b] +c[,d] @@ ..." and yields the post-image range [c, c+d-1].
// Returns nullopt (not an error) only when the line does not start with "@@ ".
inline std::optional<LineRange> parse_hunk_header(std::string_view line, int line_no,
                                                  long& post_len) {
    std::size_t close = line.find(" @@", 3);
    if (close == std::string_view::npos)
        throw parse_error("malformed hunk header: missing closing '@@'", line_no);
    std::string_view body = line.substr(3, close - 3);
    std::size_t space = body.find(' ');
    if (space == std::string_view::npos || body.empty() || body[0] != '-')
        throw parse_error("malformed hunk header: expected '-a,b +c,d'", line_no);
    std::string_view old_part = body.substr(1, space - 1);
    std::string_view new_part = body.substr(space + 1);
    if (new_part.empty() || new_part[0] != '+')
        throw parse_error("malformed hunk header: expected '+c,d'", line_no);
    new_part.remove_prefix(1);
    long old_start = 0, old_count = 0, new_start = 0, new_count = 0;
    if (!parse_range_field(old_part, old_start, old_count) ||
        !parse_range_field(new_part, new_start, new_count))
        throw parse_error("malformed hunk header: bad line numbers", line_no);
    post_len = new_count;
    if (new_count == 0)
        return std::nullopt; // pure deletion: no post-image range
    return LineRange{static_cast<int>(new_start), static_cast<int>(new_start + new_count - 1)};
}

// Strips the conventional one-component VCS prefix ("a/", "b/") from a
// diff header path.
inline std::string strip_vcs_prefix(std::string_view path) {
    if (path.size() >= 2 && (path[0] == 'a' || path[0] == 'b') && path[1] == '/')
        path.remove_prefix(2);
    return std::string(path);
}

// Extracts the path from a "--- " / "+++ " header line, dropping any
// trailing tab-separated timestamp.
inline std::string header_path(std::string_view line) {
    std::string_view rest = line.substr(4);
    std::size_t tab = rest.find('\t');
    if (tab != std::string_view::npos)
        rest = rest.substr(0, tab);
    return std::string(rest);
}

} // namespace detail

/// Parses unified-diff text into a CommitDiff. Hunk ranges are post-image
/// coordinates; files whose old side is /dev/null are marked Added; files
/// whose new side is /dev/null (deletions) have no post-image and are
/// dropped. Binary-file markers skip the file and append to `warnings`.
inline CommitDiff parse_unified_diff(std::string_view text, std::string commit_id = {},
                                     std::vector<std::string>* warnings = nullptr) {
    CommitDiff diff;
    diff.commit_id = std::move(commit_id);

    const auto lines = detail::split_lines(text);
    std::optional<FileChange> current;
    std::string pending_old_path; // set between "--- " and "+++ "

    auto flush = [&] {
        if (!current)
            return;
        for (const auto& existing : diff.changes)
            if (existing.path == current->path)
                throw parse_error("duplicate file entry in diff: " + current->path);
        diff.changes.push_back(std::move(*current));
        current.reset();
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        const int line_no = static_cast<int>(i) + 1;

        if (line.rfind("--- ", 0) == 0) {
            flush();
            pending_old_path = detail::header_path(line);
            continue;
        }
        if (line.rfind("+++ ", 0) == 0) {
            std::string new_path = detail::header_path(line);
            if (new_path == "/dev/null") {
                pending_old_path.clear(); // deletion: no post-image file
                continue;
            }
            current = FileChange{};
            current->path = detail::strip_vcs_prefix(new_path);
            current->kind =
                pending_old_path == "/dev/null" ? ChangeKind::Added : ChangeKind::Modified;
            pending_old_path.clear();
            continue;
        }
        if (line.rfind("@@ ", 0) == 0) {
            long post_len = 0;
            auto range = detail::parse_hunk_header(line, line_no, post_len);
            if (range) {
                if (!current)
                    throw parse_error("hunk header before any file header", line_no);
                if (!current->hunks.empty() && current->hunks.back().end >= range->start)
                    throw parse_error("hunk ranges out of order", line_no);
                current->hunks.push_back(*range);
            }
            continue;
        }
        if (line.rfind("Binary files ", 0) == 0 || line.rfind("GIT binary patch", 0) == 0) {
            if (warnings)
                warnings->push_back("skipping binary file near line " + std::to_string(line_no));
            current.reset();
            pending_old_path.clear();
            continue;
        }
        // Context/body lines, "diff --git", "index", mode lines, "\ No newline
        // at end of file", and anything else between headers are not needed:
        // hunk extents come from the headers alone.
    }
    flush();
    return diff;
}

/// Keeps only changes whose path ends with one of the given suffixes
/// (case-sensitive); order preserved. Idempotent.
inline CommitDiff filter_source_files(const CommitDiff& diff,
                                      const std::vector<std::string>& extensions) {
    CommitDiff out;
    out.commit_id = diff.commit_id;
    for (const auto& change : diff.changes) {
        bool keep = std::any_of(extensions.begin(), extensions.end(), [&](const std::string& ext) {
            return change.path.size() >= ext.size() &&
                   change.path.compare(change.path.size() - ext.size(), ext.size(), ext) == 0;
        });
        if (keep)
            out.changes.push_back(change);
    }
    return out;
}

/// Returns the change's hunks with adjacent ranges merged (end+1 == next.start).
inline std::vector<LineRange> changed_ranges(const FileChange& change) {
    std::vector<LineRange> merged;
    for (const auto& hunk : change.hunks) {
        if (!merged.empty() && merged.back().end + 1 == hunk.start)
            merged.back().end = hunk.end;
        else
            merged.push_back(hunk);
    }
    return merged;
}

} // namespace sicov
