#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "sicov/diff.hpp"
#include "test_util.hpp"

using namespace sicov;

namespace {

const char* kSimpleDiff =
    "--- a/src/alpha.cpp\n"
    "+++ b/src/alpha.cpp\n"
    "@@ -5,3 +7,4 @@\n"
    " context\n"
    "-old line\n"
    "+new line\n"
    "+another line\n"
    " context\n";

const char* kNewFileDiff =
    "--- /dev/null\n"
    "+++ b/src/fresh.cpp\n"
    "@@ -0,0 +1,12 @@\n"
    "+l1\n+l2\n+l3\n+l4\n+l5\n+l6\n+l7\n+l8\n+l9\n+l10\n+l11\n+l12\n";

} // namespace

TEST_CASE("hunk header maps to post-image range") {
    auto diff = parse_unified_diff(kSimpleDiff, "c1");
    REQUIRE(diff.commit_id == "c1");
    REQUIRE(diff.changes.size() == 1);
    const auto& change = diff.changes[0];
    CHECK(change.path == "src/alpha.cpp");
    CHECK(change.kind == ChangeKind::Modified);
    REQUIRE(change.hunks.size() == 1);
    CHECK(change.hunks[0] == LineRange{7, 10});
}

TEST_CASE("empty diff text yields zero changes") {
    auto diff = parse_unified_diff("", "empty");
    CHECK(diff.changes.empty());
}

TEST_CASE("new-file diff is Added with a whole-file hunk") {
    auto diff = parse_unified_diff(kNewFileDiff);
    REQUIRE(diff.changes.size() == 1);
    CHECK(diff.changes[0].kind == ChangeKind::Added);
    CHECK(diff.changes[0].path == "src/fresh.cpp");
    REQUIRE(diff.changes[0].hunks.size() == 1);
    CHECK(diff.changes[0].hunks[0] == LineRange{1, 12});
}

TEST_CASE("pure deletions contribute no post-image range") {
    std::string text =
        "--- a/gone.cpp\n"
        "+++ b/gone.cpp\n"
        "@@ -4,2 +3,0 @@\n"
        "-a\n-b\n";
    auto diff = parse_unified_diff(text);
    REQUIRE(diff.changes.size() == 1);
    CHECK(diff.changes[0].hunks.empty());
}

TEST_CASE("deleted files have no post-image entry") {
    std::string text =
        "--- a/dead.cpp\n"
        "+++ /dev/null\n"
        "@@ -1,3 +0,0 @@\n"
        "-x\n-y\n-z\n";
    auto diff = parse_unified_diff(text);
    CHECK(diff.changes.empty());
}

TEST_CASE("CRLF input is tolerated") {
    std::string text =
        "--- a/w.cpp\r\n"
        "+++ b/w.cpp\r\n"
        "@@ -1,1 +1,2 @@\r\n"
        " k\r\n+n\r\n";
    auto diff = parse_unified_diff(text);
    REQUIRE(diff.changes.size() == 1);
    CHECK(diff.changes[0].path == "w.cpp");
    CHECK(diff.changes[0].hunks[0] == LineRange{1, 2});
}

TEST_CASE("binary markers skip the file with a warning") {
    std::string text =
        "diff --git a/blob.bin b/blob.bin\n"
        "Binary files a/blob.bin and b/blob.bin differ\n"
        "--- a/ok.cpp\n"
        "+++ b/ok.cpp\n"
        "@@ -1,1 +1,1 @@\n"
        "-a\n+b\n";
    std::vector<std::string> warnings;
    auto diff = parse_unified_diff(text, "", &warnings);
    REQUIRE(diff.changes.size() == 1);
    CHECK(diff.changes[0].path == "ok.cpp");
    // the marker precedes any header here; files with a header then a
    // binary marker are dropped
    std::string text2 =
        "--- a/blob.cpp\n"
        "+++ b/blob.cpp\n"
        "GIT binary patch\n"
        "literal 8\n";
    warnings.clear();
    auto diff2 = parse_unified_diff(text2, "", &warnings);
    CHECK(diff2.changes.empty());
    CHECK(warnings.size() == 1);
}

TEST_CASE("malformed hunk header reports the line number") {
    std::string text =
        "--- a/x.cpp\n"
        "+++ b/x.cpp\n"
        "@@ -a,0 +3 @@\n";
    try {
        parse_unified_diff(text);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("hunk header without counts defaults to one line") {
    std::string text =
        "--- a/x.cpp\n"
        "+++ b/x.cpp\n"
        "@@ -2,0 +3 @@\n"
        "+n\n";
    auto diff = parse_unified_diff(text);
    REQUIRE(diff.changes[0].hunks.size() == 1);
    CHECK(diff.changes[0].hunks[0] == LineRange{3, 3});
}

TEST_CASE("filter_source_files keeps matching suffixes in order") {
    CommitDiff diff;
    diff.commit_id = "c";
    diff.changes = {{"a.cpp", ChangeKind::Modified, {}},
                    {"b.txt", ChangeKind::Modified, {}},
                    {"c.cpp", ChangeKind::Added, {}}};
    auto filtered = filter_source_files(diff, {".cpp"});
    REQUIRE(filtered.changes.size() == 2);
    CHECK(filtered.changes[0].path == "a.cpp");
    CHECK(filtered.changes[1].path == "c.cpp");

    SECTION("empty extension list is a vacuous filter") {
        CHECK(filter_source_files(diff, {}).changes.empty());
    }
    SECTION("suffix matching is case-sensitive") {
        CommitDiff upper;
        upper.changes = {{"a.CPP", ChangeKind::Modified, {}}};
        CHECK(filter_source_files(upper, {".cpp"}).changes.empty());
    }
    SECTION("idempotent") {
        auto twice = filter_source_files(filtered, {".cpp"});
        CHECK(twice == filtered);
    }
}

TEST_CASE("changed_ranges merges adjacent hunks only") {
    FileChange adjacent{"f.cpp", ChangeKind::Modified, {{3, 5}, {6, 9}}};
    auto merged = changed_ranges(adjacent);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0] == LineRange{3, 9});

    FileChange disjoint{"f.cpp", ChangeKind::Modified, {{3, 5}, {8, 9}}};
    auto kept = changed_ranges(disjoint);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0] == LineRange{3, 5});
    CHECK(kept[1] == LineRange{8, 9});

    FileChange added{"f.cpp", ChangeKind::Added, {{1, 7}}};
    auto whole = changed_ranges(added);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0] == LineRange{1, 7});
}

// Randomized edits against the system diff tool. Line payloads are unique,
// so the minimal diff is unambiguous and the set of post-image lines whose
// content is absent from the pre-image is exactly the +run content of a
// zero-context diff.
TEST_CASE("randomized edits: parsed ranges equal brute-force changed lines") {
    std::mt19937 rng(20260809);
    testutil::TempDir dir;
    auto old_path = dir.path() / "old.txt";
    auto new_path = dir.path() / "new.txt";
    auto diff_path = dir.path() / "patch.diff";

    for (int iter = 0; iter < 40; ++iter) {
        int n = std::uniform_int_distribution<int>(5, 60)(rng);
        std::vector<std::string> old_lines;
        for (int i = 0; i < n; ++i)
            old_lines.push_back("payload-" + std::to_string(iter) + "-" + std::to_string(i));

        // Random order-preserving edit script.
        std::vector<std::string> new_lines;
        int inserted = 0;
        for (int i = 0; i < n; ++i) {
            int roll = std::uniform_int_distribution<int>(0, 9)(rng);
            if (roll == 0)
                continue; // delete
            if (roll == 1) {
                new_lines.push_back("edited-" + std::to_string(iter) + "-" + std::to_string(i));
                continue; // replace
            }
            if (roll == 2)
                new_lines.push_back("fresh-" + std::to_string(iter) + "-" + std::to_string(inserted++));
            new_lines.push_back(old_lines[i]);
        }

        std::set<int> expected;
        {
            std::set<std::string> old_set(old_lines.begin(), old_lines.end());
            for (std::size_t i = 0; i < new_lines.size(); ++i)
                if (!old_set.count(new_lines[i]))
                    expected.insert(static_cast<int>(i) + 1);
        }

        auto join = [](const std::vector<std::string>& lines) {
            std::string out;
            for (const auto& l : lines)
                out += l + "\n";
            return out;
        };
        testutil::write_file(old_path, join(old_lines));
        testutil::write_file(new_path, join(new_lines));
        int rc = std::system(("diff -U0 " + old_path.string() + " " + new_path.string() + " > " +
                              diff_path.string())
                                 .c_str());
        REQUIRE(rc != -1);

        auto diff = parse_unified_diff(testutil::read_file(diff_path));
        std::set<int> got;
        for (const auto& change : diff.changes) {
            for (const auto& hunk : change.hunks) {
                REQUIRE(hunk.valid());
                for (int l = hunk.start; l <= hunk.end; ++l)
                    got.insert(l);
            }
        }
        REQUIRE(got == expected);
    }
}
