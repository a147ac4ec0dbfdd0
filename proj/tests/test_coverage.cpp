#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "sicov/coverage.hpp"
#include "test_util.hpp"

using namespace sicov;

namespace {

SelectiveInstrumentationContext sic_with(std::vector<std::string> patterns,
                                         std::string commit = "c1") {
    SelectiveInstrumentationContext sic;
    sic.commit_id = std::move(commit);
    for (auto& p : patterns) {
        FunctionTarget t;
        t.signature.qualified_name = {p};
        t.span = {1, 1};
        t.file = "f.cpp";
        if (p.find('*') != std::string::npos)
            t.fallback_pattern = p;
        else
            t.mangled = MangledName{p};
        sic.targets.push_back(std::move(t));
    }
    return sic;
}

} // namespace

TEST_CASE("glob matching") {
    CHECK(glob_match("*go*", "_ZN2ns2goEv"));
    CHECK(glob_match("*", "anything"));
    CHECK(glob_match("_Z1fi", "_Z1fi"));
    CHECK_FALSE(glob_match("_Z1fi", "_Z1fii"));
    CHECK(glob_match("a?c", "abc"));
    CHECK_FALSE(glob_match("a?c", "ac"));
    CHECK(glob_match("*end", "the end"));
    CHECK_FALSE(glob_match("*end", "the ending"));
}

TEST_CASE("ingest merges duplicate symbols by summing") {
    auto records = ingest_records("_Z1fi 3\n_Z1fi 2\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0] == CoverageRecord{"_Z1fi", 5});
}

TEST_CASE("ingest edge cases") {
    CHECK(ingest_records("").empty());
    CHECK(ingest_records("# only a comment\n").empty());

    try {
        ingest_records("_Z1fi 1\n_Z1gi -1\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(ingest_records("_Z1fi\n"), parse_error);
    CHECK_THROWS_AS(ingest_records("_Z1fi 3x\n"), parse_error);
}

TEST_CASE("build_report joins targets against records") {
    auto sic = sic_with({"A", "B"});
    auto report = build_report(sic, {{"A", 5}}, BuildId{"b1"});
    REQUIRE(report.per_target.size() == 2);
    CHECK(report.per_target[0].covered);
    CHECK(report.per_target[0].total_hits == 5);
    CHECK_FALSE(report.per_target[1].covered);
    CHECK(report.commit_coverage == 0.5);
    CHECK(report.unmatched_symbols == 0);

    SECTION("empty SIC gives zero coverage") {
        auto empty = build_report(sic_with({}), {{"A", 1}}, BuildId{"b2"});
        CHECK(empty.commit_coverage == 0.0);
        CHECK(empty.per_target.empty());
        CHECK(empty.unmatched_symbols == 1);
    }
    SECTION("fallback patterns match with glob semantics") {
        auto wild = build_report(sic_with({"*go*"}), {{"_ZN2ns2goEv", 1}}, BuildId{"b3"});
        REQUIRE(wild.per_target.size() == 1);
        CHECK(wild.per_target[0].covered);
        CHECK(wild.per_target[0].matched_symbols == 1);
        CHECK(wild.commit_coverage == 1.0);
    }
    SECTION("zero-hit records do not cover") {
        auto rep = build_report(sic_with({"A"}), {{"A", 0}}, BuildId{"b4"});
        CHECK_FALSE(rep.per_target[0].covered);
        CHECK(rep.commit_coverage == 0.0);
    }
    SECTION("unmatched symbols are counted") {
        auto rep = build_report(sic_with({"A"}), {{"A", 1}, {"Z", 2}, {"Y", 3}}, BuildId{"b5"});
        CHECK(rep.unmatched_symbols == 2);
    }
}

TEST_CASE("commit_coverage is invariant under permutation and splitting") {
    std::mt19937 rng(515);
    for (int iter = 0; iter < 200; ++iter) {
        int targets = std::uniform_int_distribution<int>(1, 8)(rng);
        std::vector<std::string> patterns;
        for (int i = 0; i < targets; ++i)
            patterns.push_back("_Zsym" + std::to_string(i));
        auto sic = sic_with(patterns);

        std::vector<CoverageRecord> records;
        for (int i = 0; i < targets; ++i)
            if (std::uniform_int_distribution<int>(0, 1)(rng))
                records.push_back({patterns[i], std::uniform_int_distribution<int>(0, 9)(rng)});

        auto base = build_report(sic, records, BuildId{"b"});
        CHECK(base.commit_coverage >= 0.0);
        CHECK(base.commit_coverage <= 1.0);

        auto shuffled = records;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(build_report(sic, shuffled, BuildId{"b"}).commit_coverage == base.commit_coverage);

        std::vector<CoverageRecord> split;
        for (const auto& r : records) {
            if (r.hit_count >= 2) {
                split.push_back({r.symbol, 1});
                split.push_back({r.symbol, r.hit_count - 1});
            } else {
                split.push_back(r);
            }
        }
        CHECK(build_report(sic, split, BuildId{"b"}).commit_coverage == base.commit_coverage);

        bool all_hit = true;
        for (const auto& t : base.per_target)
            all_hit = all_hit && t.covered;
        CHECK((base.commit_coverage == 1.0) == all_hit);
    }
}

TEST_CASE("store and load round-trip losslessly") {
    testutil::TempDir dir;
    auto sic = sic_with({"A", "*wild*"});
    auto report = build_report(sic, {{"A", 7}, {"stray", 1}}, BuildId{"build-7"});
    store_report(report, dir.path());
    auto loaded = load_report(dir.path(), BuildId{"build-7"});
    CHECK(loaded == report);
}

TEST_CASE("store collisions and recovery") {
    testutil::TempDir dir;
    auto report = build_report(sic_with({"A"}), {{"A", 1}}, BuildId{"dup"});
    store_report(report, dir.path());

    SECTION("second store without force conflicts") {
        CHECK_THROWS_AS(store_report(report, dir.path()), conflict_error);
    }
    SECTION("force overwrites") {
        auto other = build_report(sic_with({"A"}), {}, BuildId{"dup"});
        store_report(other, dir.path(), StoreMode::Overwrite);
        CHECK(load_report(dir.path(), BuildId{"dup"}).commit_coverage == 0.0);
    }
    SECTION("merge sums hit counts") {
        store_report(report, dir.path(), StoreMode::MergeSum);
        auto merged = load_report(dir.path(), BuildId{"dup"});
        CHECK(merged.per_target[0].total_hits == 2);
        CHECK(merged.commit_coverage == 1.0);
    }
    SECTION("merging different SICs conflicts") {
        auto foreign = build_report(sic_with({"B"}, "other-commit"), {}, BuildId{"dup"});
        CHECK_THROWS_AS(store_report(foreign, dir.path(), StoreMode::MergeSum), conflict_error);
    }
}

TEST_CASE("loading an unknown build id is a not-found error") {
    testutil::TempDir dir;
    CHECK_THROWS_AS(load_report(dir.path(), BuildId{"ghost"}), not_found_error);
}

TEST_CASE("build ids reject whitespace and separators") {
    CHECK(BuildId{"ok-123"}.valid());
    CHECK_FALSE(BuildId{""}.valid());
    CHECK_FALSE(BuildId{"has space"}.valid());
    CHECK_FALSE(BuildId{"has/slash"}.valid());
    testutil::TempDir dir;
    auto report = build_report(sic_with({"A"}), {}, BuildId{"bad id"});
    CHECK_THROWS_AS(store_report(report, dir.path()), parse_error);
}
