#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "sicov/sic.hpp"
#include "test_util.hpp"

using namespace sicov;

namespace {

FunctionSpan span_of(std::string name, int start, int end, std::string file = "f.cpp") {
    FunctionSpan s;
    s.signature.qualified_name = {std::move(name)};
    s.span = {start, end};
    s.file = std::move(file);
    return s;
}

SelectiveInstrumentationContext two_target_sic() {
    SelectiveInstrumentationContext sic;
    sic.commit_id = "fix-42";
    FunctionTarget a;
    a.signature.qualified_name = {"add"};
    a.span = {3, 5};
    a.file = "f.cpp";
    a.mangled = MangledName{"_Z3addii"};
    FunctionTarget b;
    b.signature.qualified_name = {"ns", "go"};
    b.span = {9, 12};
    b.file = "f.cpp";
    b.mangled = MangledName{"_ZN2ns2goEv"};
    sic.targets = {a, b};
    return sic;
}

} // namespace

TEST_CASE("overlap boundaries") {
    FileChange change{"f.cpp", ChangeKind::Modified, {{20, 25}}};
    auto selected = select_targets({span_of("touching", 10, 20)}, change);
    REQUIRE(selected.size() == 1); // shared endpoint counts

    FileChange disjoint{"f.cpp", ChangeKind::Modified, {{21, 30}}};
    CHECK(select_targets({span_of("before", 10, 20)}, disjoint).empty());

    FileChange added{"new.cpp", ChangeKind::Added, {{1, 30}}};
    std::vector<FunctionSpan> spans = {span_of("a", 1, 4, "new.cpp"), span_of("b", 6, 9, "new.cpp"),
                                       span_of("c", 11, 30, "new.cpp")};
    CHECK(select_targets(spans, added).size() == 3);

    SECTION("added files select everything even with empty hunks") {
        FileChange empty_added{"new.cpp", ChangeKind::Added, {}};
        CHECK(select_targets(spans, empty_added).size() == 3);
    }
}

TEST_CASE("randomized overlap agrees with brute-force line membership") {
    std::mt19937 rng(4242);
    auto rand_range = [&](int lo, int hi) {
        int a = std::uniform_int_distribution<int>(lo, hi)(rng);
        int b = std::uniform_int_distribution<int>(lo, hi)(rng);
        return LineRange{std::min(a, b), std::max(a, b)};
    };
    for (int iter = 0; iter < 1000; ++iter) {
        LineRange span = rand_range(1, 120);
        int hunk_count = std::uniform_int_distribution<int>(0, 4)(rng);
        std::vector<LineRange> hunks;
        int cursor = 1;
        for (int h = 0; h < hunk_count && cursor < 120; ++h) {
            LineRange r = rand_range(cursor, std::min(cursor + 30, 125));
            hunks.push_back(r);
            cursor = r.end + 2;
        }
        FileChange change{"f.cpp", ChangeKind::Modified, hunks};
        bool got = !select_targets({span_of("x", span.start, span.end)}, change).empty();

        bool expected = false;
        for (int line = span.start; line <= span.end && !expected; ++line)
            for (const auto& hunk : hunks)
                if (hunk.contains(line)) {
                    expected = true;
                    break;
                }
        REQUIRE(got == expected);
    }
}

TEST_CASE("enlarging a hunk never removes a target") {
    std::mt19937 rng(77);
    for (int iter = 0; iter < 300; ++iter) {
        int s = std::uniform_int_distribution<int>(1, 80)(rng);
        int e = s + std::uniform_int_distribution<int>(0, 20)(rng);
        int hs = std::uniform_int_distribution<int>(1, 80)(rng);
        int he = hs + std::uniform_int_distribution<int>(0, 20)(rng);
        FileChange change{"f.cpp", ChangeKind::Modified, {{hs, he}}};
        FileChange wider{"f.cpp", ChangeKind::Modified,
                         {{std::max(1, hs - 3), he + 4}}};
        bool before = !select_targets({span_of("x", s, e)}, change).empty();
        bool after = !select_targets({span_of("x", s, e)}, wider).empty();
        if (before)
            REQUIRE(after);
    }
}

TEST_CASE("build_sic unions files and expands overloads by name") {
    CommitDiff diff;
    diff.commit_id = "abc";
    diff.changes = {{"f.cpp", ChangeKind::Modified, {{4, 4}}}};

    std::map<std::string, std::vector<FunctionSpan>> scans;
    auto resize_int = span_of("resize", 3, 5);
    resize_int.signature.parameters = {make_builtin(Builtin::Int)};
    auto resize_dbl = span_of("resize", 7, 9);
    resize_dbl.signature.parameters = {make_builtin(Builtin::Double)};
    auto untouched = span_of("other", 11, 14);
    scans["f.cpp"] = {resize_int, resize_dbl, untouched};

    auto sic = build_sic(diff, scans);
    REQUIRE(sic.targets.size() == 2); // both overloads, not `other`
    CHECK(sic.targets[0].pattern() == "_Z6resizei");
    CHECK(sic.targets[1].pattern() == "_Z6resized");

    SECTION("missing scans are a hard error naming the file") {
        diff.changes.push_back({"g.cpp", ChangeKind::Modified, {{1, 1}}});
        try {
            build_sic(diff, scans);
            FAIL("expected pipeline_error");
        } catch (const pipeline_error& e) {
            CHECK(std::string(e.what()).find("g.cpp") != std::string::npos);
        }
    }
    SECTION("commit touching nothing yields an empty, valid SIC") {
        CommitDiff none;
        none.commit_id = "noop";
        auto empty = build_sic(none, {});
        CHECK(empty.targets.empty());
        CHECK(emit_profile_list(empty) ==
              "# sicov profile list commit=noop\ndefault:skip\n");
    }
}

TEST_CASE("unmangleable targets degrade to wildcard fallbacks") {
    CommitDiff diff;
    diff.commit_id = "t";
    diff.changes = {{"f.cpp", ChangeKind::Modified, {{1, 20}}}};
    auto tmpl = span_of("blend", 2, 4);
    tmpl.is_template = true;
    std::map<std::string, std::vector<FunctionSpan>> scans{{"f.cpp", {tmpl}}};
    auto sic = build_sic(diff, scans);
    REQUIRE(sic.targets.size() == 1);
    CHECK_FALSE(sic.targets[0].mangled.has_value());
    CHECK(sic.targets[0].pattern() == "*blend*");
    CHECK(emit_profile_list(sic).find("function:*blend*=allow\n") != std::string::npos);
}

TEST_CASE("emitted bytes match the golden two-target fixture") {
    auto golden = testutil::read_file(testutil::fixture_dir() / "golden_two_target.list");
    CHECK(emit_profile_list(two_target_sic()) == golden);
    // determinism: equal SICs emit byte-identical documents
    CHECK(emit_profile_list(two_target_sic()) == emit_profile_list(two_target_sic()));
}

TEST_CASE("parse round-trips emitted documents") {
    auto sic = two_target_sic();
    auto list = parse_profile_list(emit_profile_list(sic));
    CHECK(list.default_action() == ProfileAction::Skip);
    REQUIRE(list.entries().size() == 2);
    CHECK(list.entries()[0] == ProfileEntry{"function", "_Z3addii", ProfileAction::Allow});
    CHECK(list.entries()[1] == ProfileEntry{"function", "_ZN2ns2goEv", ProfileAction::Allow});
}

TEST_CASE("parser tolerates comments, blanks, and section headers") {
    std::string text =
        "# leading comment\n"
        "\n"
        "[sicov]\n"
        "default:forbid\n"
        "  function:_Z1fv=allow  \n"
        "# interleaved\n"
        "function:_Z1gv=skip\n";
    auto list = parse_profile_list(text);
    CHECK(list.default_action() == ProfileAction::Forbid);
    REQUIRE(list.entries().size() == 2);
    CHECK(list.entries()[1].action == ProfileAction::Skip);
}

TEST_CASE("parser rejects unknown actions and junk lines") {
    try {
        parse_profile_list("function:X=deny\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 1);
    }
    CHECK_THROWS_AS(parse_profile_list("default:never\n"), parse_error);
    CHECK_THROWS_AS(parse_profile_list("who knows\n"), parse_error);
    CHECK_THROWS_AS(parse_profile_list("source:a.cpp=allow\n"), parse_error);
    CHECK_THROWS_AS(parse_profile_list("function:A=allow\nfunction:A=allow\n"), parse_error);
}

TEST_CASE("parse after emit is the identity on generated SICs") {
    std::mt19937 rng(2026);
    for (int iter = 0; iter < 200; ++iter) {
        SelectiveInstrumentationContext sic;
        sic.commit_id = "c" + std::to_string(iter);
        int n = std::uniform_int_distribution<int>(0, 12)(rng);
        std::set<std::string> used;
        for (int i = 0; i < n; ++i) {
            FunctionTarget t;
            t.signature.qualified_name = {"fn" + std::to_string(i)};
            t.span = {i * 10 + 1, i * 10 + 4};
            t.file = "f.cpp";
            if (std::uniform_int_distribution<int>(0, 3)(rng) == 0)
                t.fallback_pattern = "*fn" + std::to_string(i) + "*";
            else
                t.mangled = MangledName{"_Z" + std::to_string(i + 2) + "fn" + std::to_string(i) + "v"};
            if (!used.insert(t.pattern()).second)
                continue;
            sic.targets.push_back(std::move(t));
        }
        auto list = parse_profile_list(emit_profile_list(sic));
        CHECK(list.default_action() == ProfileAction::Skip);
        REQUIRE(list.entries().size() == sic.targets.size());
        for (std::size_t i = 0; i < sic.targets.size(); ++i) {
            CHECK(list.entries()[i].pattern == sic.targets[i].pattern());
            CHECK(list.entries()[i].action == ProfileAction::Allow);
        }
    }
}

TEST_CASE("merge_sics deduplicates by pattern") {
    auto a = two_target_sic();
    auto b = two_target_sic();
    FunctionTarget extra;
    extra.signature.qualified_name = {"novel"};
    extra.span = {1, 2};
    extra.file = "g.cpp";
    extra.mangled = MangledName{"_Z5novelv"};
    b.targets.push_back(extra);
    auto merged = merge_sics({a, b}, "batch-1");
    CHECK(merged.commit_id == "batch-1");
    REQUIRE(merged.targets.size() == 3);
}
