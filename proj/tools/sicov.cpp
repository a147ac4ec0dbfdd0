// sicov: turn a commit diff into a selective-instrumentation profile list,
// model the overhead of an instrumentation choice, and fold run coverage
// back into commit-scoped reports.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sicov/sicov.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitParse = 2;     // diff/scan parse failure
constexpr int kExitPipeline = 3;  // pipeline precondition failure
constexpr int kExitConflict = 4;  // store collision
constexpr int kExitNotFound = 5;  // unknown build id / missing input
constexpr int kExitUsage = 64;

std::string read_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_file_or_throw(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw sicov::not_found_error("cannot read " + path.string());
    return read_stream(in);
}

// Deterministic fallback commit id: FNV-1a over the diff text.
std::string derive_commit_id(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string("diff-") + buf;
}

sicov::ModelConfig load_config(const std::string& path) {
    if (path.empty())
        return {};
    return sicov::parse_model_config(read_file_or_throw(path));
}

std::string default_store_root(const std::string& flag_value) {
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("SICOV_STORE"); env && *env)
        return env;
    return "sicov-store";
}

struct ExtractArgs {
    std::string repo = ".";
    std::string diff_path; // empty or "-" = stdin
    std::string commit_id;
    std::string out_dir = ".";
    std::string compdb_path;
    std::string config_path;
    std::vector<std::string> extensions = {".cpp", ".cc", ".cxx"};
    long long total_functions = 0;
    bool porcelain = false;
};

int run_extract(const ExtractArgs& args) {
    std::string diff_text;
    if (args.diff_path.empty() || args.diff_path == "-")
        diff_text = read_stream(std::cin);
    else
        diff_text = read_file_or_throw(args.diff_path);

    std::string commit_id =
        args.commit_id.empty() ? derive_commit_id(diff_text) : args.commit_id;

    std::vector<std::string> warnings;
    sicov::CommitDiff diff = sicov::parse_unified_diff(diff_text, commit_id, &warnings);
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << "\n";
    diff = sicov::filter_source_files(diff, args.extensions);

    // Scan every changed source file from the working tree.
    std::map<std::string, std::vector<sicov::FunctionSpan>> scans;
    for (const auto& change : diff.changes) {
        fs::path path = fs::path(args.repo) / change.path;
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw sicov::pipeline_error("changed file not found in repo: " + change.path);
        scans[change.path] = sicov::scan_file(read_stream(in), change.path);
    }

    std::optional<long long> hint;
    if (args.total_functions > 0)
        hint = args.total_functions;
    auto sic = sicov::build_sic(diff, scans, hint);

    fs::create_directories(args.out_dir);
    fs::path list_path = fs::path(args.out_dir) / (commit_id + ".list");
    {
        std::ofstream out(list_path, std::ios::binary | std::ios::trunc);
        out << sicov::emit_profile_list(sic);
        if (!out)
            throw std::runtime_error("failed to write " + list_path.string());
    }

    long long unmangleable = 0;
    for (const auto& t : sic.targets)
        if (t.fallback_pattern)
            ++unmangleable;

    // Summary document: pipeline-consumable key=value lines.
    std::ostringstream summary;
    summary << "commit=" << commit_id << "\n";
    summary << "files=" << diff.changes.size() << "\n";
    summary << "targets=" << sic.targets.size() << "\n";
    summary << "unmangleable=" << unmangleable << "\n";
    if (hint)
        summary << "ifr=" << sicov::detail::format_double(sicov::compute_ifr(
                       static_cast<long long>(sic.targets.size()), *hint))
                << "\n";
    summary << "list=" << list_path.string() << "\n";

    if (!args.compdb_path.empty()) {
        auto db = sicov::load_compdb(args.compdb_path);
        for (const auto& change : diff.changes) {
            auto cmd = sicov::lookup(db, change.path);
            if (!cmd) {
                summary << "frontend " << change.path << " unresolved\n";
                continue;
            }
            auto config = sicov::extract_frontend_args(*cmd);
            summary << "frontend " << change.path << " std=" << config.language_level
                    << " include_dirs=" << config.include_dirs.size()
                    << " defines=" << config.defines.size() << "\n";
        }
    }

    fs::path summary_path = fs::path(args.out_dir) / (commit_id + ".sic");
    {
        std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
        out << summary.str();
    }

    if (args.porcelain) {
        std::cout << summary.str();
    } else {
        std::cout << "commit " << commit_id << ": " << sic.targets.size() << " target(s) across "
                  << diff.changes.size() << " file(s), " << unmangleable
                  << " via wildcard fallback\n";
        std::cout << "profile list written to " << list_path.string() << "\n";
    }
    return 0;
}

struct EstimateArgs {
    std::string mode = "fe";
    std::string config_path;
    double ifr = -1.0;
    long long files = -1;
    long long commits = -1;
    double budget = -1.0;
    double ifr_cap = -1.0;
    double per_commit_ifr = sicov::kMedianCommitIfr;
    bool porcelain = false;
};

int run_estimate(const EstimateArgs& args) {
    auto config = load_config(args.config_path);
    const sicov::OverheadModel& model = config.model;
    auto mode = sicov::parse_mode(args.mode);
    if (!mode) {
        std::cerr << "error: unknown mode '" << args.mode << "'\n";
        return kExitUsage;
    }

    auto emit = [&](const std::string& key, const std::string& value, const std::string& human) {
        if (args.porcelain)
            std::cout << key << "=" << value << "\n";
        else
            std::cout << human << "\n";
    };
    auto num = [](double v) { return sicov::detail::format_double(v); };

    emit("mode", std::string(sicov::mode_name(*mode)),
         "mode:                  " + std::string(sicov::mode_name(*mode)));
    emit("slope", num(model.slope(*mode)),
         "t_CPU slope:           " + num(model.slope(*mode)) + " per unit IFR");
    emit("intercept", num(model.intercept), "t_CPU intercept:       " + num(model.intercept));

    if (args.ifr >= 0.0) {
        double tcpu = sicov::estimate_tcpu(model, *mode, args.ifr);
        emit("ifr", num(args.ifr), "IFR:                   " + num(args.ifr));
        emit("tcpu", num(tcpu), "estimated t_CPU:       " + num(tcpu));
        return 0;
    }
    if (args.files >= 0) {
        double per = sicov::estimate_per(args.files, model);
        emit("per_file_coefficient", num(model.per_file_coefficient),
             "PER/file coefficient:  " + num(model.per_file_coefficient));
        emit("files", std::to_string(args.files), "files changed:         " + std::to_string(args.files));
        emit("per", num(per), "estimated PER:         " + num(per));
        return 0;
    }
    if (args.commits >= 0) {
        double ifr = static_cast<double>(args.commits) * args.per_commit_ifr;
        double tcpu = sicov::estimate_tcpu(model, *mode, ifr);
        emit("commits", std::to_string(args.commits),
             "commits batched:       " + std::to_string(args.commits));
        emit("per_commit_ifr", num(args.per_commit_ifr),
             "per-commit IFR:        " + num(args.per_commit_ifr));
        emit("ifr", num(ifr), "batch IFR:             " + num(ifr));
        emit("tcpu", num(tcpu), "estimated t_CPU:       " + num(tcpu));
        return 0;
    }
    if (args.budget > 0.0) {
        double max_ifr = sicov::max_ifr_within_budget(model, *mode, args.budget);
        long long commits = sicov::estimate_commit_budget(model, *mode, args.per_commit_ifr, args.budget);
        emit("budget", num(args.budget), "t_CPU budget:          " + num(args.budget));
        emit("max_ifr", num(max_ifr), "max IFR within budget: " + num(max_ifr));
        emit("per_commit_ifr", num(args.per_commit_ifr),
             "per-commit IFR:        " + num(args.per_commit_ifr));
        emit("commit_budget", std::to_string(commits),
             "commit budget:         " + std::to_string(commits));
        return 0;
    }
    if (args.ifr_cap > 0.0) {
        long long commits = sicov::estimate_commit_budget_for_cap(args.per_commit_ifr, args.ifr_cap);
        emit("ifr_cap", num(args.ifr_cap), "IFR cap:               " + num(args.ifr_cap));
        emit("per_commit_ifr", num(args.per_commit_ifr),
             "per-commit IFR:        " + num(args.per_commit_ifr));
        emit("commit_budget", std::to_string(commits),
             "commit budget:         " + std::to_string(commits));
        return 0;
    }
    std::cerr << "error: provide one of --ifr, --files, --commits, --budget, --ifr-cap\n";
    return kExitUsage;
}

// Rebuilds the target list of a stored profile list so coverage can be
// joined without re-scanning sources: patterns containing glob characters
// are fallback targets, everything else is an exact symbol.
sicov::SelectiveInstrumentationContext sic_from_list(const std::string& text) {
    sicov::SelectiveInstrumentationContext sic;
    if (auto id = sicov::profile_list_commit_id(text))
        sic.commit_id = *id;
    auto list = sicov::parse_profile_list(text);
    for (const auto& entry : list.entries()) {
        if (entry.action != sicov::ProfileAction::Allow)
            continue;
        sicov::FunctionTarget target;
        target.signature.qualified_name = {entry.pattern};
        if (entry.pattern.find('*') != std::string::npos ||
            entry.pattern.find('?') != std::string::npos)
            target.fallback_pattern = entry.pattern;
        else
            target.mangled = sicov::MangledName{entry.pattern};
        sic.targets.push_back(std::move(target));
    }
    return sic;
}

void render_report(const sicov::CoverageReport& report, bool porcelain) {
    if (porcelain) {
        std::cout << sicov::serialize_report(report);
        return;
    }
    long long covered = 0;
    for (const auto& t : report.per_target)
        covered += t.covered ? 1 : 0;
    std::cout << "build:     " << report.build_id.value << "\n";
    std::cout << "commit:    " << report.commit_id << "\n";
    std::cout << "targets:   " << report.per_target.size() << " (" << covered << " covered)\n";
    std::cout << "coverage:  " << sicov::detail::format_double(report.commit_coverage * 100.0)
              << "%\n";
    std::cout << "unmatched: " << report.unmatched_symbols << " symbol(s)\n";
    for (const auto& t : report.per_target)
        std::cout << "  [" << (t.covered ? 'x' : ' ') << "] " << t.pattern
                  << " hits=" << t.total_hits << " matched=" << t.matched_symbols << "\n";
}

struct ReportArgs {
    std::string sic_path;
    std::string records_path;
    std::string build_id;
    std::string store;
    bool force = false;
    bool merge = false;
    bool porcelain = false;
};

int run_ingest(const ReportArgs& args) {
    auto sic = sic_from_list(read_file_or_throw(args.sic_path));
    auto records = sicov::ingest_records(read_file_or_throw(args.records_path));
    auto report = sicov::build_report(sic, records, sicov::BuildId{args.build_id});
    auto mode = sicov::StoreMode::Reject;
    if (args.merge)
        mode = sicov::StoreMode::MergeSum;
    else if (args.force)
        mode = sicov::StoreMode::Overwrite;
    sicov::store_report(report, default_store_root(args.store), mode);
    render_report(args.merge ? sicov::load_report(default_store_root(args.store),
                                                  sicov::BuildId{args.build_id})
                             : report,
                  args.porcelain);
    return 0;
}

int run_show(const ReportArgs& args) {
    auto report = sicov::load_report(default_store_root(args.store), sicov::BuildId{args.build_id});
    render_report(report, args.porcelain);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"selective instrumentation from commits: profile lists, overhead "
                 "estimates, and commit-scoped coverage reports"};
    app.require_subcommand(1);

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand(
        "extract", "build a SIC from a unified diff and emit its profile list");
    extract->add_option("--repo", extract_args.repo, "repository root (post-image working tree)");
    extract->add_option("--diff", extract_args.diff_path, "unified diff file ('-' = stdin)");
    extract->add_option("--commit", extract_args.commit_id,
                        "commit identifier (default: hash of the diff)");
    extract->add_option("--out", extract_args.out_dir, "output directory for .list/.sic files");
    extract->add_option("--compdb", extract_args.compdb_path,
                        "compilation database for frontend context");
    extract->add_option("--config", extract_args.config_path, "model config file");
    extract->add_option("--ext", extract_args.extensions,
                        "source suffixes to keep (default .cpp .cc .cxx)");
    extract->add_option("--total-functions", extract_args.total_functions,
                        "codebase |F| for IFR reporting");
    extract->add_flag("--porcelain", extract_args.porcelain, "machine-readable output");

    EstimateArgs estimate_args;
    auto* estimate =
        app.add_subcommand("estimate", "model instrumentation overhead for a scenario");
    estimate->add_option("--mode", estimate_args.mode, "instrumentation mode: fe or ir");
    estimate->add_option("--config", estimate_args.config_path, "model config file");
    auto* opt_ifr = estimate->add_option("--ifr", estimate_args.ifr, "IFR to cost out");
    auto* opt_files =
        estimate->add_option("--files", estimate_args.files, "files changed (PER estimate)");
    auto* opt_commits =
        estimate->add_option("--commits", estimate_args.commits, "commits to batch");
    auto* opt_budget =
        estimate->add_option("--budget", estimate_args.budget, "t_CPU budget ratio");
    auto* opt_cap = estimate->add_option("--ifr-cap", estimate_args.ifr_cap, "explicit IFR cap");
    opt_ifr->excludes(opt_files)->excludes(opt_commits)->excludes(opt_budget)->excludes(opt_cap);
    opt_files->excludes(opt_commits)->excludes(opt_budget)->excludes(opt_cap);
    opt_commits->excludes(opt_budget)->excludes(opt_cap);
    opt_budget->excludes(opt_cap);
    estimate->add_option("--per-commit-ifr", estimate_args.per_commit_ifr,
                         "per-commit IFR (default: published median commit)");
    estimate->add_flag("--porcelain", estimate_args.porcelain, "machine-readable output");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "coverage report operations");
    report->require_subcommand(1);
    auto* ingest = report->add_subcommand(
        "ingest", "join run coverage records against a profile list and store the report");
    ingest->add_option("--sic", report_args.sic_path, "profile list (.list) of the build")
        ->required();
    ingest->add_option("--records", report_args.records_path, "coverage record file")->required();
    ingest->add_option("--build", report_args.build_id, "build identifier")->required();
    ingest->add_option("--store", report_args.store, "report store root (or $SICOV_STORE)");
    ingest->add_flag("--force", report_args.force, "overwrite an existing report");
    ingest->add_flag("--merge", report_args.merge, "merge hit counts into an existing report");
    ingest->add_flag("--porcelain", report_args.porcelain, "machine-readable output");
    auto* show = report->add_subcommand("show", "render the stored report for a build");
    show->add_option("--build", report_args.build_id, "build identifier")->required();
    show->add_option("--store", report_args.store, "report store root (or $SICOV_STORE)");
    show->add_flag("--porcelain", report_args.porcelain, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (extract->parsed())
            return run_extract(extract_args);
        if (estimate->parsed())
            return run_estimate(estimate_args);
        if (ingest->parsed())
            return run_ingest(report_args);
        if (show->parsed())
            return run_show(report_args);
    } catch (const sicov::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sicov::scan_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const sicov::pipeline_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const sicov::conflict_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConflict;
    } catch (const sicov::not_found_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotFound;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
