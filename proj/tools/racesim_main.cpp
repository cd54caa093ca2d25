#include "racesim/scenario/runner.hpp"
#include "racesim/util/error.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using racesim::scenario::RunOptions;
using racesim::scenario::RunResult;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitTestFailure = 1;
constexpr int kExitUsage = 2;

std::optional<std::uint64_t> env_seed() {
    if (const char *env = std::getenv("RACESIM_SEED")) {
        return static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
    }
    return std::nullopt;
}

void print_run_summary(const RunResult &result) {
    const auto &rep = result.report;
    if (rep.best_lap_time > 0.0) {
        std::cout << "best lap time: " << std::fixed << std::setprecision(3) << rep.best_lap_time
                  << " s\n";
    } else {
        std::cout << "best lap time: n/a (no complete lap)\n";
    }
    std::cout << "laps completed: " << rep.laps_completed << ", distance: " << std::fixed
              << std::setprecision(1) << rep.total_distance << " m\n";
    if (rep.passed()) {
        std::cout << "result: PASS\n";
    } else {
        std::cout << "result: FAIL (" << rep.errors.size() << " test error"
                  << (rep.errors.size() == 1 ? "" : "s") << ")\n";
        for (const auto &e : rep.errors) {
            std::cout << "  [" << e.test << "] " << e.description << " (lap " << e.lap << ", s="
                      << std::setprecision(1) << e.s << " m)\n";
        }
    }
}

struct BatchEntry {
    std::string dir;
    std::string name;
    std::vector<std::string> tags;
};

std::vector<BatchEntry> collect_scenarios(const std::vector<std::string> &paths) {
    std::vector<BatchEntry> entries;
    auto add_dir = [&](const fs::path &dir) {
        auto [cfg, script] = racesim::scenario::load_scenario(dir.string());
        entries.push_back({dir.string(), cfg.name, cfg.sim.tags});
    };
    for (const auto &p : paths) {
        fs::path path(p);
        if (!fs::is_directory(path)) {
            throw racesim::IoError("not a directory: " + p);
        }
        if (fs::exists(path / "config.yaml")) {
            add_dir(path);
            continue;
        }
        std::vector<fs::path> subdirs;
        for (const auto &e : fs::directory_iterator(path)) {
            if (e.is_directory() && fs::exists(e.path() / "config.yaml")) {
                subdirs.push_back(e.path());
            }
        }
        std::sort(subdirs.begin(), subdirs.end());
        for (const auto &d : subdirs) {
            add_dir(d);
        }
    }
    return entries;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"racesim - scenario simulation and regression harness"};
    app.require_subcommand(1);

    // run
    auto *run_cmd = app.add_subcommand("run", "run one scenario and write logs + reports");
    std::string run_dir;
    RunOptions run_opts;
    double run_speedup = 0.0;
    std::uint64_t run_seed = 0;
    bool run_gt = false;
    bool run_overview = false;
    std::string run_pacing;
    run_cmd->add_option("scenario", run_dir, "scenario directory")->required();
    run_cmd->add_option("--speedup", run_speedup, "speed-up factor override (>= 1)");
    run_cmd->add_flag("--ground-truth", run_gt, "bypass localization with ground truth");
    run_cmd->add_option("--seed", run_seed, "seed override");
    run_cmd->add_option("--out", run_opts.out_dir, "output directory (default runs/<scenario>)");
    run_cmd->add_flag("--overview-only", run_overview, "skip module reports");
    run_cmd->add_option("--pacing", run_pacing,
                        "pacing mode: as_fast_as_possible | wall_clock_scaled");

    // batch
    auto *batch_cmd = app.add_subcommand("batch", "run a set of scenarios");
    std::vector<std::string> batch_paths;
    std::string batch_tags;
    std::string batch_out = "runs";
    unsigned batch_parallel = 1;
    bool stop_on_failure = false;
    bool prune_passing = false;
    batch_cmd->add_option("paths", batch_paths, "scenario directories (or roots of them)")
        ->required();
    batch_cmd->add_option("--tags", batch_tags, "comma-separated tag filter (any match selects)");
    batch_cmd->add_option("--out", batch_out, "output root (one subdirectory per scenario)");
    batch_cmd->add_option("--parallel", batch_parallel, "concurrent runs");
    batch_cmd->add_flag("--stop-on-failure", stop_on_failure, "abort after the first failure");
    batch_cmd->add_flag("--prune-passing", prune_passing, "delete logs of passing runs");

    // report
    auto *report_cmd = app.add_subcommand("report", "regenerate reports from stored logs");
    std::string report_dir;
    bool report_full = false;
    report_cmd->add_option("log_dir", report_dir, "directory written by 'run'")->required();
    report_cmd->add_flag("--full", report_full, "also generate module reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run_cmd) {
            if (run_speedup != 0.0) {
                run_opts.speedup = run_speedup;
            }
            if (run_gt) {
                run_opts.ground_truth = true;
            }
            if (run_cmd->count("--seed")) {
                run_opts.seed = run_seed;
            } else if (auto s = env_seed()) {
                run_opts.seed = s;
            }
            if (run_overview) {
                run_opts.overview_only = true;
            }
            if (!run_pacing.empty()) {
                if (run_pacing == "as_fast_as_possible") {
                    run_opts.pacing = racesim::simbus::PacingMode::as_fast_as_possible;
                } else if (run_pacing == "wall_clock_scaled") {
                    run_opts.pacing = racesim::simbus::PacingMode::wall_clock_scaled;
                } else {
                    std::cerr << "unknown pacing mode: " << run_pacing << "\n";
                    return kExitUsage;
                }
            }
            if (run_opts.out_dir.empty()) {
                run_opts.out_dir =
                    (fs::path("runs") / fs::path(run_dir).filename()).string();
            }
            RunResult result = racesim::scenario::run_scenario(run_dir, run_opts);
            print_run_summary(result);
            std::cout << "reports written to " << run_opts.out_dir << "\n";
            return result.exit_code();
        }

        if (*batch_cmd) {
            std::vector<std::string> tags;
            std::stringstream ts(batch_tags);
            std::string tag;
            while (std::getline(ts, tag, ',')) {
                if (!tag.empty()) {
                    tags.push_back(tag);
                }
            }
            std::vector<BatchEntry> entries = collect_scenarios(batch_paths);
            if (!tags.empty()) {
                std::erase_if(entries, [&](const BatchEntry &e) {
                    for (const auto &t : tags) {
                        if (std::find(e.tags.begin(), e.tags.end(), t) != e.tags.end()) {
                            return false;
                        }
                    }
                    return true;
                });
            }
            if (entries.empty()) {
                std::cerr << "no scenarios selected\n";
                return kExitUsage;
            }

            std::optional<std::uint64_t> seed = env_seed();
            struct Slot {
                std::future<RunResult> future;
                bool ran = false;
                RunResult result;
                std::string error;
            };
            std::vector<Slot> slots(entries.size());
            bool aborted = false;
            std::size_t next = 0;
            while (next < entries.size() && !aborted) {
                std::size_t wave_end = std::min(next + static_cast<std::size_t>(
                                                           std::max(1u, batch_parallel)),
                                                entries.size());
                for (std::size_t i = next; i < wave_end; ++i) {
                    RunOptions opts;
                    opts.seed = seed;
                    opts.out_dir = (fs::path(batch_out) / entries[i].name).string();
                    slots[i].future = std::async(std::launch::async, [dir = entries[i].dir, opts] {
                        return racesim::scenario::run_scenario(dir, opts);
                    });
                }
                for (std::size_t i = next; i < wave_end; ++i) {
                    try {
                        slots[i].result = slots[i].future.get();
                        slots[i].ran = true;
                        if (stop_on_failure && slots[i].result.exit_code() != 0) {
                            aborted = true;
                        }
                    } catch (const std::exception &e) {
                        slots[i].error = e.what();
                        aborted = stop_on_failure;
                    }
                }
                next = wave_end;
            }

            int exit_code = kExitPass;
            for (std::size_t i = 0; i < entries.size(); ++i) {
                const auto &slot = slots[i];
                if (!slot.error.empty()) {
                    std::cout << entries[i].name << " ERROR - - " << slot.error << "\n";
                    exit_code = std::max(exit_code, kExitUsage);
                    continue;
                }
                if (!slot.ran) {
                    std::cout << entries[i].name << " SKIPPED - -\n";
                    continue;
                }
                const auto &rep = slot.result.report;
                std::cout << entries[i].name << (rep.passed() ? " PASS " : " FAIL ");
                if (rep.best_lap_time > 0.0) {
                    std::cout << std::fixed << std::setprecision(3) << rep.best_lap_time;
                } else {
                    std::cout << "-";
                }
                std::cout << " " << rep.errors.size() << "\n";
                if (!rep.passed()) {
                    exit_code = std::max(exit_code, kExitTestFailure);
                }
                if (prune_passing && rep.passed()) {
                    fs::remove_all(fs::path(batch_out) / entries[i].name);
                }
            }
            return exit_code;
        }

        if (*report_cmd) {
            auto report = racesim::scenario::regenerate_report(report_dir, report_full);
            std::cout << "report regenerated: " << (report.passed() ? "PASS" : "FAIL") << ", "
                      << report.errors.size() << " error(s)\n";
            return kExitPass;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
