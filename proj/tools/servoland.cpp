// Copyright 2026 The Servoland Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line harness: single runs, Monte Carlo batches and trace plots.
//
// Exit codes: 0 success, 1 other failure, 2 configuration or usage error,
// 3 simulation invariant violation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "servoland/config.hpp"
#include "servoland/outputs.hpp"
#include "servoland/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace servoland;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;

ExperimentConfig load_or_default(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

std::string describe(const RunSummary& s) {
    std::string text = "seed " + std::to_string(s.seed) + ": " + std::string(to_string(s.outcome.result));
    if (s.outcome.detection_to_touchdown) {
        text += ", detection to touchdown " + format_number(*s.outcome.detection_to_touchdown) + " s";
    }
    if (!s.outcome.final_event.empty()) {
        text += " (" + s.outcome.final_event + ")";
    }
    return text;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const fs::path& out) {
    const ExperimentConfig config = load_or_default(config_path);
    const RunRecord record = run_scenario(config, seed.value_or(config.seed));
    emit_run_outputs(record, out);
    write_text_file(out / "config.yaml", dump_config(config));
    std::cout << describe(record.summary) << "\n";
    return kExitOk;
}

int cmd_mc(const std::string& config_path, std::optional<int> runs, std::optional<std::uint64_t> seed,
           const fs::path& out, bool traces) {
    ExperimentConfig config = load_or_default(config_path);
    if (runs) {
        config.n_runs = *runs;
    }
    if (seed) {
        config.seed = *seed;
    }
    config.validate();
    std::vector<RunRecord> records;
    const MonteCarloReport report = run_monte_carlo(config, traces ? &records : nullptr);
    write_text_file(out / "summary.csv", format_summary_csv(report.runs));
    write_text_file(out / "report.json", format_report_json(report));
    write_text_file(out / "config.yaml", dump_config(config));
    for (const auto& r : records) {
        write_text_file(out / "traces" / ("run_" + std::to_string(r.summary.seed) + ".csv"), format_trace_csv(r));
    }
    std::cout << "runs " << report.n_runs << ", landed " << report.landed << " ("
              << format_number(report.landing_rate) << "), approached " << report.approached << " ("
              << format_number(report.approach_rate) << ")\n";
    if (report.mean_detection_to_touchdown) {
        std::cout << "detection to touchdown: mean " << format_number(*report.mean_detection_to_touchdown)
                  << " s, min " << format_number(*report.min_detection_to_touchdown) << " s, max "
                  << format_number(*report.max_detection_to_touchdown) << " s\n";
    }
    return kExitOk;
}

int cmd_plot(const fs::path& trace_path, const std::optional<fs::path>& out) {
    const TraceTable table = read_trace_csv(trace_path);
    const fs::path dir = out.value_or(trace_path.parent_path());
    for (const auto& p : write_plots(table, dir, trace_path.stem().string())) {
        std::cout << p.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual-servo landing simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    fs::path out_dir = "out";

    auto* run = app.add_subcommand("run", "simulate one scenario");
    run->add_option("--config", config_path, "YAML configuration")->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "random seed (default: experiment.seed)");
    run->add_option("--out", out_dir, "output directory");

    std::optional<int> runs;
    bool traces = false;
    auto* mc = app.add_subcommand("mc", "Monte Carlo batch");
    mc->add_option("--config", config_path, "YAML configuration")->check(CLI::ExistingFile);
    mc->add_option("--runs", runs, "number of runs (default: experiment.n_runs)");
    mc->add_option("--seed", seed, "first seed (default: experiment.seed)");
    mc->add_option("--out", out_dir, "output directory");
    mc->add_flag("--traces", traces, "also write every run's trace");

    fs::path trace_path;
    std::optional<fs::path> plot_out;
    auto* plot = app.add_subcommand("plot", "render figures from a trace CSV");
    plot->add_option("--trace", trace_path, "trace CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output directory (default: next to the trace)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) {
            return cmd_run(config_path, seed, out_dir);
        }
        if (mc->parsed()) {
            return cmd_mc(config_path, runs, seed, out_dir, traces);
        }
        return cmd_plot(trace_path, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SimulationInvariantError& e) {
        std::cerr << "simulation invariant violated: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
