// Copyright 2026 The qbayes Authors
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

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "qbayes/errors.hpp"
#include "qbayes/format.hpp"

namespace {

using qbayes::cli::json;

int do_validate(const std::string& path, const qbayes::Tolerances& tol) {
    const auto cfg = qbayes::cli::load_config(path);
    const auto lines = qbayes::cli::validate_objects(cfg, tol);
    bool ok = true;
    for (const auto& l : lines) {
        std::cout << (l.pass ? "PASS " : "FAIL ") << l.kind << " " << l.name;
        if (l.residual) std::cout << " residual=" << qbayes::format_double(*l.residual);
        if (!l.message.empty()) std::cout << " " << l.message;
        std::cout << "\n";
        ok = ok && l.pass;
    }
    std::cout << (ok ? "valid" : "invalid") << " (" << lines.size() << " objects)\n";
    return ok ? 0 : 1;
}

int do_run(const std::string& command, const std::string& path, const qbayes::cli::RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = qbayes::cli::load_config(path);
    const auto summary = qbayes::cli::run_command(cfg, command, opts);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    json out{{"command", summary.command},
             {"seed", summary.seed ? json(*summary.seed) : json(nullptr)},
             {"elapsed_ms", ms},
             {"outputs", summary.outputs}};
    std::cout << out.dump() << "\n";
    return 0;
}

int do_report(const std::string& dir) {
    for (const auto& p : qbayes::cli::write_report(dir)) std::cout << p << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qbayes: finite-dimensional quantum Bayesian inference"};
    app.require_subcommand(1);

    std::string config_path;
    qbayes::cli::RunOptions opts;
    double tol_herm = opts.tol.herm;
    double tol_psd = opts.tol.psd;
    double tol_norm = opts.tol.norm;
    const auto add_tol = [&](CLI::App* sub) {
        sub->add_option("--tol-herm", tol_herm, "Hermiticity tolerance");
        sub->add_option("--tol-psd", tol_psd, "positivity tolerance");
        sub->add_option("--tol-norm", tol_norm, "normalization tolerance");
    };

    auto* validate = app.add_subcommand("validate", "check every object in a config");
    validate->add_option("config", config_path, "config file")->required();
    add_tol(validate);

    std::string command;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    double alpha = 0.0;
    auto* run = app.add_subcommand("run", "run one command on a config");
    run->add_option("command", command, "command name")->required()->check(CLI::IsMember(qbayes::cli::command_names()));
    run->add_option("config", config_path, "config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "RNG seed");
    auto* steps_opt = run->add_option("--steps", steps, "number of steps");
    auto* alpha_opt = run->add_option("--alpha", alpha, "credible level parameter");
    run->add_option("--out-dir", opts.out_dir, "output directory");
    run->add_option("--format", opts.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
    run->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
    add_tol(run);

    std::string run_dir;
    auto* report = app.add_subcommand("report", "merge run artifacts into report.md and report.csv");
    report->add_option("dir", run_dir, "directory with run artifacts")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    opts.tol = qbayes::Tolerances{tol_herm, tol_psd, tol_norm};
    if (*seed_opt) opts.seed = seed;
    if (*steps_opt) opts.steps = steps;
    if (*alpha_opt) opts.alpha = alpha;

    try {
        if (*validate) return do_validate(config_path, opts.tol);
        if (*run) return do_run(command, config_path, opts);
        return do_report(run_dir);
    } catch (const qbayes::cli::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const qbayes::Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
        return e.code() == qbayes::ErrorCode::ParseError ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
