// Copyright 2026 The pdmwit Authors
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

// pdmwit: run config scenarios and property suites.
//
//   pdmwit run --config scenario.json --out results/ [--seed N] [--threads N]
//   pdmwit verify [--suite all|pdm|simulate|coherence|lg] [--trials N] [--seed N]
//
// Exit status: 0 ok, 1 numerical failure or failed invariant, 2 invalid input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pdmwit/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitValidation = 2;

bool all_finite(const pdmwit::Json &j) {
    if (j.is_number_float()) {
        return std::isfinite(j.get<double>());
    }
    if (j.is_structured()) {
        for (const auto &e : j) {
            if (!all_finite(e)) {
                return false;
            }
        }
    }
    return true;
}

int cmd_run(const std::string &config_path, const std::string &out_dir,
            std::optional<std::uint64_t> seed, unsigned threads) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config " << config_path << "\n";
        return kExitValidation;
    }
    std::stringstream text;
    text << in.rdbuf();

    pdmwit::Scenario scenario;
    try {
        scenario = pdmwit::parse_scenario(pdmwit::parse_config_text(text.str()), seed);
    } catch (const pdmwit::ConfigError &e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kExitValidation;
    }

    pdmwit::RunOutput out;
    try {
        out = pdmwit::execute_scenario(scenario, threads);
    } catch (const std::exception &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    if (!all_finite(out.json)) {
        std::cerr << "numerical failure: non-finite value in " << scenario.kind << " report\n";
        return kExitNumerical;
    }
    try {
        pdmwit::write_outputs(out_dir, scenario.kind, out);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    std::cout << out.summary;
    return out.ok ? kExitOk : kExitNumerical;
}

int cmd_verify(const std::string &suite, std::int64_t trials, std::optional<std::uint64_t> seed,
               unsigned threads, const std::string &fault) {
    pdmwit::VerifyOptions opts;
    opts.trials = trials;
    opts.threads = threads;
    if (seed) {
        opts.seed = *seed;
    }
    if (fault == "t1-sign") {
        opts.fault = pdmwit::Fault::t1_sign;
    }
    const auto results = pdmwit::run_verify(suite, opts);
    std::cout << pdmwit::detail::verify_report(results);
    std::size_t passed = 0;
    for (const auto &r : results) {
        passed += r.passed() ? 1 : 0;
    }
    std::cout << passed << "/" << results.size() << " invariants passed\n";
    return passed == results.size() ? kExitOk : kExitNumerical;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Pseudo-density matrices, spatial incompatibility and temporal witnesses"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    unsigned threads = 1;

    auto *run = app.add_subcommand("run", "Run a JSON scenario and write <kind>.json / <kind>.csv");
    std::string config_path;
    std::string out_dir = ".";
    run->add_option("--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--seed", seed, "Seed (overrides the config)");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1U, 1024U));

    auto *verify = app.add_subcommand("verify", "Run the randomized property suites");
    std::string suite = "all";
    std::int64_t trials = 200;
    std::string fault = "none";
    verify->add_option("--suite", suite, "Suite to run")
        ->check(CLI::IsMember(pdmwit::verify_suite_names()));
    verify->add_option("--trials", trials, "Trials per invariant")->check(CLI::Range(1, 1000000));
    verify->add_option("--seed", seed, "Root seed");
    verify->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1U, 1024U));
    verify->add_option("--inject-fault", fault, "Mutation check: flip the sign of the closed-form T_1")
        ->check(CLI::IsMember({"none", "t1-sign"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitValidation;
    }

    if (*run) {
        return cmd_run(config_path, out_dir, seed, threads);
    }
    return cmd_verify(suite, trials, seed, threads, fault);
}
