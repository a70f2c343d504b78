// Copyright 2026 The qhro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qhro: list, describe and run the registered experiments.
//
//   qhro list
//   qhro describe exp_pru2
//   qhro run exp_cf_bound --seed 7 --out runs --format both
//   qhro run --config cfg.json
//
// Exit codes: 0 every pass rule holds, 1 some pass rule failed, 2 usage or parameter error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "qhro/experiments.hpp"

namespace fs = std::filesystem;
using qhro::ExperimentReport;
using qhro::InvalidParams;

namespace {

constexpr int kConfigSchema = 1;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
    std::string experiment;
    nlohmann::json params = nlohmann::json::object();
    uint64_t seed = 1;
    std::optional<int> trials;
    std::string out = "runs";
    std::string format = "both";
    int jobs = 0;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path &path, const std::string &data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << data;
}

/// Flat config: schema_version, the run keys, and every remaining key as an experiment parameter.
RunConfig load_config(const std::string &path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw UsageError(path + ": " + e.what());
    }
    if (!j.is_object()) throw UsageError(path + ": config must be a JSON object");
    if (!j.contains("schema_version")) throw UsageError(path + ": missing schema_version");
    if (j["schema_version"] != kConfigSchema) throw UsageError(path + ": unsupported schema_version (expected 1)");
    RunConfig c;
    try {
        for (const auto &[k, v] : j.items()) {
            if (k == "schema_version") continue;
            if (k == "experiment") {
                c.experiment = v.get<std::string>();
            } else if (k == "seed") {
                c.seed = v.get<uint64_t>();
            } else if (k == "trials") {
                c.trials = v.get<int>();
            } else if (k == "out") {
                c.out = v.get<std::string>();
            } else if (k == "format") {
                c.format = v.get<std::string>();
            } else if (k == "jobs") {
                c.jobs = v.get<int>();
            } else {
                c.params[k] = v;  // checked against the experiment's parameter list
            }
        }
    } catch (const nlohmann::json::type_error &e) {
        throw UsageError(path + ": " + e.what());
    }
    return c;
}

const qhro::ExperimentSpec &require_experiment(const std::string &name) {
    const auto *spec = qhro::find_experiment(name);
    if (!spec) throw InvalidParams("unknown experiment '" + name + "' (see 'qhro list')");
    return *spec;
}

int cmd_list() {
    for (const auto &e : qhro::registry()) {
        std::cout << std::left << std::setw(20) << e.name << e.summary << "  [" << e.anchor << "]\n";
    }
    return 0;
}

int cmd_describe(const std::string &name) {
    const auto &e = require_experiment(name);
    std::cout << e.name << ": " << e.summary << "\n";
    std::cout << "anchor:    " << e.anchor << "\n";
    std::cout << "bound:     " << e.bound_expression << "\n";
    std::cout << "pass rule: " << e.pass_rule << "\n";
    std::cout << "preconditions:\n";
    for (const auto &p : e.preconditions) std::cout << "  - " << p << "\n";
    std::cout << "parameters:\n";
    for (const auto &p : e.params) {
        std::cout << "  " << std::left << std::setw(14) << p.name << std::setw(12) << p.default_value.dump() << p.help << "\n";
    }
    std::cout << "slack: C = " << qhro::kSlack << " on every O(.) term (artifact policy)\n";
    return 0;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

fs::path fresh_run_dir(const RunConfig &c) {
    const fs::path base = fs::path(c.out) / c.experiment;
    const std::string stem = timestamp() + "-" + std::to_string(c.seed);
    fs::path dir = base / stem;
    for (int i = 2; fs::exists(dir); ++i) dir = base / (stem + "-" + std::to_string(i));
    fs::create_directories(dir);
    return dir;
}

void print_summary(const ExperimentReport &r) {
    std::cout << r.experiment << " (seed " << r.seed << ")\n";
    for (const auto &m : r.rows) {
        std::ostringstream at;
        auto put = [&](const char *k, int v) {
            if (v >= 0) at << k << "=" << v << " ";
        };
        put("n", m.at.n);
        put("lambda", m.at.lambda);
        put("m", m.at.m_in);
        put("t", m.at.t);
        put("s", m.at.s);
        put("ell", m.at.ell);
        std::printf("  %-4s %-11s %-28s %-36s value=%-12.6g bound=%-12.6g stderr=%.3g\n", m.pass ? "ok" : "FAIL",
                    qhro::to_string(m.cls).c_str(), at.str().c_str(), m.metric.c_str(), m.value, m.bound, m.stderr);
    }
    std::cout << (r.pass() ? "PASS" : "FAIL") << "\n";
}

int cmd_run(RunConfig c) {
    if (c.experiment.empty()) throw UsageError("run: no experiment named (positional or config 'experiment')");
    if (c.format != "json" && c.format != "csv" && c.format != "both") throw UsageError("run: --format must be json, csv or both");
    if (c.jobs < 0) throw UsageError("run: --jobs must be >= 0");
    const auto &spec = require_experiment(c.experiment);
    if (c.trials) {
        const bool takes = std::any_of(spec.params.begin(), spec.params.end(), [](const auto &p) { return p.name == "trials"; });
        if (!takes) throw InvalidParams(c.experiment + " has no trials parameter");
        c.params["trials"] = *c.trials;
    }
    auto started = std::chrono::steady_clock::now();
    auto report = qhro::run_experiment(c.experiment, c.params, qhro::RunOptions{c.seed, c.jobs});
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const fs::path dir = fresh_run_dir(c);
    if (c.format != "csv") write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    if (c.format != "json") write_file(dir / "report.csv", report.to_csv());
    if (auto dat = report.td_vs_n(); !dat.empty()) write_file(dir / "td_vs_n.dat", dat);
    // Wall time varies run to run, so it lives beside the report rather than in it.
    nlohmann::json timing{{"wall_seconds", wall}, {"jobs", c.jobs == 0 ? qhro::default_jobs() : c.jobs}};
    write_file(dir / "timing.json", timing.dump(2) + "\n");

    print_summary(report);
    std::cout << "report: " << dir.string() << "\n";
    return report.pass() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qhro: exact-simulation lab for pseudorandom unitaries and states with a common Haar oracle"};
    app.require_subcommand(1);

    app.add_subcommand("list", "List the registered experiments");

    auto *describe = app.add_subcommand("describe", "Show parameters, bound and pass rule of one experiment");
    std::string describe_name;
    describe->add_option("name", describe_name, "Experiment name")->required();

    auto *run = app.add_subcommand("run", "Run one experiment and write its reports");
    std::string run_name, config_path, out, format;
    std::optional<uint64_t> seed;
    std::optional<int> trials, jobs;
    run->add_option("name", run_name, "Experiment name");
    run->add_option("--config", config_path, "Flat JSON config with schema_version");
    run->add_option("--seed", seed, "Master seed (u64)");
    run->add_option("--trials", trials, "Monte Carlo trials (experiments that take them)");
    run->add_option("--out", out, "Output directory (default runs)");
    run->add_option("--format", format, "json | csv | both");
    run->add_option("--jobs", jobs, "Worker threads (0: QHRO_JOBS or hardware concurrency)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (app.got_subcommand("list")) return cmd_list();
        if (app.got_subcommand("describe")) return cmd_describe(describe_name);

        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!run_name.empty()) {
            if (!c.experiment.empty() && c.experiment != run_name) {
                throw UsageError("run: experiment '" + run_name + "' disagrees with config '" + c.experiment + "'");
            }
            c.experiment = run_name;
        }
        if (seed) c.seed = *seed;
        if (trials) c.trials = *trials;
        if (!out.empty()) c.out = out;
        if (!format.empty()) c.format = format;
        if (jobs) c.jobs = *jobs;
        return cmd_run(std::move(c));
    } catch (const std::exception &e) {  // usage, config and parameter errors alike
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
