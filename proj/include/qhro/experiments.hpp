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

#ifndef QHRO_EXPERIMENTS_HPP
#define QHRO_EXPERIMENTS_HPP

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qhro/harness.hpp"
#include "qhro/relstate.hpp"

namespace qhro {

/// Slack applied to every O(.) bound. An artifact policy, since the underlying constants are unstated.
inline constexpr double kSlack = 5.0;
/// Absolute tolerance for the exact hybrid identities (TD and overlap).
inline constexpr double kIdentityTol = 1e-8;

enum class MetricClass { Exact, Asymptotic, Info };
std::string to_string(MetricClass c);

/// Grid coordinates of one measurement; -1 marks an unused coordinate.
struct GridPoint {
    int n = -1;
    int lambda = -1;
    int m_in = -1;
    int t = -1;
    int s = -1;
    int ell = -1;
};

struct Measurement {
    GridPoint at;
    std::string metric;
    double value = 0;
    double bound = 0;
    double stderr = 0;
    bool pass = true;
    MetricClass cls = MetricClass::Exact;
    std::string rule;
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::json params;
    uint64_t seed = 0;
    std::string bound_expression;
    std::string pass_rule;
    std::vector<Measurement> rows;
    std::vector<std::string> notes;
    /// Not serialized, so reports stay byte-identical across runs.
    double wall_seconds = 0;

    bool pass() const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
    /// gnuplot columns "n td stderr bound" for the rows named `metric`, or empty if none.
    std::string td_vs_n(const std::string &metric = "td") const;
};

struct InvalidParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RunOptions {
    uint64_t seed = 1;
    int jobs = 0;  // 0: default_jobs()
};

// ---------------------------------------------------------------------------
// Typed experiments. Every function validates its parameters (InvalidParams).

struct MhBoundParams {
    std::vector<int> n{2, 3, 4};
    int t = 2;
    int m_anc = 1;
    int trials = 20000;
    /// "auto" uses xor_compare at t = 2 and seeded random interleaves otherwise.
    std::string program = "auto";
};
ExperimentReport exp_mh_bound(const MhBoundParams &p, const RunOptions &o);

struct Pru2Params {
    std::vector<int> n{3, 4};
    int lambda = 0;  // 0: lambda = n
    int t = 2;       // total queries; ell of them go to the construction
    int ell = 1;
    int m_anc = 1;
    int trials = 20000;
    int exact_n = 3;  // exact hybrid chain; 0 skips it
};
ExperimentReport exp_pru2(const Pru2Params &p, const RunOptions &o);

struct Pru1Params {
    int n = 3;
    int lambda = 3;
    int ell = 1;
    int t = 3;
    int m_anc = 0;
    int trials = 300;
    std::string mode = "secure";  // secure | break
    int c = 8;                    // break mode: copies per key = c * lambda
};
ExperimentReport exp_pru1(const Pru1Params &p, const RunOptions &o);

struct PrsParams {
    std::vector<int> n{4};
    std::vector<int> lambda{2};
    int t = 2;
    int s = 2;
    int trials = 20000;
    /// Path-recording mass check, run at reduced size.
    int exact_n = 3;
    int exact_lambda = 2;
    int exact_t = 1;
    int exact_s = 2;
};
ExperimentReport exp_prs(const PrsParams &p, const RunOptions &o);

struct PrfsParams {
    std::vector<int> n{4};
    std::vector<int> lambda{2};
    int m_in = 1;
    int t = 2;
    int trials = 20000;
    int exact_n = 3;
    int exact_lambda = 2;
    int exact_m_in = 1;
    int exact_t = 1;
};
ExperimentReport exp_prfs(const PrfsParams &p, const RunOptions &o);

struct CfBoundParams {
    int n_max = 4;
    int ell_max = 2;
    int size_max = 3;
};
ExperimentReport exp_cf_bound(const CfBoundParams &p, const RunOptions &o);

struct SplitAugmentParams {
    int n = 3;
    int t = 1;
    int m_anc = 1;
};
ExperimentReport exp_split_augment(const SplitAugmentParams &p, const RunOptions &o);

// ---------------------------------------------------------------------------
// Exact hybrid chains, exposed for tests.

struct Pru2Chain {
    double good_mass = 0;        // ||Pi_good psi_2||^2
    double td_hybrids = 0;       // TD(rho_2, rho_3)
    double overlap = 0;          // Re <Psi_2|Psi_3>
    double invisibility_2 = 0;   // TD(Tr Pi psi_2, Tr V Pi psi_2)
    double invisibility_3 = 0;   // TD(Tr psi_3, Tr Psi_3)
    double unmapped_mass = 0;    // good mass the rewrite chain could not place
    size_t labels = 0;
};
/// Two-query construction: psi_2 single-slot PR with a purified key, psi_3 two-slot injective PR.
Pru2Chain pru2_chain(const AdversaryProgram &p, int ell);

struct Pru1Chain {
    double td_hybrids = 0;  // TD(rho_2, rho_3)
    double overlap = 0;     // |<W psi_2 | psi_3>|
    double pruned_mass = 0;
    size_t labels = 0;
};
/// One-query construction at CF parameters (ell, lambda): psi_2 with a purified key, psi_3 joint CF.
Pru1Chain pru1_chain(const AdversaryProgram &p, int n, int lambda, int ell);

/// t query slots: ell to "G", t - ell to "U", in a seeded order.
std::vector<std::string> query_schedule(int t, int ell, uint64_t seed);

/// One copy of "G" on |0>, one "U" query on |g||0>, SWAP test; the view is the ancilla.
AdversaryProgram prs_block(int n, int lambda, uint32_t guess, bool copy, bool query);
/// Classical query of "F" on w, one "U" query on |g||w||0>, SWAP test; the view is the ancilla.
AdversaryProgram prfs_block(int n, int lambda, int m_in, uint32_t guess, uint32_t w, bool query);

// ---------------------------------------------------------------------------
// Registry.

struct ParamSpec {
    std::string name;
    nlohmann::json default_value;
    std::string help;
};

struct ExperimentSpec {
    std::string name;
    std::string summary;
    std::string anchor;
    std::string bound_expression;
    std::string pass_rule;
    std::vector<std::string> preconditions;
    std::vector<ParamSpec> params;
    std::function<ExperimentReport(const nlohmann::json &, const RunOptions &)> run;
};

/// Sorted by name.
const std::vector<ExperimentSpec> &registry();
/// nullptr if unknown.
const ExperimentSpec *find_experiment(const std::string &name);
/// Defaults merged with `overrides`; unknown keys and wrong types raise InvalidParams.
nlohmann::json resolve_params(const ExperimentSpec &spec, const nlohmann::json &overrides);
ExperimentReport run_experiment(const std::string &name, const nlohmann::json &overrides, const RunOptions &o);

}  // namespace qhro

#endif
