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

#ifndef QHRO_HARNESS_HPP
#define QHRO_HARNESS_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "qhro/constructions.hpp"
#include "qhro/linalg.hpp"
#include "qhro/relstate.hpp"

namespace qhro {

/// Unitary on the listed adversary qubits (all qubits when the list is empty).
struct Interleave {
    CMat gate;
    std::vector<int> qubits;
};

/// Basis permutation |i> -> |map[i]> on the listed qubits.
struct Permutation {
    std::vector<uint32_t> map;
    std::vector<int> qubits;
};

/// Quantum query on [offset, offset + n). An optional control block is passed to the oracle
/// as its input value (per-input oracle families, keyed shifts).
struct QuantumQuery {
    std::string oracle;
    int offset = 0;
    int control_offset = -1;
    int control_width = 0;
};

/// Deferred-measurement classical query: copies the input block into a fresh transcript block,
/// then applies the oracle to the answer block controlled on the transcript.
struct ClassicalQuery {
    std::string oracle;
    int input_offset = 0;
    int input_width = 0;
    int transcript_offset = 0;
    int answer_offset = 0;
};

using Step = std::variant<Interleave, Permutation, QuantumQuery, ClassicalQuery>;

struct AdversaryProgram {
    int n = 0;      // oracle register width
    int m_anc = 0;  // every other adversary qubit (ancillas, transcripts, extra registers)
    std::vector<Step> steps;
    /// Declared number of queries per oracle; must match the steps.
    std::map<std::string, int> declared;
    /// Qubits kept in the view; empty keeps everything.
    std::vector<int> view;

    int qubits() const { return n + m_anc; }
    int view_qubits() const { return view.empty() ? qubits() : static_cast<int>(view.size()); }
    std::map<std::string, int> query_counts() const;
    void validate() const;
    nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Concrete execution.

struct ConcreteOracle {
    OracleDescriptor desc;
    /// Base unitaries; a family of size 2^w is indexed by the query's control value.
    std::map<std::string, std::vector<UnitaryMatrix>> bases;
    std::map<std::string, uint32_t> keys;
};
using ConcreteBindings = std::map<std::string, ConcreteOracle>;

StateVector run_concrete(const AdversaryProgram &p, const ConcreteBindings &b);
/// Each oracle id bound to a bare unitary.
StateVector run_concrete(const AdversaryProgram &p, const std::map<std::string, UnitaryMatrix> &b);

/// Applies one step to a concrete state; exposed for classical-query tests.
void apply_step(CVec &state, int qubits, const Step &step, const ConcreteBindings &b);

// ---------------------------------------------------------------------------
// Path-recording execution.

struct PrBase {
    std::string slot;
    /// Other slots whose images the output must also avoid (global injectivity / joint CF).
    std::vector<std::string> shared;
    std::optional<CFParams> cf;
    /// Per-control-value target slots (independent per-input oracles).
    std::vector<std::string> slot_by_control;
};

struct PrOracle {
    OracleDescriptor desc;
    std::map<std::string, PrBase> bases;
    /// Bases bound to fixed unitaries instead of recording slots.
    std::map<std::string, UnitaryMatrix> fixed;
};

struct PrSetup {
    std::vector<SlotSpec> slots;
    /// Key name and bit length; each becomes a uniformly superposed key slot after the relation slots.
    std::vector<std::pair<std::string, int>> keys;
    std::map<std::string, PrOracle> oracles;
    size_t cap = PurifiedState::kDefaultCap;
};

PurifiedState run_pr(const AdversaryProgram &p, const PrSetup &setup);
/// Applies one step to a purified state.
PurifiedState apply_step(const PurifiedState &s, const Step &step, const PrSetup &setup);

struct ViewResult {
    DensityMatrix reduced;
    size_t labels = 0;
    double mass = 0;
    double norm_deficit = 0;
    /// Mass per total number of recorded items across relation and multiset slots.
    std::vector<double> mass_by_size;
};
/// Tr_E on the adversary registers, optionally keeping only `keep`.
ViewResult reduce_view(const PurifiedState &s, const std::vector<int> &keep = {});

// ---------------------------------------------------------------------------
// Monte Carlo over sampled oracles.

using BindingSampler = std::function<ConcreteBindings(Rng &)>;

struct McOptions {
    int trials = 1000;
    uint64_t seed = 0;
    int jobs = 0;  // 0: default_jobs()
    int batches = 50;
};

/// Mean view over trials plus fixed-size batch means for resampling.
struct McView {
    CMat mean;
    std::vector<CMat> batch_means;
    std::vector<int> batch_sizes;
    int trials = 0;
};

/// Per-trial view is the tensor product of the block programs' views; all blocks share the sampled oracles.
McView haar_view_mc(const std::vector<AdversaryProgram> &blocks, const BindingSampler &sampler, const McOptions &opt);

struct TdEstimate {
    double td = 0;
    /// Bootstrap RMS of TD(resampled mean, mean): the trace-norm noise level of the estimate.
    double stderr = 0;
};
TdEstimate td_estimate(const McView &a, const CMat &exact, uint64_t seed, int replicates = 100);
TdEstimate td_estimate(const McView &a, const McView &b, uint64_t seed, int replicates = 100);

/// QHRO_JOBS if set, else the hardware concurrency.
int default_jobs();

/// Runs f(0..count-1) over a fixed pool; each index is handled by exactly one worker.
void parallel_for(int count, int jobs, const std::function<void(int)> &f);

// ---------------------------------------------------------------------------
// Program library.

/// t registers of n qubits, each queried once on |0>.
AdversaryProgram program_parallel_zero(int n, int t, const std::string &oracle);
/// Two registers queried on |0>, then A1 ^= A2; the view is A1.
AdversaryProgram program_xor_compare(int n, const std::string &oracle);
/// Seeded Haar interleaves on n + m_anc qubits between queries on the first n qubits.
AdversaryProgram program_random(int n, int m_anc, const std::vector<std::string> &queries, uint64_t seed);
/// Fourier-transform interleaves on the oracle register between queries.
AdversaryProgram program_fourier(int n, int m_anc, const std::vector<std::string> &queries);
/// Appends `count` queries on a throwaway basis-state register [offset, offset + n).
AdversaryProgram pad_dummy_queries(AdversaryProgram p, const std::string &oracle, int count, int offset);

/// Controlled swap of two width-w blocks with control qubit c, as a permutation over 2w + 1 qubits.
Permutation controlled_swap(int control, int a_offset, int b_offset, int width);
CMat hadamard_gate();
CMat fourier_gate(int n);

}  // namespace qhro

#endif
