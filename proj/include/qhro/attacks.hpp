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

#ifndef QHRO_ATTACKS_HPP
#define QHRO_ATTACKS_HPP

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include "json.hpp"

#include "qhro/linalg.hpp"

namespace qhro {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// B (U^{(x)t}) A with A, B on t*n qubits.
struct NonAdaptiveCircuit {
    UnitaryMatrix a;
    UnitaryMatrix b;
    int t = 1;
    int n = 1;

    void validate() const;
    /// The concrete unitary B U^{(x)t} A.
    UnitaryMatrix apply(const UnitaryMatrix &u) const;
};

/// Choi state of B U^{(x)t} A from t copies of |Phi_U>, via (A^T (x) B) on the regrouped copies.
StateVector choi_from_copies(const NonAdaptiveCircuit &c, const std::vector<StateVector> &copies);

/// |<Phi_U|Phi_V>|^2 = |Tr(U^dag V)|^2 / N^2.
double choi_overlap(const UnitaryMatrix &u, const UnitaryMatrix &v);

struct TailEstimate {
    double tail = 0;  // empirical Pr[overlap >= 1/2]
    double stderr = 0;
    double mean_overlap = 0;
    double levy_bound = 0;  // 2 exp(-2^n / 96), reported only
    int samples = 0;
};
/// Tail of the Choi overlap with U0 (identity by default) over Haar U.
TailEstimate haar_choi_overlap_tail(int n, int samples, Rng &rng, const std::optional<UnitaryMatrix> &u0 = std::nullopt);

struct SwapOrOutcome {
    std::vector<double> fidelities;  // per key
    std::vector<bool> passed;        // per key: every SWAP test accepted
    bool accept = false;
    /// Exact acceptance 1 - prod_k (1 - ((1 + F_k)/2)^tests).
    double accept_probability = 0;
    double max_fidelity = 0;
    /// 2^lambda ((1 + F_max)/2)^tests, the union bound on false acceptance.
    double union_bound = 0;
};

/// Per-key SWAP-test batteries standing in for the quantum-OR circuit: the key passes when all
/// tests against the oracle copies accept. `oracle_copies` sets the number of tests.
SwapOrOutcome swap_or_attack(const std::vector<StateVector> &oracle_copies, const std::vector<StateVector> &haar_copies,
                             const std::vector<NonAdaptiveCircuit> &family, Rng &rng);

/// (Z^k (x) I) U as B_k U A_k: A = I, B = Z^{k||0}.
std::vector<NonAdaptiveCircuit> one_query_family(int n, int lambda);
/// U X^{k||0} as B_k U A_k: the one-query hypotheses used against U X^k U.
std::vector<NonAdaptiveCircuit> shifted_input_family(int n, int lambda);

enum class AttackTarget { OneQuery, TwoQuery };

struct AttackReport {
    std::string attack;
    nlohmann::json params;
    int trials = 0;
    double real_accept = 0;
    double ideal_accept = 0;
    double advantage = 0;
    double stderr = 0;
    double ci_low = 0;
    double ci_high = 0;
    nlohmann::json extra;

    nlohmann::json to_json() const;
};

/// Real world: O = C_{k*}^U for Haar U and uniform k*. Ideal world: O = V independent Haar.
/// The attacker sees c*lambda copies of |Phi_O> and the copies of |Phi_U> it needs.
AttackReport swap_or_experiment(AttackTarget target, int n, int lambda, int c, int trials, uint64_t seed, int jobs = 0);

// ---------------------------------------------------------------------------
// Symmetric-subspace rank argument.

BigInt binomial(const BigInt &n, unsigned k);
/// C(d + t - 1, t).
BigInt sym_dim(const BigInt &d, unsigned t);
/// 2^lambda C(D+l+t-1, l+t) / (C(D+l-1, l) C(D+t-1, t)) with D = 2^{2m}.
BigRational rank_ratio(int lambda, int m, int ell, int t);
double to_double(const BigRational &r);

/// Orthonormal basis (columns) of the accepting subspace below.
CMat rank_projector_basis(int m, int ell, int t, const std::vector<NonAdaptiveCircuit> &family);
/// Orthonormal projector onto the span over keys of (I^{(x)t} (x) (A_k^T (x) B_k)^{(x)l}) Sym^{t+l}(C^{4^m}).
CMat rank_projector(int m, int ell, int t, const std::vector<NonAdaptiveCircuit> &family);

/// Measures {Pi, I - Pi} on |Phi_U>^t (x) |Phi_O>^l with O = C_k^U (real) or Haar V (ideal).
AttackReport rank_projector_attack(int m, int lambda, int ell, int t, int trials, uint64_t seed, int jobs = 0);

}  // namespace qhro

#endif
