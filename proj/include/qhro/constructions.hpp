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

#ifndef QHRO_CONSTRUCTIONS_HPP
#define QHRO_CONSTRUCTIONS_HPP

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "qhro/linalg.hpp"

namespace qhro {

/// Call to a named base oracle on the sub-block [offset, offset + width) of the oracle register.
struct OracleCall {
    std::string base;
    int offset = 0;
    int width = -1;  // -1: the whole oracle register
};

/// Fixed unitary on qubits of the oracle register.
struct FixedGate {
    CMat gate;
    std::vector<int> qubits;
};

/// X^{k||w||0} or Z^{k||0} on a sub-block, k read from a key, w from the query's control value.
struct KeyShift {
    PauliKind kind = PauliKind::X;
    std::string key;
    int lambda = 0;
    int offset = 0;
    int width = -1;
    int input_bits = 0;  // > 0 appends the control value after the key bits
};

using OracleOp = std::variant<OracleCall, FixedGate, KeyShift>;

/// An oracle as an ordered list of operations on an n-qubit register.
/// The same descriptor is instantiated with sampled unitaries or with path-recording slots.
struct OracleDescriptor {
    std::string name;
    int n = 0;
    std::vector<OracleOp> ops;
    std::map<std::string, int> keys;  // key name -> bit length

    /// Number of calls per base oracle.
    std::map<std::string, int> calls() const;
    nlohmann::json to_json() const;
};

/// Validates op registers; throws std::invalid_argument.
void validate(const OracleDescriptor &d);

/// Identity-wrapped single call: the descriptor of a bare oracle.
OracleDescriptor bare_oracle(const std::string &base, int n);

/// U (X^k (x) I) U.
OracleDescriptor pru_two_query(int n, int lambda);
/// (Z^k (x) I) U.
OracleDescriptor pru_one_query(int n, int lambda);
/// U X^{k||0}: applied to |0> it outputs the state U|k||0>.
OracleDescriptor prs_generator(int n, int lambda);
/// U X^{k||w||0}, w taken from the classical query input.
OracleDescriptor prfs_generator(int n, int lambda, int m_in);
/// Two staircase blocks U X^{k1} U on AB then U X^{k2} U on BC.
OracleDescriptor spru(int n_block, int overlap, int lambda_small);

/// Concrete matrix of a descriptor. `input` is the control value seen by KeyShift ops.
UnitaryMatrix instantiate(const OracleDescriptor &d, const std::map<std::string, UnitaryMatrix> &bases,
                          const std::map<std::string, uint32_t> &keys, uint32_t input = 0);

StateVector prs_output(const UnitaryMatrix &u, uint32_t k, int n, int lambda);
StateVector prfs_output(const UnitaryMatrix &u, uint32_t k, uint32_t w, int n, int lambda, int m_in);

/// Frame potential E|Tr(V^dag W)|^4 of the glued ensemble V = V_BC U_AB, estimated over `samples` pairs.
struct MomentEstimate {
    double frame_potential = 0;
    double stderr = 0;
    /// sqrt(max(F - 2, 0)): Frobenius distance between the ensemble's and Haar's 2-moment operators.
    double frobenius_distance = 0;
    double haar_frame_potential = 2;
};
MomentEstimate glued_second_moment(int n_block, int overlap, int samples, Rng &rng);

/// Exact Haar moment E[U^{(x)2} (x) conj(U)^{(x)2}] on dimension d, from the symmetric/antisymmetric split.
CMat haar_moment2(Eigen::Index d);

}  // namespace qhro

#endif
