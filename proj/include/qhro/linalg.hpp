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

#ifndef QHRO_LINALG_HPP
#define QHRO_LINALG_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qhro {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Largest register any dense object may span.
constexpr int kMaxQubits = 14;

/// Tolerance for identities that hold exactly in exact arithmetic.
constexpr double kExactTol = 1e-9;

struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Seeded generator. Trials derive independent streams from (master, index).
class Rng {
   public:
    explicit Rng(uint64_t seed);
    static Rng derive(uint64_t master, uint64_t index, uint64_t stream = 0);

    double uniform();
    double normal();
    uint64_t below(uint64_t n);
    bool bernoulli(double p);
    std::mt19937_64 &engine() { return eng_; }

   private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

uint64_t splitmix64(uint64_t x);

class StateVector {
   public:
    StateVector() = default;
    StateVector(int qubits, CVec amps);
    static StateVector zero(int qubits);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return amps_.size(); }
    const CVec &amps() const { return amps_; }
    CVec &amps() { return amps_; }
    cplx operator[](Eigen::Index i) const { return amps_[i]; }
    double norm() const { return amps_.norm(); }

   private:
    int qubits_ = 0;
    CVec amps_;
};

class UnitaryMatrix {
   public:
    UnitaryMatrix() = default;
    /// Checks unitarity to kExactTol.
    UnitaryMatrix(int qubits, CMat entries);
    /// Skips the unitarity check; for products of checked unitaries in hot loops.
    static UnitaryMatrix trusted(int qubits, CMat entries);
    static UnitaryMatrix identity(int qubits);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return m_.rows(); }
    const CMat &mat() const { return m_; }

    UnitaryMatrix operator*(const UnitaryMatrix &o) const;
    StateVector operator*(const StateVector &v) const;
    UnitaryMatrix adjoint() const { return trusted(qubits_, m_.adjoint()); }
    UnitaryMatrix transpose() const { return trusted(qubits_, m_.transpose()); }

   private:
    int qubits_ = 0;
    CMat m_;
};

class DensityMatrix {
   public:
    DensityMatrix() = default;
    /// Checks Hermiticity only; trace may be subnormalized.
    DensityMatrix(int qubits, CMat entries);
    static DensityMatrix pure(const StateVector &psi);
    static DensityMatrix zero(int qubits);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return m_.rows(); }
    const CMat &mat() const { return m_; }
    CMat &mat() { return m_; }
    double trace() const { return m_.trace().real(); }

   private:
    int qubits_ = 0;
    CMat m_;
};

/// Throws CapExceeded when qubits is outside [0, kMaxQubits].
void check_cap(int qubits);
double unitarity_defect(const CMat &u);

StateVector basis_state(int n, uint64_t x);
UnitaryMatrix haar_unitary(Eigen::Index dim, Rng &rng);
StateVector haar_state(int n, Rng &rng);

enum class PauliKind { X, Z };
/// X^k (x) I or Z^k (x) I where k is a lambda-bit prefix on n qubits.
UnitaryMatrix pauli_string(PauliKind kind, uint64_t k, int lambda, int n);

StateVector epr_state(int n);
/// |Phi_U> = (I (x) U)|Omega>.
StateVector choi_state(const UnitaryMatrix &u);

double fidelity(const StateVector &a, const StateVector &b);
double swap_test_prob(const StateVector &psi, const StateVector &phi);

StateVector tensor(const StateVector &a, const StateVector &b);
UnitaryMatrix tensor(const UnitaryMatrix &a, const UnitaryMatrix &b);
DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b);

/// Applies a 2^k x 2^k matrix to the listed qubits (big-endian positions).
void apply_local(CVec &state, int total_qubits, const CMat &gate, const std::vector<int> &qubits);
/// Applies the gate to the contiguous block [offset, offset + width).
void apply_block(CVec &state, int total_qubits, const CMat &gate, int offset);

DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<int> &keep);
/// Reduced state of a pure vector; cheaper than forming the full projector.
DensityMatrix reduced_state(const StateVector &psi, const std::vector<int> &keep);

double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma);
double trace_distance(const CMat &rho, const CMat &sigma);
DensityMatrix mean_density(const std::vector<StateVector> &samples);

/// Extracts bit `pos` (0 = most significant) of an n-bit integer.
inline int bit_of(uint64_t x, int pos, int n) { return static_cast<int>((x >> (n - 1 - pos)) & 1U); }
std::string bitstring(uint64_t x, int n);

}  // namespace qhro

#endif
