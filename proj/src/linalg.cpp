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

#include "qhro/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qhro {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(uint64_t seed) : eng_(splitmix64(seed)) {}

Rng Rng::derive(uint64_t master, uint64_t index, uint64_t stream) {
    return Rng(splitmix64(master ^ splitmix64(index ^ splitmix64(stream + 0x51ED2701ULL))));
}

double Rng::uniform() { return unif_(eng_); }
double Rng::normal() { return gauss_(eng_); }
uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(eng_);
}
bool Rng::bernoulli(double p) { return uniform() < p; }

void check_cap(int qubits) {
    if (qubits < 0 || qubits > kMaxQubits) {
        throw CapExceeded("register of " + std::to_string(qubits) + " qubits exceeds the dense cap of " +
                          std::to_string(kMaxQubits));
    }
}

double unitarity_defect(const CMat &u) {
    CMat d = u.adjoint() * u - CMat::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

StateVector::StateVector(int qubits, CVec amps) : qubits_(qubits), amps_(std::move(amps)) {
    check_cap(qubits);
    if (amps_.size() != (Eigen::Index{1} << qubits)) throw std::invalid_argument("StateVector: dimension != 2^qubits");
}

StateVector StateVector::zero(int qubits) {
    check_cap(qubits);
    return StateVector(qubits, CVec::Zero(Eigen::Index{1} << qubits));
}

UnitaryMatrix::UnitaryMatrix(int qubits, CMat entries) : qubits_(qubits), m_(std::move(entries)) {
    check_cap(qubits);
    if (m_.rows() != (Eigen::Index{1} << qubits) || m_.cols() != m_.rows()) {
        throw std::invalid_argument("UnitaryMatrix: shape != 2^qubits square");
    }
    if (unitarity_defect(m_) > kExactTol) throw std::invalid_argument("UnitaryMatrix: not unitary");
}

UnitaryMatrix UnitaryMatrix::trusted(int qubits, CMat entries) {
    UnitaryMatrix u;
    u.qubits_ = qubits;
    u.m_ = std::move(entries);
    return u;
}

UnitaryMatrix UnitaryMatrix::identity(int qubits) {
    check_cap(qubits);
    auto d = Eigen::Index{1} << qubits;
    return trusted(qubits, CMat::Identity(d, d));
}

UnitaryMatrix UnitaryMatrix::operator*(const UnitaryMatrix &o) const {
    if (o.qubits_ != qubits_) throw std::invalid_argument("UnitaryMatrix product: size mismatch");
    return trusted(qubits_, m_ * o.m_);
}

StateVector UnitaryMatrix::operator*(const StateVector &v) const {
    if (v.qubits() != qubits_) throw std::invalid_argument("UnitaryMatrix apply: size mismatch");
    return StateVector(qubits_, m_ * v.amps());
}

DensityMatrix::DensityMatrix(int qubits, CMat entries) : qubits_(qubits), m_(std::move(entries)) {
    check_cap(qubits);
    if (m_.rows() != (Eigen::Index{1} << qubits) || m_.cols() != m_.rows()) {
        throw std::invalid_argument("DensityMatrix: shape != 2^qubits square");
    }
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kExactTol) throw std::invalid_argument("DensityMatrix: not Hermitian");
}

DensityMatrix DensityMatrix::pure(const StateVector &psi) {
    return DensityMatrix(psi.qubits(), psi.amps() * psi.amps().adjoint());
}

DensityMatrix DensityMatrix::zero(int qubits) {
    check_cap(qubits);
    auto d = Eigen::Index{1} << qubits;
    return DensityMatrix(qubits, CMat::Zero(d, d));
}

StateVector basis_state(int n, uint64_t x) {
    check_cap(n);
    if (x >= (uint64_t{1} << n)) throw std::out_of_range("basis_state: index out of range");
    auto s = StateVector::zero(n);
    s.amps()[static_cast<Eigen::Index>(x)] = 1.0;
    return s;
}

UnitaryMatrix haar_unitary(Eigen::Index dim, Rng &rng) {
    if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
    int q = 0;
    while ((Eigen::Index{1} << q) < dim) ++q;
    if ((Eigen::Index{1} << q) != dim) throw std::invalid_argument("haar_unitary: dim must be a power of two");
    check_cap(q);
    const double s = std::sqrt(0.5);
    CMat g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            double re = rng.normal();
            double im = rng.normal();
            g(i, j) = cplx(re * s, im * s);
        }
    }
    Eigen::HouseholderQR<CMat> qr(g);
    CMat qm = qr.householderQ();
    const CMat &r = qr.matrixQR();
    // Q diag(r_ii/|r_ii|) removes the convention bias of the factorization.
    for (Eigen::Index j = 0; j < dim; ++j) {
        cplx d = r(j, j);
        double a = std::abs(d);
        qm.col(j) *= (a > 0 ? d / a : cplx(1.0));
    }
    return UnitaryMatrix::trusted(q, std::move(qm));
}

StateVector haar_state(int n, Rng &rng) {
    check_cap(n);
    CVec v(Eigen::Index{1} << n);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double re = rng.normal();
        double im = rng.normal();
        v[i] = cplx(re, im);
    }
    v /= v.norm();
    return StateVector(n, std::move(v));
}

UnitaryMatrix pauli_string(PauliKind kind, uint64_t k, int lambda, int n) {
    if (lambda > n || lambda < 0) throw std::invalid_argument("pauli_string: lambda must satisfy 0 <= lambda <= n");
    check_cap(n);
    if (lambda < 64 && k >= (uint64_t{1} << lambda)) throw std::invalid_argument("pauli_string: key wider than lambda");
    auto d = Eigen::Index{1} << n;
    uint64_t shifted = k << (n - lambda);
    CMat m = CMat::Zero(d, d);
    for (Eigen::Index y = 0; y < d; ++y) {
        auto uy = static_cast<uint64_t>(y);
        if (kind == PauliKind::X) {
            m(static_cast<Eigen::Index>(uy ^ shifted), y) = 1.0;
        } else {
            m(y, y) = (__builtin_popcountll(uy & shifted) & 1) ? -1.0 : 1.0;
        }
    }
    return UnitaryMatrix::trusted(n, std::move(m));
}

StateVector epr_state(int n) {
    if (n < 1) throw std::invalid_argument("epr_state: n must be >= 1");
    check_cap(2 * n);
    auto s = StateVector::zero(2 * n);
    auto d = Eigen::Index{1} << n;
    double a = 1.0 / std::sqrt(static_cast<double>(d));
    for (Eigen::Index x = 0; x < d; ++x) s.amps()[x * d + x] = a;
    return s;
}

StateVector choi_state(const UnitaryMatrix &u) {
    int n = u.qubits();
    auto s = epr_state(n);
    apply_block(s.amps(), 2 * n, u.mat(), n);
    return s;
}

double fidelity(const StateVector &a, const StateVector &b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    return std::norm(a.amps().dot(b.amps()));
}

double swap_test_prob(const StateVector &psi, const StateVector &phi) {
    if (psi.dim() != phi.dim()) throw std::invalid_argument("swap_test_prob: dimension mismatch");
    return 0.5 * (1.0 + fidelity(psi, phi));
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    check_cap(a.qubits() + b.qubits());
    CVec out(a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i) out.segment(i * b.dim(), b.dim()) = a[i] * b.amps();
    return StateVector(a.qubits() + b.qubits(), std::move(out));
}

UnitaryMatrix tensor(const UnitaryMatrix &a, const UnitaryMatrix &b) {
    check_cap(a.qubits() + b.qubits());
    CMat out(a.dim() * b.dim(), a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        for (Eigen::Index j = 0; j < a.dim(); ++j)
            out.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) = a.mat()(i, j) * b.mat();
    return UnitaryMatrix::trusted(a.qubits() + b.qubits(), std::move(out));
}

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    check_cap(a.qubits() + b.qubits());
    CMat out(a.dim() * b.dim(), a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i)
        for (Eigen::Index j = 0; j < a.dim(); ++j)
            out.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) = a.mat()(i, j) * b.mat();
    return DensityMatrix(a.qubits() + b.qubits(), std::move(out));
}

namespace {

// Offsets of every assignment to `qubits` inside an n-qubit index.
std::vector<Eigen::Index> subset_offsets(int n, const std::vector<int> &qubits) {
    int k = static_cast<int>(qubits.size());
    std::vector<Eigen::Index> off(size_t{1} << k, 0);
    for (size_t g = 0; g < off.size(); ++g) {
        Eigen::Index o = 0;
        for (int j = 0; j < k; ++j) {
            if ((g >> (k - 1 - j)) & 1U) o |= Eigen::Index{1} << (n - 1 - qubits[j]);
        }
        off[g] = o;
    }
    return off;
}

std::vector<int> complement(int n, const std::vector<int> &qubits) {
    std::vector<int> rest;
    for (int q = 0; q < n; ++q) {
        if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) rest.push_back(q);
    }
    return rest;
}

void check_qubit_list(int n, const std::vector<int> &qubits) {
    std::vector<int> s = qubits;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw std::invalid_argument("qubit list has duplicates");
    for (int q : s) {
        if (q < 0 || q >= n) throw std::invalid_argument("qubit index out of range");
    }
}

}  // namespace

void apply_local(CVec &state, int total_qubits, const CMat &gate, const std::vector<int> &qubits) {
    check_qubit_list(total_qubits, qubits);
    auto inner = subset_offsets(total_qubits, qubits);
    if (gate.rows() != static_cast<Eigen::Index>(inner.size()) || gate.cols() != gate.rows()) {
        throw std::invalid_argument("apply_local: gate size does not match qubit list");
    }
    if (qubits.size() == 1) {
        // One qubit: pairwise update at stride 2^(n-1-q).
        const Eigen::Index stride = Eigen::Index{1} << (total_qubits - 1 - qubits[0]);
        const cplx a = gate(0, 0), b = gate(0, 1), c = gate(1, 0), d = gate(1, 1);
        for (Eigen::Index hi = 0; hi < state.size(); hi += 2 * stride)
            for (Eigen::Index i = hi; i < hi + stride; ++i) {
                const cplx x = state[i], y = state[i + stride];
                state[i] = a * x + b * y;
                state[i + stride] = c * x + d * y;
            }
        return;
    }
    auto outer = subset_offsets(total_qubits, complement(total_qubits, qubits));
    CVec buf(gate.rows());
    CVec res(gate.rows());
    for (auto base : outer) {
        for (size_t g = 0; g < inner.size(); ++g) buf[static_cast<Eigen::Index>(g)] = state[base + inner[g]];
        res.noalias() = gate * buf;
        for (size_t g = 0; g < inner.size(); ++g) state[base + inner[g]] = res[static_cast<Eigen::Index>(g)];
    }
}

void apply_block(CVec &state, int total_qubits, const CMat &gate, int offset) {
    Eigen::Index w = gate.rows();
    int width = 0;
    while ((Eigen::Index{1} << width) < w) ++width;
    if (offset < 0 || offset + width > total_qubits) throw std::invalid_argument("apply_block: block out of range");
    Eigen::Index lo = Eigen::Index{1} << (total_qubits - offset - width);
    Eigen::Index hi = Eigen::Index{1} << offset;
    // View each high slice as a (w x lo) column-major matrix M[a, l] = state[h*w*lo + a*lo + l].
    for (Eigen::Index h = 0; h < hi; ++h) {
        Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(state.data() + h * w * lo, w, lo);
        m = (gate * m).eval();
    }
}

DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<int> &keep) {
    int n = rho.qubits();
    check_qubit_list(n, keep);
    auto ko = subset_offsets(n, keep);
    auto to = subset_offsets(n, complement(n, keep));
    auto dk = static_cast<Eigen::Index>(ko.size());
    CMat out = CMat::Zero(dk, dk);
    for (Eigen::Index a = 0; a < dk; ++a)
        for (Eigen::Index b = 0; b < dk; ++b) {
            cplx s = 0;
            for (auto c : to) s += rho.mat()(ko[a] + c, ko[b] + c);
            out(a, b) = s;
        }
    return DensityMatrix(static_cast<int>(keep.size()), std::move(out));
}

DensityMatrix reduced_state(const StateVector &psi, const std::vector<int> &keep) {
    int n = psi.qubits();
    check_qubit_list(n, keep);
    auto ko = subset_offsets(n, keep);
    auto to = subset_offsets(n, complement(n, keep));
    CMat m(static_cast<Eigen::Index>(ko.size()), static_cast<Eigen::Index>(to.size()));
    for (size_t a = 0; a < ko.size(); ++a)
        for (size_t c = 0; c < to.size(); ++c) m(a, c) = psi[ko[a] + to[c]];
    CMat r = m * m.adjoint();
    return DensityMatrix(static_cast<int>(keep.size()), 0.5 * (r + r.adjoint()));
}

double trace_distance(const CMat &rho, const CMat &sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw std::invalid_argument("trace_distance: dimension mismatch");
    CMat d = rho - sigma;
    d = 0.5 * (d + d.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(d, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma) { return trace_distance(rho.mat(), sigma.mat()); }

DensityMatrix mean_density(const std::vector<StateVector> &samples) {
    if (samples.empty()) throw std::invalid_argument("mean_density: empty sample list");
    int q = samples.front().qubits();
    CMat acc = CMat::Zero(samples.front().dim(), samples.front().dim());
    for (const auto &s : samples) {
        if (s.qubits() != q) throw std::invalid_argument("mean_density: dimension mismatch");
        acc.noalias() += s.amps() * s.amps().adjoint();
    }
    acc /= static_cast<double>(samples.size());
    return DensityMatrix(q, 0.5 * (acc + acc.adjoint()));
}

std::string bitstring(uint64_t x, int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(bit_of(x, i, n) ? '1' : '0');
    return s;
}

}  // namespace qhro
