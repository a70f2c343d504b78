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

#include "qhro/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/SVD>

#include "qhro/constructions.hpp"
#include "qhro/harness.hpp"

namespace qhro {

void NonAdaptiveCircuit::validate() const {
    if (t < 1 || n < 1) throw std::invalid_argument("circuit: need t, n >= 1");
    check_cap(2 * t * n);
    if (a.qubits() != t * n || b.qubits() != t * n) throw std::invalid_argument("circuit: A and B must act on t*n qubits");
}

UnitaryMatrix NonAdaptiveCircuit::apply(const UnitaryMatrix &u) const {
    validate();
    if (u.qubits() != n) throw std::invalid_argument("circuit: oracle width mismatch");
    UnitaryMatrix ut = u;
    for (int i = 1; i < t; ++i) ut = tensor(ut, u);
    return b * ut * a;
}

StateVector choi_from_copies(const NonAdaptiveCircuit &c, const std::vector<StateVector> &copies) {
    c.validate();
    if (static_cast<int>(copies.size()) != c.t) throw std::invalid_argument("choi_from_copies: copy-count mismatch");
    for (const auto &s : copies) {
        if (s.qubits() != 2 * c.n) throw std::invalid_argument("choi_from_copies: copy width mismatch");
    }
    StateVector joint = copies.front();
    for (size_t i = 1; i < copies.size(); ++i) joint = tensor(joint, copies[i]);

    // Regroup (r1 o1)(r2 o2)... into (r1 r2 ...)(o1 o2 ...).
    const int n = c.n, t = c.t, tn = t * n;
    const uint64_t mask = (uint64_t{1} << n) - 1;
    CVec v = CVec::Zero(joint.dim());
    for (Eigen::Index i = 0; i < joint.dim(); ++i) {
        uint64_t refs = 0, outs = 0;
        for (int j = 0; j < t; ++j) {
            uint64_t pair = static_cast<uint64_t>(i) >> (2 * n * (t - 1 - j));
            refs = (refs << n) | ((pair >> n) & mask);
            outs = (outs << n) | (pair & mask);
        }
        v[static_cast<Eigen::Index>((refs << tn) | outs)] = joint[i];
    }
    apply_block(v, 2 * tn, c.a.mat().transpose(), 0);
    apply_block(v, 2 * tn, c.b.mat(), tn);
    return StateVector(2 * tn, std::move(v));
}

double choi_overlap(const UnitaryMatrix &u, const UnitaryMatrix &v) {
    if (u.qubits() != v.qubits()) throw std::invalid_argument("choi_overlap: width mismatch");
    const double N = static_cast<double>(u.dim());
    return std::norm((u.mat().adjoint() * v.mat()).trace()) / (N * N);
}

TailEstimate haar_choi_overlap_tail(int n, int samples, Rng &rng, const std::optional<UnitaryMatrix> &u0) {
    if (samples < 1000) throw std::invalid_argument("haar_choi_overlap_tail: need at least 1000 samples");
    const Eigen::Index N = Eigen::Index{1} << n;
    UnitaryMatrix ref = u0 ? *u0 : UnitaryMatrix::identity(n);
    if (ref.qubits() != n) throw std::invalid_argument("haar_choi_overlap_tail: reference width mismatch");
    TailEstimate e;
    e.samples = samples;
    int hits = 0;
    double sum = 0;
    for (int i = 0; i < samples; ++i) {
        double f = choi_overlap(ref, haar_unitary(N, rng));
        sum += f;
        hits += f >= 0.5 ? 1 : 0;
    }
    e.tail = static_cast<double>(hits) / samples;
    e.stderr = std::sqrt(e.tail * (1 - e.tail) / samples);
    e.mean_overlap = sum / samples;
    e.levy_bound = 2 * std::exp(-static_cast<double>(N) / 96.0);
    return e;
}

SwapOrOutcome swap_or_attack(const std::vector<StateVector> &oracle_copies, const std::vector<StateVector> &haar_copies,
                             const std::vector<NonAdaptiveCircuit> &family, Rng &rng) {
    if (oracle_copies.empty()) throw std::invalid_argument("swap_or_attack: insufficient copies");
    SwapOrOutcome out;
    const auto tests = static_cast<double>(oracle_copies.size());
    double reject_all = 1.0;
    for (const auto &circuit : family) {
        auto phi = choi_from_copies(circuit, haar_copies);
        bool pass = true;
        double p_all = 1.0;
        for (const auto &o : oracle_copies) {
            double p = swap_test_prob(phi, o);
            p_all *= p;
            pass = rng.bernoulli(p) && pass;
        }
        double f = fidelity(phi, oracle_copies.front());
        out.fidelities.push_back(f);
        out.passed.push_back(pass);
        out.accept = out.accept || pass;
        out.max_fidelity = std::max(out.max_fidelity, f);
        reject_all *= 1.0 - p_all;
    }
    out.accept_probability = family.empty() ? 0.0 : 1.0 - reject_all;
    out.union_bound = family.empty() ? 0.0
                                     : std::min(1.0, static_cast<double>(family.size()) * std::pow((1 + out.max_fidelity) / 2, tests));
    return out;
}

std::vector<NonAdaptiveCircuit> one_query_family(int n, int lambda) {
    if (lambda < 0 || lambda > n) throw std::invalid_argument("one_query_family: need lambda <= n");
    std::vector<NonAdaptiveCircuit> out;
    for (uint64_t k = 0; k < (uint64_t{1} << lambda); ++k) {
        out.push_back(NonAdaptiveCircuit{UnitaryMatrix::identity(n), pauli_string(PauliKind::Z, k, lambda, n), 1, n});
    }
    return out;
}

std::vector<NonAdaptiveCircuit> shifted_input_family(int n, int lambda) {
    if (lambda < 0 || lambda > n) throw std::invalid_argument("shifted_input_family: need lambda <= n");
    std::vector<NonAdaptiveCircuit> out;
    for (uint64_t k = 0; k < (uint64_t{1} << lambda); ++k) {
        out.push_back(NonAdaptiveCircuit{pauli_string(PauliKind::X, k, lambda, n), UnitaryMatrix::identity(n), 1, n});
    }
    return out;
}

nlohmann::json AttackReport::to_json() const {
    return {{"attack", attack},
            {"params", params},
            {"trials", trials},
            {"real_accept", real_accept},
            {"ideal_accept", ideal_accept},
            {"advantage", advantage},
            {"stderr", stderr},
            {"ci95", {ci_low, ci_high}},
            {"extra", extra}};
}

namespace {

struct TrialPair {
    double real = 0, ideal = 0;
    double real_exact = 0, ideal_exact = 0;
    double real_fid = 0, ideal_fid = 0, ideal_union = 0;
};

void finish(AttackReport &r, const std::vector<TrialPair> &trials) {
    const double T = static_cast<double>(trials.size());
    double sr = 0, si = 0, sr2 = 0, si2 = 0;
    for (const auto &t : trials) {
        sr += t.real;
        si += t.ideal;
        sr2 += t.real * t.real;
        si2 += t.ideal * t.ideal;
    }
    r.trials = static_cast<int>(trials.size());
    r.real_accept = sr / T;
    r.ideal_accept = si / T;
    r.advantage = r.real_accept - r.ideal_accept;
    auto var = [&](double s, double s2) { return T > 1 ? std::max(0.0, (s2 - s * s / T) / (T - 1)) : 0.0; };
    r.stderr = std::sqrt((var(sr, sr2) + var(si, si2)) / T);
    r.ci_low = r.advantage - 1.96 * r.stderr;
    r.ci_high = r.advantage + 1.96 * r.stderr;
}

}  // namespace

AttackReport swap_or_experiment(AttackTarget target, int n, int lambda, int c, int trials, uint64_t seed, int jobs) {
    if (lambda < 1 || lambda > n || lambda > 10) throw std::invalid_argument("swap_or_experiment: need 1 <= lambda <= min(n, 10)");
    if (c < 1 || trials < 1) throw std::invalid_argument("swap_or_experiment: need c, trials >= 1");
    check_cap(2 * n);
    const int tests = c * lambda;
    const Eigen::Index N = Eigen::Index{1} << n;
    const auto desc = target == AttackTarget::OneQuery ? pru_one_query(n, lambda) : pru_two_query(n, lambda);
    const auto family = target == AttackTarget::OneQuery ? one_query_family(n, lambda) : shifted_input_family(n, lambda);

    std::vector<TrialPair> results(static_cast<size_t>(trials));
    parallel_for(trials, jobs, [&](int i) {
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(i));
        auto u = haar_unitary(N, rng);
        auto kstar = static_cast<uint32_t>(rng.below(uint64_t{1} << lambda));
        auto real_oracle = instantiate(desc, {{"U", u}}, {{"k", kstar}});
        auto ideal_oracle = haar_unitary(N, rng);
        std::vector<StateVector> haar_copies{choi_state(u)};
        auto real = swap_or_attack(std::vector<StateVector>(static_cast<size_t>(tests), choi_state(real_oracle)), haar_copies, family, rng);
        auto ideal = swap_or_attack(std::vector<StateVector>(static_cast<size_t>(tests), choi_state(ideal_oracle)), haar_copies, family, rng);
        results[static_cast<size_t>(i)] = TrialPair{real.accept ? 1.0 : 0.0, ideal.accept ? 1.0 : 0.0, real.accept_probability,
                                                    ideal.accept_probability, real.max_fidelity, ideal.max_fidelity, ideal.union_bound};
    });

    AttackReport r;
    r.attack = target == AttackTarget::OneQuery ? "swap_or_one_query" : "swap_or_two_query";
    r.params = {{"n", n}, {"lambda", lambda}, {"c", c}, {"tests_per_key", tests}, {"seed", seed}};
    finish(r, results);
    double re = 0, ie = 0, rf = 0, inf = 0, ub = 0;
    for (const auto &t : results) {
        re += t.real_exact;
        ie += t.ideal_exact;
        rf += t.real_fid;
        inf += t.ideal_fid;
        ub += t.ideal_union;
    }
    const double T = trials;
    r.extra = {{"real_accept_exact", re / T},
               {"ideal_accept_exact", ie / T},
               {"real_max_fidelity", rf / T},
               {"ideal_max_fidelity", inf / T},
               {"ideal_union_bound", ub / T},
               {"or_circuit", "per-key SWAP-test batteries; a key passes when all tests accept"}};
    return r;
}

// ---------------------------------------------------------------------------
// Rank argument.

BigInt binomial(const BigInt &n, unsigned k) {
    if (n < 0) throw std::invalid_argument("binomial: negative n");
    if (BigInt(k) > n) return 0;
    BigInt r = 1;
    for (unsigned i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

BigInt sym_dim(const BigInt &d, unsigned t) {
    if (d < 1) throw std::invalid_argument("sym_dim: need d >= 1");
    return binomial(d + t - 1, t);
}

BigRational rank_ratio(int lambda, int m, int ell, int t) {
    if (lambda < 0 || m < 1 || ell < 0 || t < 0 || m > 64) throw std::invalid_argument("rank_ratio: bad parameters");
    BigInt D = BigInt(1) << (2 * m);
    auto l = static_cast<unsigned>(ell), tt = static_cast<unsigned>(t);
    BigInt num = (BigInt(1) << lambda) * sym_dim(D, l + tt);
    BigInt den = sym_dim(D, l) * sym_dim(D, tt);
    return BigRational(num, den);
}

double to_double(const BigRational &r) { return r.convert_to<double>(); }

namespace {

/// Orthonormal basis of Sym^k(C^d) as columns of a d^k x C(d+k-1,k) matrix.
CMat sym_basis(Eigen::Index d, int k) {
    Eigen::Index total = 1;
    for (int i = 0; i < k; ++i) total *= d;
    std::map<std::vector<Eigen::Index>, Eigen::Index> ids;
    std::vector<Eigen::Index> col(static_cast<size_t>(total));
    for (Eigen::Index i = 0; i < total; ++i) {
        std::vector<Eigen::Index> digits(static_cast<size_t>(k));
        Eigen::Index x = i;
        for (int j = k - 1; j >= 0; --j) {
            digits[static_cast<size_t>(j)] = x % d;
            x /= d;
        }
        std::sort(digits.begin(), digits.end());
        auto it = ids.emplace(digits, static_cast<Eigen::Index>(ids.size())).first;
        col[static_cast<size_t>(i)] = it->second;
    }
    CMat b = CMat::Zero(total, static_cast<Eigen::Index>(ids.size()));
    for (Eigen::Index i = 0; i < total; ++i) b(i, col[static_cast<size_t>(i)]) = 1.0;
    for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j).normalize();
    return b;
}

void check_rank_sizes(int m, int ell, int t, size_t keys) {
    if (m < 1 || ell < 0 || t < 0 || t + ell < 1) throw std::invalid_argument("rank projector: bad parameters");
    if (2 * m * (t + ell) > 12) throw std::invalid_argument("rank projector: 2m(t+l) exceeds 12 qubits");
    if (keys == 0 || keys > 16) throw std::invalid_argument("rank projector: need 1..16 keys");
}

}  // namespace

CMat rank_projector_basis(int m, int ell, int t, const std::vector<NonAdaptiveCircuit> &family) {
    check_rank_sizes(m, ell, t, family.size());
    const int copy_qubits = 2 * m, k = t + ell, total = copy_qubits * k;
    CMat sym = sym_basis(Eigen::Index{1} << copy_qubits, k);
    CMat span(sym.rows(), sym.cols() * static_cast<Eigen::Index>(family.size()));
    for (size_t key = 0; key < family.size(); ++key) {
        const auto &c = family[key];
        if (c.t != 1 || c.n != m) throw std::invalid_argument("rank projector: family must be one-query circuits on m qubits");
        CMat rot = tensor(c.a.transpose(), c.b).mat();
        for (Eigen::Index j = 0; j < sym.cols(); ++j) {
            CVec v = sym.col(j);
            for (int copy = t; copy < k; ++copy) apply_block(v, total, rot, copy * copy_qubits);
            span.col(static_cast<Eigen::Index>(key) * sym.cols() + j) = v;
        }
    }
    Eigen::JacobiSVD<CMat> svd(span, Eigen::ComputeThinU);
    const auto &s = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > 1e-9 * s[0]) ++rank;
    return svd.matrixU().leftCols(rank);
}

CMat rank_projector(int m, int ell, int t, const std::vector<NonAdaptiveCircuit> &family) {
    CMat q = rank_projector_basis(m, ell, t, family);
    return q * q.adjoint();
}

AttackReport rank_projector_attack(int m, int lambda, int ell, int t, int trials, uint64_t seed, int jobs) {
    if (lambda < 1 || lambda > m || lambda > 4) throw std::invalid_argument("rank_projector_attack: need 1 <= lambda <= min(m, 4)");
    if (trials < 2) throw std::invalid_argument("rank_projector_attack: need at least two trials");
    const auto family = one_query_family(m, lambda);
    CMat q = rank_projector_basis(m, ell, t, family);
    const Eigen::Index M = Eigen::Index{1} << m;
    const auto desc = pru_one_query(m, lambda);

    auto power_state = [&](const StateVector &a, int ta, const StateVector &b, int tb) {
        StateVector out;
        bool first = true;
        for (int i = 0; i < ta + tb; ++i) {
            const StateVector &s = i < ta ? a : b;
            out = first ? s : tensor(out, s);
            first = false;
        }
        return out;
    };

    std::vector<TrialPair> results(static_cast<size_t>(trials));
    parallel_for(trials, jobs, [&](int i) {
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(i));
        auto u = haar_unitary(M, rng);
        auto k = static_cast<uint32_t>(rng.below(uint64_t{1} << lambda));
        auto v = haar_unitary(M, rng);
        auto phi_u = choi_state(u);
        auto real = power_state(phi_u, t, choi_state(instantiate(desc, {{"U", u}}, {{"k", k}})), ell);
        auto ideal = power_state(phi_u, t, choi_state(v), ell);
        TrialPair p;
        p.real = (q.adjoint() * real.amps()).squaredNorm();
        p.ideal = (q.adjoint() * ideal.amps()).squaredNorm();
        results[static_cast<size_t>(i)] = p;
    });

    AttackReport r;
    r.attack = "rank_projector";
    r.params = {{"m", m}, {"lambda", lambda}, {"ell", ell}, {"t", t}, {"seed", seed}};
    finish(r, results);

    // Acceptance of the uniform mixture on Sym^t (x) Sym^l, for reference.
    const Eigen::Index d = Eigen::Index{1} << (2 * m);
    CMat st = t > 0 ? sym_basis(d, t) : CMat::Identity(1, 1);
    CMat sl = ell > 0 ? sym_basis(d, ell) : CMat::Identity(1, 1);
    CMat joint(st.rows() * sl.rows(), st.cols() * sl.cols());
    for (Eigen::Index a = 0; a < st.cols(); ++a)
        for (Eigen::Index b = 0; b < sl.cols(); ++b) {
            CVec col(joint.rows());
            for (Eigen::Index x = 0; x < st.rows(); ++x) col.segment(x * sl.rows(), sl.rows()) = st(x, a) * sl.col(b);
            joint.col(a * sl.cols() + b) = col;
        }
    double sym_average = (q.adjoint() * joint).squaredNorm() / static_cast<double>(joint.cols());
    CMat pi = q * q.adjoint();
    r.extra = {{"bound", to_double(rank_ratio(lambda, m, ell, t))},
               {"projector_rank", q.cols()},
               {"idempotence_defect", (pi * pi - pi).cwiseAbs().maxCoeff()},
               {"sym_average_accept", sym_average}};
    return r;
}

}  // namespace qhro
