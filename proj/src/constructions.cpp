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

#include "qhro/constructions.hpp"

#include <cmath>
#include <stdexcept>

namespace qhro {

namespace {

int block_width(const OracleDescriptor &d, int offset, int width) { return width < 0 ? d.n - offset : width; }

void check_block(const OracleDescriptor &d, int offset, int width, const char *what) {
    int w = block_width(d, offset, width);
    if (offset < 0 || w <= 0 || offset + w > d.n) {
        throw std::invalid_argument(std::string(what) + ": block outside the oracle register");
    }
}

const char *pauli_name(PauliKind k) { return k == PauliKind::X ? "X" : "Z"; }

}  // namespace

std::map<std::string, int> OracleDescriptor::calls() const {
    std::map<std::string, int> out;
    for (const auto &op : ops) {
        if (auto c = std::get_if<OracleCall>(&op)) ++out[c->base];
    }
    return out;
}

nlohmann::json OracleDescriptor::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["n"] = n;
    j["keys"] = keys;
    auto arr = nlohmann::json::array();
    for (const auto &op : ops) {
        if (auto c = std::get_if<OracleCall>(&op)) {
            arr.push_back({{"op", "call"}, {"base", c->base}, {"offset", c->offset}, {"width", block_width(*this, c->offset, c->width)}});
        } else if (auto g = std::get_if<FixedGate>(&op)) {
            auto m = nlohmann::json::array();
            for (Eigen::Index r = 0; r < g->gate.rows(); ++r) {
                auto row = nlohmann::json::array();
                for (Eigen::Index c2 = 0; c2 < g->gate.cols(); ++c2) row.push_back({g->gate(r, c2).real(), g->gate(r, c2).imag()});
                m.push_back(row);
            }
            arr.push_back({{"op", "gate"}, {"qubits", g->qubits}, {"matrix", m}});
        } else {
            const auto &s = std::get<KeyShift>(op);
            arr.push_back({{"op", "key_shift"},
                           {"pauli", pauli_name(s.kind)},
                           {"key", s.key},
                           {"lambda", s.lambda},
                           {"offset", s.offset},
                           {"width", block_width(*this, s.offset, s.width)},
                           {"input_bits", s.input_bits}});
        }
    }
    j["ops"] = arr;
    return j;
}

void validate(const OracleDescriptor &d) {
    if (d.n <= 0 || d.n > kMaxQubits) throw std::invalid_argument("descriptor: bad register width");
    for (const auto &op : d.ops) {
        if (auto c = std::get_if<OracleCall>(&op)) {
            check_block(d, c->offset, c->width, "call");
        } else if (auto g = std::get_if<FixedGate>(&op)) {
            for (int q : g->qubits) {
                if (q < 0 || q >= d.n) throw std::invalid_argument("gate: qubit outside the oracle register");
            }
            if (g->gate.rows() != (Eigen::Index{1} << g->qubits.size())) throw std::invalid_argument("gate: size mismatch");
        } else {
            const auto &s = std::get<KeyShift>(op);
            check_block(d, s.offset, s.width, "key shift");
            if (!d.keys.count(s.key)) throw std::invalid_argument("key shift: undeclared key " + s.key);
            if (s.lambda < 0 || s.input_bits < 0 || s.lambda + s.input_bits > block_width(d, s.offset, s.width)) {
                throw std::invalid_argument("key shift: key and input do not fit the block");
            }
        }
    }
}

OracleDescriptor bare_oracle(const std::string &base, int n) {
    OracleDescriptor d{base, n, {OracleCall{base}}, {}};
    validate(d);
    return d;
}

OracleDescriptor pru_two_query(int n, int lambda) {
    if (lambda < 1 || lambda > n) throw std::invalid_argument("pru_two_query: need 1 <= lambda <= n");
    OracleDescriptor d{"pru_two_query", n, {OracleCall{"U"}, KeyShift{PauliKind::X, "k", lambda}, OracleCall{"U"}},
                       {{"k", lambda}}};
    validate(d);
    return d;
}

OracleDescriptor pru_one_query(int n, int lambda) {
    if (lambda < 0 || lambda > n) throw std::invalid_argument("pru_one_query: need lambda <= n");
    OracleDescriptor d{"pru_one_query", n, {OracleCall{"U"}, KeyShift{PauliKind::Z, "k", lambda}}, {{"k", lambda}}};
    validate(d);
    return d;
}

OracleDescriptor prs_generator(int n, int lambda) {
    if (lambda < 0 || lambda > n) throw std::invalid_argument("prs: need lambda <= n");
    OracleDescriptor d{"prs", n, {KeyShift{PauliKind::X, "k", lambda}, OracleCall{"U"}}, {{"k", lambda}}};
    validate(d);
    return d;
}

OracleDescriptor prfs_generator(int n, int lambda, int m_in) {
    if (lambda < 0 || m_in < 0 || n < lambda + m_in) throw std::invalid_argument("prfs: need n >= lambda + m");
    KeyShift shift{PauliKind::X, "k", lambda};
    shift.input_bits = m_in;
    OracleDescriptor d{"prfs", n, {shift, OracleCall{"U"}}, {{"k", lambda}}};
    validate(d);
    return d;
}

OracleDescriptor spru(int n_block, int overlap, int lambda_small) {
    int total = 2 * n_block - overlap;
    if (n_block < 1 || overlap < 0 || overlap >= n_block || total > 12) {
        throw std::invalid_argument("spru: need 0 <= overlap < n_block and 2 n_block - overlap <= 12");
    }
    if (lambda_small < 0 || lambda_small > n_block) throw std::invalid_argument("spru: key longer than a block");
    int bc = n_block - overlap;
    OracleDescriptor d{"spru",
                       total,
                       {OracleCall{"U", 0, n_block}, KeyShift{PauliKind::X, "k1", lambda_small, 0, n_block},
                        OracleCall{"U", 0, n_block}, OracleCall{"U", bc, n_block},
                        KeyShift{PauliKind::X, "k2", lambda_small, bc, n_block}, OracleCall{"U", bc, n_block}},
                       {{"k1", lambda_small}, {"k2", lambda_small}}};
    validate(d);
    return d;
}

UnitaryMatrix instantiate(const OracleDescriptor &d, const std::map<std::string, UnitaryMatrix> &bases,
                          const std::map<std::string, uint32_t> &keys, uint32_t input) {
    validate(d);
    const Eigen::Index D = Eigen::Index{1} << d.n;
    CMat m = CMat::Identity(D, D);
    for (const auto &op : d.ops) {
        if (auto c = std::get_if<OracleCall>(&op)) {
            auto it = bases.find(c->base);
            if (it == bases.end()) throw std::invalid_argument("instantiate: unbound base " + c->base);
            int w = block_width(d, c->offset, c->width);
            if (it->second.qubits() != w) throw std::invalid_argument("instantiate: base width mismatch");
            for (Eigen::Index col = 0; col < D; ++col) {
                CVec v = m.col(col);
                apply_block(v, d.n, it->second.mat(), c->offset);
                m.col(col) = v;
            }
        } else if (auto g = std::get_if<FixedGate>(&op)) {
            for (Eigen::Index col = 0; col < D; ++col) {
                CVec v = m.col(col);
                apply_local(v, d.n, g->gate, g->qubits);
                m.col(col) = v;
            }
        } else {
            const auto &s = std::get<KeyShift>(op);
            auto it = keys.find(s.key);
            if (it == keys.end()) throw std::invalid_argument("instantiate: unbound key " + s.key);
            int w = block_width(d, s.offset, s.width);
            if (it->second >= (uint64_t{1} << s.lambda) || input >= (uint64_t{1} << s.input_bits)) {
                throw std::invalid_argument("instantiate: key or input out of range");
            }
            uint64_t pattern = ((uint64_t{it->second} << s.input_bits) | input) << (w - s.lambda - s.input_bits);
            uint64_t lo = uint64_t{1} << (d.n - s.offset - w);
            uint64_t mask = (uint64_t{1} << w) - 1;
            CMat next(D, D);
            for (Eigen::Index r = 0; r < D; ++r) {
                uint64_t a = (static_cast<uint64_t>(r) / lo) & mask;
                if (s.kind == PauliKind::X) {
                    uint64_t j = static_cast<uint64_t>(r) + ((a ^ pattern) - a) * lo;
                    next.row(static_cast<Eigen::Index>(j)) = m.row(r);
                } else {
                    if (__builtin_popcountll(a & pattern) & 1) {
                        next.row(r) = -m.row(r);
                    } else {
                        next.row(r) = m.row(r);
                    }
                }
            }
            m = std::move(next);
        }
    }
    return UnitaryMatrix::trusted(d.n, std::move(m));
}

StateVector prs_output(const UnitaryMatrix &u, uint32_t k, int n, int lambda) {
    auto g = instantiate(prs_generator(n, lambda), {{"U", u}}, {{"k", k}});
    return g * basis_state(n, 0);
}

StateVector prfs_output(const UnitaryMatrix &u, uint32_t k, uint32_t w, int n, int lambda, int m_in) {
    auto g = instantiate(prfs_generator(n, lambda, m_in), {{"U", u}}, {{"k", k}}, w);
    return g * basis_state(n, 0);
}

MomentEstimate glued_second_moment(int n_block, int overlap, int samples, Rng &rng) {
    int total = 2 * n_block - overlap;
    if (n_block < 1 || overlap < 0 || overlap >= n_block || total > 12) throw std::invalid_argument("glued moment: bad registers");
    if (samples < 2) throw std::invalid_argument("glued moment: need at least two samples");
    const Eigen::Index blk = Eigen::Index{1} << n_block;
    auto draw = [&]() {
        CMat u = CMat::Identity(Eigen::Index{1} << total, Eigen::Index{1} << total);
        auto a = haar_unitary(blk, rng);
        auto b = haar_unitary(blk, rng);
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
            CVec v = u.col(c);
            apply_block(v, total, a.mat(), 0);
            apply_block(v, total, b.mat(), n_block - overlap);
            u.col(c) = v;
        }
        return u;
    };
    double sum = 0, sum2 = 0;
    for (int i = 0; i < samples; ++i) {
        CMat x = draw(), y = draw();
        double f = std::pow(std::abs((x.adjoint() * y).trace()), 4);
        sum += f;
        sum2 += f * f;
    }
    MomentEstimate e;
    e.frame_potential = sum / samples;
    double var = std::max(0.0, (sum2 / samples - e.frame_potential * e.frame_potential) * samples / (samples - 1.0));
    e.stderr = std::sqrt(var / samples);
    e.frobenius_distance = std::sqrt(std::max(0.0, e.frame_potential - 2.0));
    return e;
}

CMat haar_moment2(Eigen::Index d) {
    if (d < 2 || d > 8) throw std::invalid_argument("haar_moment2: need 2 <= d <= 8");
    const Eigen::Index d2 = d * d;
    CMat swap = CMat::Zero(d2, d2);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) swap(j * d + i, i * d + j) = 1;
    CMat id = CMat::Identity(d2, d2);
    CMat psym = 0.5 * (id + swap), panti = 0.5 * (id - swap);
    double dsym = static_cast<double>(d * (d + 1) / 2), danti = static_cast<double>(d * (d - 1) / 2);
    // Row-major vectorization: the twirl X -> sum_P Tr(P X) P / d_P has matrix sum_P vec(P) vec(P)^dag / d_P.
    CVec vs(d2 * d2), va(d2 * d2);
    for (Eigen::Index r = 0; r < d2; ++r)
        for (Eigen::Index c = 0; c < d2; ++c) {
            vs[r * d2 + c] = psym(r, c);
            va[r * d2 + c] = panti(r, c);
        }
    return vs * vs.adjoint() / dsym + va * va.adjoint() / danti;
}

}  // namespace qhro
