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

#include "qhro/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qhro {

namespace {

nlohmann::json matrix_json(const CMat &m) {
    auto out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        out.push_back(row);
    }
    return out;
}

void check_range(int offset, int width, int qubits, const char *what) {
    if (offset < 0 || width < 0 || offset + width > qubits) {
        throw std::invalid_argument(std::string(what) + ": register outside the adversary");
    }
}

bool overlaps(int a, int wa, int b, int wb) { return a < b + wb && b < a + wa; }

/// Value of the contiguous block [offset, offset + width) inside basis index i.
inline uint64_t block_value(uint64_t i, int qubits, int offset, int width) {
    return (i >> (qubits - offset - width)) & ((uint64_t{1} << width) - 1);
}

uint64_t permute_index(uint64_t i, int qubits, const std::vector<int> &list, const std::vector<uint32_t> &map) {
    const int k = static_cast<int>(list.size());
    uint64_t sub = 0;
    for (int j = 0; j < k; ++j) sub |= static_cast<uint64_t>(bit_of(i, list[j], qubits)) << (k - 1 - j);
    uint64_t to = map[sub];
    uint64_t out = i;
    for (int j = 0; j < k; ++j) {
        uint64_t bit = uint64_t{1} << (qubits - 1 - list[j]);
        if ((to >> (k - 1 - j)) & 1U) {
            out |= bit;
        } else {
            out &= ~bit;
        }
    }
    return out;
}

void check_permutation(const std::vector<uint32_t> &map) {
    std::vector<char> seen(map.size(), 0);
    for (auto v : map) {
        if (v >= map.size() || seen[v]) throw std::invalid_argument("permutation: map is not a bijection");
        seen[v] = 1;
    }
}

std::vector<int> all_qubits(int q) {
    std::vector<int> out(static_cast<size_t>(q));
    for (int i = 0; i < q; ++i) out[static_cast<size_t>(i)] = i;
    return out;
}

std::vector<int> block_qubits(int offset, int width) {
    std::vector<int> out;
    for (int i = 0; i < width; ++i) out.push_back(offset + i);
    return out;
}

/// Permutation copying the input block into the transcript block by XOR.
Permutation copy_permutation(const ClassicalQuery &c) {
    Permutation p;
    p.qubits = block_qubits(c.input_offset, c.input_width);
    auto t = block_qubits(c.transcript_offset, c.input_width);
    p.qubits.insert(p.qubits.end(), t.begin(), t.end());
    const uint32_t W = 1U << c.input_width;
    p.map.resize(static_cast<size_t>(W) * W);
    for (uint32_t a = 0; a < W; ++a)
        for (uint32_t b = 0; b < W; ++b) p.map[a * W + b] = a * W + (a ^ b);
    return p;
}

/// Index offsets of every assignment to `list` (big-endian) inside a q-qubit index.
std::vector<uint64_t> offsets_of(int q, const std::vector<int> &list) {
    const int k = static_cast<int>(list.size());
    std::vector<uint64_t> off(size_t{1} << k, 0);
    for (size_t g = 0; g < off.size(); ++g)
        for (int j = 0; j < k; ++j)
            if ((g >> (k - 1 - j)) & 1U) off[g] |= uint64_t{1} << (q - 1 - list[j]);
    return off;
}

void apply_permutation(CVec &v, int q, const Permutation &p) {
    std::vector<int> rest;
    for (int i = 0; i < q; ++i)
        if (std::find(p.qubits.begin(), p.qubits.end(), i) == p.qubits.end()) rest.push_back(i);
    const auto inner = offsets_of(q, p.qubits);
    const auto outer = offsets_of(q, rest);
    CVec out(v.size());
    for (uint64_t base : outer)
        for (size_t sub = 0; sub < inner.size(); ++sub)
            out[static_cast<Eigen::Index>(base + inner[p.map[sub]])] = v[static_cast<Eigen::Index>(base + inner[sub])];
    v = std::move(out);
}

/// Applies gates[c] to the block, where c is the control block value (or 0 without a control).
void apply_controlled(CVec &v, int q, const std::vector<CMat> &gates, int offset, int width, int ctrl_offset,
                      int ctrl_width) {
    if (ctrl_width == 0 || gates.size() == 1) {
        apply_block(v, q, gates[0], offset);
        return;
    }
    const uint64_t N = uint64_t{1} << width;
    const uint64_t lo = uint64_t{1} << (q - offset - width);
    const auto d = static_cast<uint64_t>(v.size());
    CVec g(static_cast<Eigen::Index>(N));
    for (uint64_t i = 0; i < d; ++i) {
        if ((i / lo) % N != 0) continue;
        uint64_t c = ctrl_width > 0 ? block_value(i, q, ctrl_offset, ctrl_width) : 0;
        for (uint64_t x = 0; x < N; ++x) g[static_cast<Eigen::Index>(x)] = v[static_cast<Eigen::Index>(i + x * lo)];
        CVec r = gates[c] * g;
        for (uint64_t x = 0; x < N; ++x) v[static_cast<Eigen::Index>(i + x * lo)] = r[static_cast<Eigen::Index>(x)];
    }
}

void require_empty_transcript(const CVec &v, int q, const ClassicalQuery &c) {
    double stray = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (block_value(static_cast<uint64_t>(i), q, c.transcript_offset, c.input_width) != 0) stray += std::norm(v[i]);
    }
    if (stray > 1e-20) throw std::invalid_argument("classical query: transcript overflow (register already written)");
}

CMat kron(const CMat &a, const CMat &b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVec kron(const CVec &a, const CVec &b) {
    CVec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Programs.

std::map<std::string, int> AdversaryProgram::query_counts() const {
    std::map<std::string, int> out;
    for (const auto &s : steps) {
        if (auto q = std::get_if<QuantumQuery>(&s)) ++out[q->oracle];
        if (auto c = std::get_if<ClassicalQuery>(&s)) ++out[c->oracle];
    }
    return out;
}

void AdversaryProgram::validate() const {
    const int q = qubits();
    if (n < 1 || m_anc < 0) throw std::invalid_argument("program: bad register sizes");
    check_cap(q);
    if (steps.empty() || !std::holds_alternative<Interleave>(steps.front())) {
        throw std::invalid_argument("program: the first step must be an interleave");
    }
    for (const auto &s : steps) {
        if (auto il = std::get_if<Interleave>(&s)) {
            auto k = il->qubits.empty() ? q : static_cast<int>(il->qubits.size());
            if (il->gate.rows() != (Eigen::Index{1} << k) || il->gate.cols() != il->gate.rows()) {
                throw std::invalid_argument("program: interleave size mismatch");
            }
            for (int b : il->qubits) check_range(b, 1, q, "interleave");
        } else if (auto pm = std::get_if<Permutation>(&s)) {
            if (pm->map.size() != (size_t{1} << pm->qubits.size())) throw std::invalid_argument("program: permutation size mismatch");
            for (int b : pm->qubits) check_range(b, 1, q, "permutation");
            check_permutation(pm->map);
        } else if (auto qq = std::get_if<QuantumQuery>(&s)) {
            check_range(qq->offset, n, q, "query");
            if (qq->control_width > 0) {
                check_range(qq->control_offset, qq->control_width, q, "query control");
                if (overlaps(qq->offset, n, qq->control_offset, qq->control_width)) {
                    throw std::invalid_argument("program: control overlaps the query block");
                }
            }
        } else {
            const auto &c = std::get<ClassicalQuery>(s);
            check_range(c.input_offset, c.input_width, q, "classical input");
            check_range(c.transcript_offset, c.input_width, q, "transcript");
            check_range(c.answer_offset, n, q, "answer");
            if (overlaps(c.input_offset, c.input_width, c.transcript_offset, c.input_width) ||
                overlaps(c.input_offset, c.input_width, c.answer_offset, n) ||
                overlaps(c.transcript_offset, c.input_width, c.answer_offset, n)) {
                throw std::invalid_argument("program: classical-query registers overlap");
            }
        }
    }
    std::vector<int> v = view;
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) throw std::invalid_argument("program: repeated view qubit");
    for (int b : v) check_range(b, 1, q, "view");
    if (declared != query_counts()) throw std::invalid_argument("program: declared query counts do not match the steps");
}

nlohmann::json AdversaryProgram::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["m_anc"] = m_anc;
    j["declared"] = declared;
    j["view"] = view;
    auto arr = nlohmann::json::array();
    for (const auto &s : steps) {
        if (auto il = std::get_if<Interleave>(&s)) {
            arr.push_back({{"step", "interleave"}, {"qubits", il->qubits}, {"matrix", matrix_json(il->gate)}});
        } else if (auto pm = std::get_if<Permutation>(&s)) {
            arr.push_back({{"step", "permutation"}, {"qubits", pm->qubits}, {"map", pm->map}});
        } else if (auto qq = std::get_if<QuantumQuery>(&s)) {
            arr.push_back({{"step", "query"},
                           {"oracle", qq->oracle},
                           {"offset", qq->offset},
                           {"control_offset", qq->control_offset},
                           {"control_width", qq->control_width}});
        } else {
            const auto &c = std::get<ClassicalQuery>(s);
            arr.push_back({{"step", "classical_query"},
                           {"oracle", c.oracle},
                           {"input_offset", c.input_offset},
                           {"input_width", c.input_width},
                           {"transcript_offset", c.transcript_offset},
                           {"answer_offset", c.answer_offset}});
        }
    }
    j["steps"] = arr;
    return j;
}

// ---------------------------------------------------------------------------
// Concrete execution.

void apply_step(CVec &state, int q, const Step &step, const ConcreteBindings &b) {
    if (auto il = std::get_if<Interleave>(&step)) {
        apply_local(state, q, il->gate, il->qubits.empty() ? all_qubits(q) : il->qubits);
    } else if (auto pm = std::get_if<Permutation>(&step)) {
        apply_permutation(state, q, *pm);
    } else if (auto qq = std::get_if<QuantumQuery>(&step)) {
        auto it = b.find(qq->oracle);
        if (it == b.end()) throw std::invalid_argument("run_concrete: unbound oracle " + qq->oracle);
        const ConcreteOracle &co = it->second;
        const int width = co.desc.n;
        const uint32_t C = qq->control_width > 0 ? (1U << qq->control_width) : 1U;
        std::vector<CMat> gates;
        for (uint32_t c = 0; c < C; ++c) {
            std::map<std::string, UnitaryMatrix> chosen;
            for (const auto &[name, family] : co.bases) {
                if (family.size() == 1) {
                    chosen.emplace(name, family.front());
                } else if (family.size() == C) {
                    chosen.emplace(name, family[c]);
                } else {
                    throw std::invalid_argument("run_concrete: family size does not match the control width");
                }
            }
            gates.push_back(instantiate(co.desc, chosen, co.keys, c).mat());
        }
        check_range(qq->offset, width, q, "query");
        apply_controlled(state, q, gates, qq->offset, width, qq->control_offset, qq->control_width);
    } else {
        const auto &c = std::get<ClassicalQuery>(step);
        require_empty_transcript(state, q, c);
        apply_permutation(state, q, copy_permutation(c));
        apply_step(state, q, QuantumQuery{c.oracle, c.answer_offset, c.transcript_offset, c.input_width}, b);
    }
}

StateVector run_concrete(const AdversaryProgram &p, const ConcreteBindings &b) {
    p.validate();
    for (const auto &[name, count] : p.declared) {
        (void)count;
        auto it = b.find(name);
        if (it == b.end()) throw std::invalid_argument("run_concrete: unbound oracle " + name);
        if (it->second.desc.n != p.n) throw std::invalid_argument("run_concrete: oracle width differs from the program");
    }
    CVec v = basis_state(p.qubits(), 0).amps();
    for (const auto &s : p.steps) apply_step(v, p.qubits(), s, b);
    return StateVector(p.qubits(), std::move(v));
}

StateVector run_concrete(const AdversaryProgram &p, const std::map<std::string, UnitaryMatrix> &b) {
    ConcreteBindings cb;
    for (const auto &[name, u] : b) cb.emplace(name, ConcreteOracle{bare_oracle("U", u.qubits()), {{"U", {u}}}, {}});
    return run_concrete(p, cb);
}

// ---------------------------------------------------------------------------
// Path-recording execution.

namespace {

PurifiedState key_shift_pr(const PurifiedState &s, const KeyShift &k, int offset, int width, int ctrl_offset,
                           int ctrl_width) {
    if (k.input_bits > 0 && k.input_bits != ctrl_width) {
        throw std::invalid_argument("run_pr: keyed input width differs from the query control");
    }
    if (k.input_bits == 0) return apply_key_pauli(s, k.key, k.kind, k.lambda, offset, width);
    const int q = s.adv_qubits();
    const int ks = s.slot_index(k.key);
    const uint64_t lo = uint64_t{1} << (q - offset - width);
    const uint64_t mask = (uint64_t{1} << width) - 1;
    const int shift = width - k.lambda - k.input_bits;
    PurifiedState out(q, s.schema(), s.cap());
    for (const auto &kv : s.terms()) {
        auto slots = kv.first.decode();
        uint64_t key = slots[static_cast<size_t>(ks)].key_value();
        CVec v(kv.second.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            auto ui = static_cast<uint64_t>(i);
            uint64_t w = block_value(ui, q, ctrl_offset, ctrl_width);
            uint64_t pattern = ((key << k.input_bits) | w) << shift;
            uint64_t a = (ui / lo) & mask;
            if (k.kind == PauliKind::X) {
                v[static_cast<Eigen::Index>(ui + ((a ^ pattern) - a) * lo)] = kv.second[i];
            } else {
                v[i] = (__builtin_popcountll(a & pattern) & 1) ? -kv.second[i] : kv.second[i];
            }
        }
        out.accumulate(kv.first, v);
    }
    return out;
}

PurifiedState require_empty_transcript(const PurifiedState &s, const ClassicalQuery &c) {
    for (const auto &kv : s.terms()) require_empty_transcript(kv.second, s.adv_qubits(), c);
    return s;
}

}  // namespace

PurifiedState apply_step(const PurifiedState &s, const Step &step, const PrSetup &setup) {
    const int q = s.adv_qubits();
    if (auto il = std::get_if<Interleave>(&step)) {
        return apply_gate(s, il->gate, il->qubits.empty() ? all_qubits(q) : il->qubits);
    }
    if (auto pm = std::get_if<Permutation>(&step)) {
        return apply_basis_map(s, [&](const std::vector<SlotValue> &, uint64_t i) { return permute_index(i, q, pm->qubits, pm->map); });
    }
    if (auto cq = std::get_if<ClassicalQuery>(&step)) {
        require_empty_transcript(s, *cq);
        auto perm = copy_permutation(*cq);
        auto copied = apply_basis_map(s, [&](const std::vector<SlotValue> &, uint64_t i) { return permute_index(i, q, perm.qubits, perm.map); });
        return apply_step(copied, QuantumQuery{cq->oracle, cq->answer_offset, cq->transcript_offset, cq->input_width}, setup);
    }
    const auto &qq = std::get<QuantumQuery>(step);
    auto it = setup.oracles.find(qq.oracle);
    if (it == setup.oracles.end()) throw std::invalid_argument("run_pr: unbound oracle " + qq.oracle);
    const PrOracle &po = it->second;
    PurifiedState cur = s;
    for (const auto &op : po.desc.ops) {
        if (auto call = std::get_if<OracleCall>(&op)) {
            int width = call->width < 0 ? po.desc.n - call->offset : call->width;
            int off = qq.offset + call->offset;
            if (auto f = po.fixed.find(call->base); f != po.fixed.end()) {
                cur = apply_gate(cur, f->second.mat(), block_qubits(off, width));
                continue;
            }
            auto b = po.bases.find(call->base);
            if (b == po.bases.end()) throw std::invalid_argument("run_pr: unbound base " + call->base);
            RecordSpec spec;
            for (const auto &o : b->second.shared) spec.shared_slots.push_back(cur.slot_index(o));
            spec.cf = b->second.cf;
            if (!b->second.slot_by_control.empty()) {
                if (qq.control_width <= 0) throw std::invalid_argument("run_pr: per-input slots need a control register");
                spec.control_offset = qq.control_offset;
                spec.control_width = qq.control_width;
                for (const auto &name : b->second.slot_by_control) spec.slot_by_control.push_back(cur.slot_index(name));
            } else {
                spec.target_slot = cur.slot_index(b->second.slot);
            }
            cur = record_query(cur, off, width, spec);
        } else if (auto g = std::get_if<FixedGate>(&op)) {
            std::vector<int> abs;
            for (int b : g->qubits) abs.push_back(qq.offset + b);
            cur = apply_gate(cur, g->gate, abs);
        } else {
            const auto &k = std::get<KeyShift>(op);
            int width = k.width < 0 ? po.desc.n - k.offset : k.width;
            cur = key_shift_pr(cur, k, qq.offset + k.offset, width, qq.control_offset, qq.control_width);
        }
    }
    return cur;
}

PurifiedState run_pr(const AdversaryProgram &p, const PrSetup &setup) {
    p.validate();
    for (const auto &[name, count] : p.declared) {
        (void)count;
        auto it = setup.oracles.find(name);
        if (it == setup.oracles.end()) throw std::invalid_argument("run_pr: unbound oracle " + name);
        if (it->second.desc.n != p.n) throw std::invalid_argument("run_pr: oracle width differs from the program");
    }
    auto s = PurifiedState::start(basis_state(p.qubits(), 0), setup.slots, setup.cap);
    for (const auto &[name, bits] : setup.keys) s = add_key_superposition(s, name, 1U << bits);
    for (const auto &step : p.steps) s = apply_step(s, step, setup);
    return s;
}

ViewResult reduce_view(const PurifiedState &s, const std::vector<int> &keep) {
    ViewResult r;
    CMat rho = reduce(s);
    if (keep.empty()) {
        r.reduced = DensityMatrix(s.adv_qubits(), std::move(rho));
    } else {
        r.reduced = partial_trace(DensityMatrix(s.adv_qubits(), std::move(rho)), keep);
    }
    r.labels = s.size();
    for (const auto &kv : s.terms()) {
        size_t items = 0;
        for (const auto &slot : kv.first.decode()) {
            if (slot.kind != SlotKind::Key) items += slot.items.size();
        }
        if (r.mass_by_size.size() <= items) r.mass_by_size.resize(items + 1, 0.0);
        double m = kv.second.squaredNorm();
        r.mass_by_size[items] += m;
        r.mass += m;
    }
    r.norm_deficit = 1.0 - r.mass;
    return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo.

int default_jobs() {
    if (const char *env = std::getenv("QHRO_JOBS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, int jobs, const std::function<void(int)> &f) {
    if (jobs <= 0) jobs = default_jobs();
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&]() {
            for (int i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

McView haar_view_mc(const std::vector<AdversaryProgram> &blocks, const BindingSampler &sampler, const McOptions &opt) {
    if (opt.trials < 1) throw std::invalid_argument("haar_view_mc: need at least one trial");
    if (blocks.empty()) throw std::invalid_argument("haar_view_mc: no program");
    int view_qubits = 0;
    for (const auto &b : blocks) {
        b.validate();
        view_qubits += b.view_qubits();
    }
    check_cap(view_qubits);
    const Eigen::Index dv = Eigen::Index{1} << view_qubits;
    const bool pure = std::all_of(blocks.begin(), blocks.end(), [](const AdversaryProgram &b) { return b.view.empty(); });
    const int B = std::max(1, std::min(opt.batches, opt.trials));

    McView out;
    out.trials = opt.trials;
    out.batch_means.assign(static_cast<size_t>(B), CMat());
    out.batch_sizes.assign(static_cast<size_t>(B), 0);
    parallel_for(B, opt.jobs, [&](int b) {
        const int lo = static_cast<int>(static_cast<int64_t>(b) * opt.trials / B);
        const int hi = static_cast<int>(static_cast<int64_t>(b + 1) * opt.trials / B);
        CMat sum = CMat::Zero(dv, dv);
        const Eigen::Index chunk = 64;
        CMat cols(pure ? dv : 0, pure ? chunk : 0);
        Eigen::Index fill = 0;
        for (int i = lo; i < hi; ++i) {
            Rng rng = Rng::derive(opt.seed, static_cast<uint64_t>(i));
            auto bind = sampler(rng);
            if (pure) {
                CVec v = run_concrete(blocks[0], bind).amps();
                for (size_t k = 1; k < blocks.size(); ++k) v = kron(v, run_concrete(blocks[k], bind).amps());
                cols.col(fill++) = v;
                if (fill == chunk) {
                    sum.noalias() += cols * cols.adjoint();
                    fill = 0;
                }
            } else {
                CMat rho;
                for (size_t k = 0; k < blocks.size(); ++k) {
                    auto sv = run_concrete(blocks[k], bind);
                    CMat part = blocks[k].view.empty() ? CMat(sv.amps() * sv.amps().adjoint())
                                                       : reduced_state(sv, blocks[k].view).mat();
                    rho = k == 0 ? part : kron(rho, part);
                }
                sum += rho;
            }
        }
        if (pure && fill > 0) sum.noalias() += cols.leftCols(fill) * cols.leftCols(fill).adjoint();
        out.batch_sizes[static_cast<size_t>(b)] = hi - lo;
        out.batch_means[static_cast<size_t>(b)] = sum / static_cast<double>(hi - lo);
    });
    out.mean = CMat::Zero(dv, dv);
    for (int b = 0; b < B; ++b) {
        out.mean += out.batch_means[static_cast<size_t>(b)] * (static_cast<double>(out.batch_sizes[static_cast<size_t>(b)]) / opt.trials);
    }
    out.mean = 0.5 * (out.mean + out.mean.adjoint()).eval();
    return out;
}

namespace {

double bootstrap_noise(const McView &a, Rng &rng, int replicates) {
    const size_t B = a.batch_means.size();
    if (B < 2 || replicates < 1) return 0.0;
    double acc = 0;
    for (int r = 0; r < replicates; ++r) {
        CMat m = CMat::Zero(a.mean.rows(), a.mean.cols());
        double total = 0;
        for (size_t j = 0; j < B; ++j) {
            size_t pick = rng.below(B);
            m += a.batch_means[pick] * static_cast<double>(a.batch_sizes[pick]);
            total += a.batch_sizes[pick];
        }
        m /= total;
        double td = trace_distance(CMat(0.5 * (m + m.adjoint())), a.mean);
        acc += td * td;
    }
    return std::sqrt(acc / replicates);
}

}  // namespace

TdEstimate td_estimate(const McView &a, const CMat &exact, uint64_t seed, int replicates) {
    Rng rng = Rng::derive(seed, 0, 0xB007);
    return TdEstimate{trace_distance(a.mean, exact), bootstrap_noise(a, rng, replicates)};
}

TdEstimate td_estimate(const McView &a, const McView &b, uint64_t seed, int replicates) {
    Rng rng = Rng::derive(seed, 0, 0xB007);
    double sa = bootstrap_noise(a, rng, replicates);
    double sb = bootstrap_noise(b, rng, replicates);
    return TdEstimate{trace_distance(a.mean, b.mean), std::sqrt(sa * sa + sb * sb)};
}

// ---------------------------------------------------------------------------
// Program library.

CMat hadamard_gate() {
    CMat h(2, 2);
    h << 1, 1, 1, -1;
    return h / std::sqrt(2.0);
}

CMat fourier_gate(int n) {
    const Eigen::Index N = Eigen::Index{1} << n;
    CMat f(N, N);
    for (Eigen::Index a = 0; a < N; ++a)
        for (Eigen::Index b = 0; b < N; ++b) f(a, b) = std::polar(1.0 / std::sqrt(static_cast<double>(N)), 2 * std::numbers::pi * static_cast<double>(a * b) / static_cast<double>(N));
    return f;
}

Permutation controlled_swap(int control, int a_offset, int b_offset, int width) {
    Permutation p;
    p.qubits.push_back(control);
    for (int i = 0; i < width; ++i) p.qubits.push_back(a_offset + i);
    for (int i = 0; i < width; ++i) p.qubits.push_back(b_offset + i);
    const uint32_t W = 1U << width;
    p.map.resize(2 * static_cast<size_t>(W) * W);
    for (uint32_t c = 0; c < 2; ++c)
        for (uint32_t a = 0; a < W; ++a)
            for (uint32_t b = 0; b < W; ++b) p.map[(c * W + a) * W + b] = c ? (c * W + b) * W + a : (c * W + a) * W + b;
    return p;
}

namespace {

Interleave identity_interleave() { return Interleave{CMat::Identity(2, 2), {0}}; }

}  // namespace

AdversaryProgram program_parallel_zero(int n, int t, const std::string &oracle) {
    if (t < 1) throw std::invalid_argument("program_parallel_zero: need t >= 1");
    AdversaryProgram p;
    p.n = n;
    p.m_anc = (t - 1) * n;
    p.steps.push_back(identity_interleave());
    for (int i = 0; i < t; ++i) p.steps.push_back(QuantumQuery{oracle, i * n});
    p.declared[oracle] = t;
    p.validate();
    return p;
}

AdversaryProgram program_xor_compare(int n, const std::string &oracle) {
    AdversaryProgram p = program_parallel_zero(n, 2, oracle);
    Permutation x;
    x.qubits = block_qubits(0, 2 * n);
    const uint32_t N = 1U << n;
    x.map.resize(static_cast<size_t>(N) * N);
    for (uint32_t a = 0; a < N; ++a)
        for (uint32_t b = 0; b < N; ++b) x.map[a * N + b] = (a ^ b) * N + b;
    p.steps.push_back(x);
    p.view = block_qubits(0, n);
    p.validate();
    return p;
}

AdversaryProgram program_random(int n, int m_anc, const std::vector<std::string> &queries, uint64_t seed) {
    AdversaryProgram p;
    p.n = n;
    p.m_anc = m_anc;
    Rng rng(seed);
    const Eigen::Index D = Eigen::Index{1} << (n + m_anc);
    p.steps.push_back(Interleave{haar_unitary(D, rng).mat(), {}});
    for (const auto &o : queries) {
        p.steps.push_back(QuantumQuery{o, 0});
        p.steps.push_back(Interleave{haar_unitary(D, rng).mat(), {}});
        ++p.declared[o];
    }
    p.validate();
    return p;
}

AdversaryProgram program_fourier(int n, int m_anc, const std::vector<std::string> &queries) {
    AdversaryProgram p;
    p.n = n;
    p.m_anc = m_anc;
    auto f = fourier_gate(n);
    auto reg = block_qubits(0, n);
    p.steps.push_back(Interleave{f, reg});
    for (const auto &o : queries) {
        p.steps.push_back(QuantumQuery{o, 0});
        p.steps.push_back(Interleave{f, reg});
        ++p.declared[o];
    }
    p.validate();
    return p;
}

AdversaryProgram pad_dummy_queries(AdversaryProgram p, const std::string &oracle, int count, int offset) {
    for (int i = 0; i < count; ++i) {
        p.steps.push_back(identity_interleave());
        p.steps.push_back(QuantumQuery{oracle, offset});
        ++p.declared[oracle];
    }
    p.validate();
    return p;
}

}  // namespace qhro
