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

#include "qhro/relstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qhro {

// ---------------------------------------------------------------------------
// Relations and multisets.

InjectiveRelation::InjectiveRelation(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    auto im = image();
    std::sort(im.begin(), im.end());
    if (std::adjacent_find(im.begin(), im.end()) != im.end()) {
        throw std::invalid_argument("InjectiveRelation: repeated output");
    }
}

BitSet InjectiveRelation::image() const {
    BitSet out;
    for (const auto &p : pairs_) out.push_back(p.second);
    return out;
}

BitSet InjectiveRelation::domain() const {
    BitSet out;
    for (const auto &p : pairs_) out.push_back(p.first);
    return out;
}

MultisetLabel::MultisetLabel(std::vector<std::vector<uint32_t>> elements) : elems_(std::move(elements)) {
    for (const auto &e : elems_) {
        if (e.size() != elems_.front().size() || e.empty()) throw std::invalid_argument("MultisetLabel: mixed arity");
    }
    std::sort(elems_.begin(), elems_.end());
}

CVec relation_state_vector(const MultisetLabel &m, int n) {
    size_t t = m.size();
    int a = m.arity();
    int qubits = a * n * static_cast<int>(t);
    if (qubits > 24) throw CapExceeded("relation_state_vector: more than 24 qubits");
    CVec out = CVec::Zero(Eigen::Index{1} << qubits);
    if (t == 0) {
        out[0] = 1.0;
        return out;
    }
    double fact = 1.0;
    for (size_t i = 2; i <= t; ++i) fact *= static_cast<double>(i);
    double mult = 1.0;
    const auto &el = m.elements();
    for (size_t i = 0; i < t;) {
        size_t j = i;
        while (j < t && el[j] == el[i]) ++j;
        for (size_t r = 2; r <= j - i; ++r) mult *= static_cast<double>(r);
        i = j;
    }
    double alpha = 1.0 / std::sqrt(fact * mult);
    std::vector<size_t> perm(t);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        uint64_t idx = 0;
        for (int c = 0; c < a; ++c)
            for (size_t j = 0; j < t; ++j) idx = (idx << n) | el[perm[j]][c];
        out[static_cast<Eigen::Index>(idx)] += alpha;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

CVec relation_state_vector(const InjectiveRelation &r, int n) {
    std::vector<std::vector<uint32_t>> el;
    for (const auto &p : r.pairs()) el.push_back({p.first, p.second});
    return relation_state_vector(MultisetLabel(std::move(el)), n);
}

// ---------------------------------------------------------------------------
// Labels.

SlotValue SlotValue::key(uint32_t k) {
    SlotValue s;
    s.kind = SlotKind::Key;
    s.arity = 1;
    s.items.push_back(Tuple{static_cast<Value>(k), 0, 0, 0});
    return s;
}

SlotValue SlotValue::empty(const SlotSpec &spec) {
    SlotValue s;
    s.kind = spec.kind;
    s.arity = spec.arity;
    return s;
}

uint32_t SlotValue::key_value() const {
    if (kind != SlotKind::Key || items.size() != 1) throw std::logic_error("slot is not a populated key");
    return items.front()[0];
}

void SlotValue::insert(const Tuple &t) { items.insert(std::upper_bound(items.begin(), items.end(), t), t); }

void SlotValue::canonicalize() { std::sort(items.begin(), items.end()); }

BitSet SlotValue::image() const {
    BitSet out;
    out.reserve(items.size());
    for (const auto &t : items) out.push_back(t[arity - 1]);
    return out;
}

namespace {

constexpr int kCountBits = 11;

Value header(const SlotValue &s) {
    if (s.items.size() >= (size_t{1} << kCountBits)) throw std::length_error("label slot too large");
    if (s.arity < 1 || s.arity > 4) throw std::invalid_argument("slot arity must be in [1,4]");
    return static_cast<Value>((static_cast<unsigned>(s.kind) << 14) | (static_cast<unsigned>(s.arity) << kCountBits) |
                              static_cast<unsigned>(s.items.size()));
}

}  // namespace

Label Label::encode(const std::vector<SlotValue> &slots) {
    Label l;
    for (const auto &s : slots) {
        l.code_.push_back(header(s));
        for (const auto &t : s.items)
            for (int c = 0; c < s.arity; ++c) l.code_.push_back(t[c]);
    }
    return l;
}

std::vector<SlotValue> Label::decode() const {
    std::vector<SlotValue> out;
    size_t i = 0;
    while (i < code_.size()) {
        Value h = code_[i++];
        SlotValue s;
        s.kind = static_cast<SlotKind>(h >> 14);
        s.arity = (h >> kCountBits) & 7;
        size_t count = h & ((1U << kCountBits) - 1);
        s.items.resize(count, Tuple{0, 0, 0, 0});
        for (size_t j = 0; j < count; ++j)
            for (int c = 0; c < s.arity; ++c) s.items[j][c] = code_[i++];
        out.push_back(std::move(s));
    }
    return out;
}

SlotValue Label::slot(int index) const {
    auto all = decode();
    return all.at(static_cast<size_t>(index));
}

bool Label::operator<(const Label &o) const {
    return std::lexicographical_compare(code_.begin(), code_.end(), o.code_.begin(), o.code_.end());
}

nlohmann::json Label::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto &s : decode()) {
        nlohmann::json items = nlohmann::json::array();
        for (const auto &t : s.items) {
            if (s.kind == SlotKind::Key) {
                items = t[0];
                break;
            }
            nlohmann::json tup = nlohmann::json::array();
            for (int c = 0; c < s.arity; ++c) tup.push_back(t[c]);
            items.push_back(tup);
        }
        out.push_back(items);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PurifiedState.

PurifiedState::PurifiedState(int adv_qubits, std::vector<SlotSpec> schema, size_t cap_entries)
    : adv_qubits_(adv_qubits), schema_(std::move(schema)), cap_(cap_entries) {
    check_cap(adv_qubits);
}

PurifiedState PurifiedState::start(const StateVector &init, std::vector<SlotSpec> schema, size_t cap_entries) {
    PurifiedState s(init.qubits(), std::move(schema), cap_entries);
    std::vector<SlotValue> slots;
    for (const auto &spec : s.schema_) {
        if (spec.kind == SlotKind::Key) throw std::invalid_argument("start: key slots are added with add_key_superposition");
        slots.push_back(SlotValue::empty(spec));
    }
    s.accumulate(Label::encode(slots), init.amps());
    return s;
}

int PurifiedState::slot_index(const std::string &name) const {
    for (size_t i = 0; i < schema_.size(); ++i) {
        if (schema_[i].name == name) return static_cast<int>(i);
    }
    throw std::invalid_argument("unknown slot '" + name + "'");
}

double PurifiedState::norm2() const {
    double s = 0;
    for (const auto &kv : terms_) s += kv.second.squaredNorm();
    return s;
}

void PurifiedState::check_cap_after_insert() const {
    if (terms_.size() * static_cast<size_t>(dim()) > cap_) {
        throw MemoryCapExceeded("PurifiedState: " + std::to_string(terms_.size()) + " labels x dim " +
                                std::to_string(dim()) + " exceeds cap of " + std::to_string(cap_) + " entries");
    }
}

void PurifiedState::accumulate(const Label &l, const CVec &v) {
    auto it = terms_.find(l);
    if (it == terms_.end()) {
        terms_.emplace(l, v);
        check_cap_after_insert();
    } else {
        it->second += v;
    }
}

void PurifiedState::accumulate(Label &&l, CVec &&v) {
    auto it = terms_.lower_bound(l);
    if (it != terms_.end() && it->first == l) {
        it->second += v;
    } else {
        terms_.emplace_hint(it, std::move(l), std::move(v));
        check_cap_after_insert();
    }
}

double PurifiedState::prune(double tol) {
    double dropped = 0;
    for (auto it = terms_.begin(); it != terms_.end();) {
        double m = it->second.squaredNorm();
        if (m < tol) {
            dropped += m;
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

nlohmann::json PurifiedState::to_json() const {
    nlohmann::json j;
    j["adv_qubits"] = adv_qubits_;
    nlohmann::json sch = nlohmann::json::array();
    for (const auto &s : schema_) {
        const char *kind = s.kind == SlotKind::Relation ? "relation" : s.kind == SlotKind::Multiset ? "multiset" : "key";
        sch.push_back({{"name", s.name}, {"kind", kind}, {"arity", s.arity}});
    }
    j["schema"] = sch;
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &kv : terms_) {
        nlohmann::json amps = nlohmann::json::array();
        for (Eigen::Index i = 0; i < kv.second.size(); ++i) amps.push_back({kv.second[i].real(), kv.second[i].imag()});
        terms.push_back({{"label", kv.first.to_json()}, {"amplitudes", amps}});
    }
    j["terms"] = terms;
    return j;
}

cplx inner(const PurifiedState &a, const PurifiedState &b) {
    if (a.adv_qubits() != b.adv_qubits() || a.schema().size() != b.schema().size()) {
        throw std::invalid_argument("inner: incompatible purified states");
    }
    cplx s = 0;
    auto ia = a.terms().begin();
    auto ib = b.terms().begin();
    while (ia != a.terms().end() && ib != b.terms().end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            s += ia->second.dot(ib->second);
            ++ia;
            ++ib;
        }
    }
    return s;
}

CMat reduce(const PurifiedState &s) {
    auto d = s.dim();
    CMat rho = CMat::Zero(d, d);
    // Batched rank-k updates keep the summation order fixed by the label order.
    const Eigen::Index batch = 256;
    CMat block(d, batch);
    Eigen::Index fill = 0;
    for (const auto &kv : s.terms()) {
        block.col(fill++) = kv.second;
        if (fill == batch) {
            rho.noalias() += block * block.adjoint();
            fill = 0;
        }
    }
    if (fill > 0) rho.noalias() += block.leftCols(fill) * block.leftCols(fill).adjoint();
    return 0.5 * (rho + rho.adjoint());
}

PurifiedState add_key_superposition(const PurifiedState &s, const std::string &slot, uint32_t key_count) {
    if (key_count == 0) throw std::invalid_argument("add_key_superposition: empty key space");
    auto schema = s.schema();
    schema.push_back(SlotSpec{slot, SlotKind::Key, 1});
    PurifiedState out(s.adv_qubits(), schema, s.cap());
    double a = 1.0 / std::sqrt(static_cast<double>(key_count));
    for (const auto &kv : s.terms()) {
        auto slots = kv.first.decode();
        slots.push_back(SlotValue::key(0));
        for (uint32_t k = 0; k < key_count; ++k) {
            slots.back() = SlotValue::key(k);
            out.accumulate(Label::encode(slots), CVec(a * kv.second));
        }
    }
    return out;
}

PurifiedState apply_gate(const PurifiedState &s, const CMat &gate, const std::vector<int> &qubits) {
    PurifiedState out(s.adv_qubits(), s.schema(), s.cap());
    for (const auto &kv : s.terms()) {
        CVec v = kv.second;
        apply_local(v, s.adv_qubits(), gate, qubits);
        out.accumulate(kv.first, v);
    }
    return out;
}

PurifiedState apply_basis_map(const PurifiedState &s,
                              const std::function<uint64_t(const std::vector<SlotValue> &, uint64_t)> &map) {
    PurifiedState out(s.adv_qubits(), s.schema(), s.cap());
    auto d = static_cast<uint64_t>(s.dim());
    std::vector<char> hit(d);
    for (const auto &kv : s.terms()) {
        auto slots = kv.first.decode();
        CVec v = CVec::Zero(s.dim());
        std::fill(hit.begin(), hit.end(), 0);
        for (uint64_t i = 0; i < d; ++i) {
            uint64_t j = map(slots, i);
            if (j >= d || hit[j]) throw std::invalid_argument("apply_basis_map: map is not a permutation");
            hit[j] = 1;
            v[static_cast<Eigen::Index>(j)] = kv.second[static_cast<Eigen::Index>(i)];
        }
        out.accumulate(kv.first, v);
    }
    return out;
}

PurifiedState apply_key_pauli(const PurifiedState &s, const std::string &key_slot, PauliKind kind, int lambda,
                              int offset, int n) {
    int ks = s.slot_index(key_slot);
    int q = s.adv_qubits();
    if (offset < 0 || offset + n > q || lambda > n) throw std::invalid_argument("apply_key_pauli: bad register");
    uint64_t lo = uint64_t{1} << (q - offset - n);
    uint64_t nmask = (uint64_t{1} << n) - 1;
    PurifiedState out(q, s.schema(), s.cap());
    for (const auto &kv : s.terms()) {
        auto slots = kv.first.decode();
        uint64_t k = static_cast<uint64_t>(slots[ks].key_value()) << (n - lambda);
        CVec v(kv.second.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            auto ui = static_cast<uint64_t>(i);
            uint64_t a = (ui / lo) & nmask;
            if (kind == PauliKind::X) {
                uint64_t j = ui + ((a ^ k) - a) * lo;
                v[static_cast<Eigen::Index>(j)] = kv.second[i];
            } else {
                v[i] = (__builtin_popcountll(a & k) & 1) ? -kv.second[i] : kv.second[i];
            }
        }
        out.accumulate(kv.first, v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Collision-free sets.

void CFParams::validate() const {
    if (ell < 1) throw std::invalid_argument("CFParams: l must be >= 1");
    if (lambda < 0 || lambda > n) throw std::invalid_argument("CFParams: need 0 <= lambda <= n");
    if (n > 16) throw std::invalid_argument("CFParams: n too large");
}

namespace {

// Calls f(xor of prefixes) for every i-subset of v.
template <typename F>
void for_each_subset_xor(const BitSet &v, int i, F &&f) {
    int m = static_cast<int>(v.size());
    if (i > m) return;
    std::vector<int> idx(static_cast<size_t>(i));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        uint32_t x = 0;
        for (int j : idx) x ^= v[static_cast<size_t>(j)];
        f(x);
        int p = i - 1;
        while (p >= 0 && idx[static_cast<size_t>(p)] == m - i + p) --p;
        if (p < 0) return;
        ++idx[static_cast<size_t>(p)];
        for (int q = p + 1; q < i; ++q) idx[static_cast<size_t>(q)] = idx[static_cast<size_t>(q - 1)] + 1;
    }
}

}  // namespace

bool is_collision_free(const BitSet &s, const CFParams &p) {
    p.validate();
    BitSet sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("is_collision_free: input is not a set");
    }
    BitSet pre;
    for (auto y : sorted) pre.push_back(prefix(y, p.lambda, p.n));
    for (int i = 1; i <= p.ell; ++i) {
        // Distinct i-subsets must give distinct XORs: count XOR values against subset count.
        std::vector<uint32_t> xs;
        for_each_subset_xor(pre, i, [&](uint32_t x) { xs.push_back(x); });
        std::sort(xs.begin(), xs.end());
        if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) return false;
    }
    return true;
}

BitSet cf_set(const BitSet &s, const CFParams &p) {
    p.validate();
    if (p.n > 12 || s.size() > 6 || p.ell > 3) throw std::invalid_argument("cf_set: brute force infeasible");
    if (!is_collision_free(s, p)) throw std::invalid_argument("cf_set: S is not collision-free");
    std::set<uint32_t> in(s.begin(), s.end());
    BitSet out;
    BitSet ext = s;
    ext.push_back(0);
    for (uint32_t y = 0; y < (1U << p.n); ++y) {
        if (in.count(y)) continue;
        ext.back() = y;
        if (is_collision_free(ext, p)) out.push_back(y);
    }
    return out;
}

BitSet cf_forbidden_prefixes(const BitSet &prefixes, int ell) {
    // y is forbidden iff pre(y) xor X(T) = X(T') for some |T| = i-1, |T'| = i, i <= l.
    std::set<uint32_t> bad;
    for (int i = 1; i <= ell; ++i) {
        std::vector<uint32_t> lo, hi;
        for_each_subset_xor(prefixes, i - 1, [&](uint32_t x) { lo.push_back(x); });
        for_each_subset_xor(prefixes, i, [&](uint32_t x) { hi.push_back(x); });
        for (auto a : lo)
            for (auto b : hi) bad.insert(a ^ b);
    }
    return BitSet(bad.begin(), bad.end());
}

double cf_lower_bound(size_t s_size, const CFParams &p) {
    double s = static_cast<double>(s_size);
    return std::ldexp(1.0, p.n) - p.ell * std::pow(s, 2.0 * p.ell) * std::ldexp(1.0, p.n - p.lambda);
}

// ---------------------------------------------------------------------------
// Path recording.

PurifiedState record_query(const PurifiedState &s, int offset, int n, const RecordSpec &spec) {
    int q = s.adv_qubits();
    if (offset < 0 || offset + n > q) throw std::invalid_argument("record_query: register out of range");
    if (spec.cf) spec.cf->validate();
    if (spec.cf && spec.cf->n != n) throw std::invalid_argument("record_query: CF params disagree with register width");
    const bool selected = spec.control_offset >= 0;
    if (selected && (spec.control_offset + spec.control_width > q ||
                     spec.slot_by_control.size() != (size_t{1} << spec.control_width))) {
        throw std::invalid_argument("record_query: bad control register");
    }
    const uint64_t N = uint64_t{1} << n;
    const uint64_t lo = uint64_t{1} << (q - offset - n);
    const uint64_t d = static_cast<uint64_t>(s.dim());
    const uint64_t C = selected ? (uint64_t{1} << spec.control_width) : 1;
    const uint64_t clo = selected ? (uint64_t{1} << (q - spec.control_offset - spec.control_width)) : 1;

    // Index lists per (x, control) group, shared by every term.
    std::vector<std::vector<uint64_t>> groups(N * C);
    for (uint64_t i = 0; i < d; ++i) {
        uint64_t x = (i / lo) % N;
        uint64_t c = selected ? (i / clo) % C : 0;
        groups[x * C + c].push_back(i);
    }

    PurifiedState out(q, s.schema(), s.cap());
    std::vector<std::vector<uint32_t>> allowed_cache(C);
    for (const auto &kv : s.terms()) {
        auto slots = kv.first.decode();
        for (uint64_t c = 0; c < C; ++c) {
            int target = selected ? spec.slot_by_control[c] : spec.target_slot;
            if (target < 0 || target >= static_cast<int>(slots.size()) || slots[target].kind != SlotKind::Relation) {
                throw std::invalid_argument("record_query: target is not a relation slot");
            }
            BitSet used = slots[target].image();
            for (int o : spec.shared_slots) {
                if (o == target) continue;
                auto im = slots.at(static_cast<size_t>(o)).image();
                used.insert(used.end(), im.begin(), im.end());
            }
            std::sort(used.begin(), used.end());
            if (std::adjacent_find(used.begin(), used.end()) != used.end()) {
                throw std::logic_error("record_query: recorded images are not disjoint");
            }
            auto &allowed = allowed_cache[c];
            allowed.clear();
            if (spec.cf) {
                allowed = cf_set(used, *spec.cf);
            } else {
                for (uint32_t y = 0; y < N; ++y) {
                    if (!std::binary_search(used.begin(), used.end(), y)) allowed.push_back(y);
                }
            }
            if (used.size() >= N) throw std::domain_error("record_query: |R| = N, the map is undefined");
            if (allowed.empty()) throw std::domain_error("record_query: no admissible output");
            const double amp = 1.0 / std::sqrt(static_cast<double>(allowed.size()));
            for (uint64_t x = 0; x < N; ++x) {
                const auto &g = groups[x * C + c];
                bool nonzero = false;
                for (auto i : g) {
                    if (kv.second[static_cast<Eigen::Index>(i)] != cplx(0)) {
                        nonzero = true;
                        break;
                    }
                }
                if (!nonzero) continue;
                for (auto y : allowed) {
                    CVec v = CVec::Zero(s.dim());
                    for (auto i : g) v[static_cast<Eigen::Index>(i + (y - x) * lo)] = amp * kv.second[static_cast<Eigen::Index>(i)];
                    auto ns = slots;
                    ns[target].insert(Tuple{static_cast<Value>(x), static_cast<Value>(y), 0, 0});
                    out.accumulate(Label::encode(ns), std::move(v));
                }
            }
        }
    }
    return out;
}

PurifiedState pr_apply(const PurifiedState &s, const std::string &slot, int offset, int n) {
    RecordSpec spec;
    spec.target_slot = s.slot_index(slot);
    return record_query(s, offset, n, spec);
}

PurifiedState pcfpr_apply(const PurifiedState &s, const std::string &target, const std::string &other, int offset,
                          const CFParams &p) {
    RecordSpec spec;
    spec.target_slot = s.slot_index(target);
    if (!other.empty()) spec.shared_slots.push_back(s.slot_index(other));
    spec.cf = p;
    return record_query(s, offset, p.n, spec);
}

// ---------------------------------------------------------------------------
// Correlated pairs and projections.

std::vector<PairOfPairs> corx(const std::vector<InjectiveRelation::Pair> &r, uint32_t k) {
    std::vector<PairOfPairs> out;
    for (const auto &a : r)
        for (const auto &b : r)
            if ((a.second ^ b.first) == k) out.emplace_back(a, b);
    return out;
}

std::vector<uint32_t> good_keys(const std::vector<InjectiveRelation::Pair> &r, int ell, int lambda, int n) {
    std::vector<uint32_t> out;
    for (uint32_t k = 0; k < (1U << lambda); ++k) {
        if (static_cast<int>(corx(r, k << (n - lambda)).size()) == ell) out.push_back(k);
    }
    return out;
}

PurifiedState project_good(const PurifiedState &s, const std::function<bool(const std::vector<SlotValue> &)> &pred) {
    PurifiedState out(s.adv_qubits(), s.schema(), s.cap());
    for (const auto &kv : s.terms()) {
        if (pred(kv.first.decode())) out.accumulate(kv.first, kv.second);
    }
    return out;
}

PurifiedState label_rewrite(const PurifiedState &s, std::vector<SlotSpec> out_schema, const LabelMap &f) {
    PurifiedState out(s.adv_qubits(), std::move(out_schema), s.cap());
    for (const auto &kv : s.terms()) {
        auto ns = f(kv.first.decode());
        if (ns.size() != out.schema().size()) throw std::logic_error("label_rewrite: output does not match schema");
        for (auto &slot : ns) slot.canonicalize();
        Label l = Label::encode(ns);
        if (out.terms().count(l)) throw NonInjectiveRewrite("label_rewrite: two labels map to the same image");
        out.accumulate(l, kv.second);
    }
    return out;
}

PurifiedState label_expand(const PurifiedState &s, std::vector<SlotSpec> out_schema, const LabelExpansion &f) {
    PurifiedState out(s.adv_qubits(), std::move(out_schema), s.cap());
    for (const auto &kv : s.terms()) {
        for (auto &[ns, c] : f(kv.first.decode())) {
            if (ns.size() != out.schema().size()) throw std::logic_error("label_expand: output does not match schema");
            for (auto &slot : ns) slot.canonicalize();
            out.accumulate(Label::encode(ns), CVec(c * kv.second));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Named rewrites.

namespace rewrites {

namespace {

uint32_t shifted_key(const std::vector<SlotValue> &s, int key_slot, int n, int lambda) {
    return s.at(static_cast<size_t>(key_slot)).key_value() << (n - lambda);
}

SlotValue relation_slot() { return SlotValue::empty(SlotSpec{"", SlotKind::Relation, 2}); }

}  // namespace

LabelMap partition_by_key(int from, int key_slot, int n, int lambda) {
    return [=](const std::vector<SlotValue> &in) {
        auto out = in;
        uint32_t k = shifted_key(in, key_slot, n, lambda);
        SlotValue keep = relation_slot(), moved = relation_slot();
        const auto &items = in.at(static_cast<size_t>(from)).items;
        for (const auto &a : items) {
            bool starts = std::any_of(items.begin(), items.end(), [&](const Tuple &b) { return (a[1] ^ b[0]) == k; });
            (starts ? moved : keep).items.push_back(a);
        }
        out[static_cast<size_t>(from)] = keep;
        out.push_back(moved);
        return out;
    };
}

LabelMap partition_by_partner(int from, int ref, int key_slot, int n, int lambda) {
    return [=](const std::vector<SlotValue> &in) {
        auto out = in;
        uint32_t k = shifted_key(in, key_slot, n, lambda);
        SlotValue keep = relation_slot(), moved = relation_slot();
        const auto &refs = in.at(static_cast<size_t>(ref)).items;
        for (const auto &a : in.at(static_cast<size_t>(from)).items) {
            bool ends = std::any_of(refs.begin(), refs.end(), [&](const Tuple &b) { return (b[1] ^ a[0]) == k; });
            (ends ? moved : keep).items.push_back(a);
        }
        out[static_cast<size_t>(from)] = keep;
        out.push_back(moved);
        return out;
    };
}

LabelMap merge_slots(int from, int part) {
    return [=](const std::vector<SlotValue> &in) {
        auto out = in;
        auto &dst = out.at(static_cast<size_t>(from)).items;
        const auto &src = in.at(static_cast<size_t>(part)).items;
        dst.insert(dst.end(), src.begin(), src.end());
        out.erase(out.begin() + part);
        return out;
    };
}

LabelMap pair_multisets(int first, int second, int key_slot, int n, int lambda) {
    return [=](const std::vector<SlotValue> &in) {
        uint32_t k = shifted_key(in, key_slot, n, lambda);
        const auto &a = in.at(static_cast<size_t>(first)).items;
        const auto &b = in.at(static_cast<size_t>(second)).items;
        if (a.size() != b.size()) throw std::domain_error("pair_multisets: sizes differ");
        SlotValue paired;
        paired.kind = SlotKind::Multiset;
        paired.arity = 4;
        std::vector<char> used(b.size(), 0);
        for (const auto &p : a) {
            size_t hit = b.size();
            for (size_t j = 0; j < b.size(); ++j) {
                if (!used[j] && b[j][0] == (p[1] ^ k)) {
                    if (hit != b.size()) throw std::domain_error("pair_multisets: ambiguous partner");
                    hit = j;
                }
            }
            if (hit == b.size()) throw std::domain_error("pair_multisets: missing partner");
            used[hit] = 1;
            paired.items.push_back(Tuple{p[0], p[1], b[hit][0], b[hit][1]});
        }
        auto out = in;
        out[static_cast<size_t>(first)] = paired;
        out.erase(out.begin() + second);
        return out;
    };
}

LabelMap unpair_multisets(int slot, int second) {
    return [=](const std::vector<SlotValue> &in) {
        SlotValue a = relation_slot(), b = relation_slot();
        for (const auto &t : in.at(static_cast<size_t>(slot)).items) {
            a.items.push_back(Tuple{t[0], t[1], 0, 0});
            b.items.push_back(Tuple{t[2], t[3], 0, 0});
        }
        auto out = in;
        out[static_cast<size_t>(slot)] = a;
        out.insert(out.begin() + second, b);
        return out;
    };
}

LabelMap apply_injection(int slot, int key_slot, int n, int lambda) {
    return [=](const std::vector<SlotValue> &in) {
        uint32_t k = shifted_key(in, key_slot, n, lambda);
        SlotValue s;
        s.kind = SlotKind::Multiset;
        s.arity = 3;
        for (const auto &t : in.at(static_cast<size_t>(slot)).items) {
            if (t[2] != (t[1] ^ k)) throw std::domain_error("apply_injection: tuple outside the domain of f_k");
            s.items.push_back(Tuple{t[0], t[1], t[3], 0});
        }
        auto out = in;
        out[static_cast<size_t>(slot)] = s;
        return out;
    };
}

LabelMap unapply_injection(int slot, int key_slot, int n, int lambda) {
    return [=](const std::vector<SlotValue> &in) {
        uint32_t k = shifted_key(in, key_slot, n, lambda);
        SlotValue s;
        s.kind = SlotKind::Multiset;
        s.arity = 4;
        for (const auto &t : in.at(static_cast<size_t>(slot)).items) {
            s.items.push_back(Tuple{t[0], t[1], static_cast<Value>(t[1] ^ k), t[2]});
        }
        auto out = in;
        out[static_cast<size_t>(slot)] = s;
        return out;
    };
}

}  // namespace rewrites

}  // namespace qhro
