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

#ifndef QHRO_RELSTATE_HPP
#define QHRO_RELSTATE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>
#include "json.hpp"

#include "qhro/linalg.hpp"

namespace qhro {

using Value = uint16_t;
using Tuple = std::array<Value, 4>;

/// Strings in {0,1}^n stored as integers, most significant bit first.
using BitSet = std::vector<uint32_t>;

class InjectiveRelation {
   public:
    using Pair = std::pair<uint32_t, uint32_t>;
    InjectiveRelation() = default;
    /// Sorts the pairs; throws if two pairs share an output.
    explicit InjectiveRelation(std::vector<Pair> pairs);

    const std::vector<Pair> &pairs() const { return pairs_; }
    size_t size() const { return pairs_.size(); }
    BitSet image() const;
    BitSet domain() const;
    bool operator==(const InjectiveRelation &o) const { return pairs_ == o.pairs_; }

   private:
    std::vector<Pair> pairs_;
};

class MultisetLabel {
   public:
    MultisetLabel() = default;
    /// Every element must have the same arity; repeats are kept.
    explicit MultisetLabel(std::vector<std::vector<uint32_t>> elements);

    const std::vector<std::vector<uint32_t>> &elements() const { return elems_; }
    size_t size() const { return elems_.size(); }
    int arity() const { return elems_.empty() ? 0 : static_cast<int>(elems_.front().size()); }

   private:
    std::vector<std::vector<uint32_t>> elems_;
};

/// Unit vector alpha * sum_pi S_pi|x_1..x_t> (x) S_pi|y_1..y_t>, coordinate-major layout.
/// alpha = 1/sqrt(t! prod m_a!) so the result has unit norm even with repeats.
CVec relation_state_vector(const MultisetLabel &m, int n);
CVec relation_state_vector(const InjectiveRelation &r, int n);

// ---------------------------------------------------------------------------
// Labels of the purification registers.

enum class SlotKind : uint8_t { Relation = 0, Multiset = 1, Key = 2 };

struct SlotSpec {
    std::string name;
    SlotKind kind = SlotKind::Relation;
    int arity = 2;
};

/// Decoded contents of one slot; items are canonically sorted.
struct SlotValue {
    SlotKind kind = SlotKind::Relation;
    int arity = 2;
    std::vector<Tuple> items;

    static SlotValue key(uint32_t k);
    static SlotValue empty(const SlotSpec &spec);
    uint32_t key_value() const;
    void insert(const Tuple &t);
    void canonicalize();
    /// Output coordinate (last coordinate) of every item, for relations.
    BitSet image() const;
};

/// Canonical packed label: one header word per slot followed by its values.
class Label {
   public:
    Label() = default;
    static Label encode(const std::vector<SlotValue> &slots);
    std::vector<SlotValue> decode() const;
    SlotValue slot(int index) const;
    bool operator<(const Label &o) const;
    bool operator==(const Label &o) const { return code_ == o.code_; }
    nlohmann::json to_json() const;

   private:
    boost::container::small_vector<Value, 24> code_;
};

/// Superposition sum_L |L> (x) v_L with dense v_L on the adversary registers.
class PurifiedState {
   public:
    using Terms = std::map<Label, CVec>;

    PurifiedState() = default;
    PurifiedState(int adv_qubits, std::vector<SlotSpec> schema, size_t cap_entries = kDefaultCap);
    /// One term: every slot empty (keys must be set separately).
    static PurifiedState start(const StateVector &init, std::vector<SlotSpec> schema, size_t cap_entries = kDefaultCap);

    static constexpr size_t kDefaultCap = size_t{1} << 24;

    int adv_qubits() const { return adv_qubits_; }
    Eigen::Index dim() const { return Eigen::Index{1} << adv_qubits_; }
    const std::vector<SlotSpec> &schema() const { return schema_; }
    const Terms &terms() const { return terms_; }
    size_t cap() const { return cap_; }
    size_t size() const { return terms_.size(); }
    int slot_index(const std::string &name) const;
    double norm2() const;

    /// Adds v into the term for L, enforcing the memory cap.
    void accumulate(const Label &l, const CVec &v);
    void accumulate(Label &&l, CVec &&v);
    /// Drops terms whose squared norm is below tol; returns the dropped mass.
    double prune(double tol = 1e-26);

    nlohmann::json to_json() const;

   private:
    void check_cap_after_insert() const;

    int adv_qubits_ = 0;
    std::vector<SlotSpec> schema_;
    Terms terms_;
    size_t cap_ = kDefaultCap;
};

struct MemoryCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// <a|b> summed over matching labels; schemas must agree.
cplx inner(const PurifiedState &a, const PurifiedState &b);
/// Tr_E |psi><psi| on the adversary registers.
CMat reduce(const PurifiedState &s);

/// Replaces each term by sum_k |k>/sqrt(K) on a fresh key slot appended to the schema.
PurifiedState add_key_superposition(const PurifiedState &s, const std::string &slot, uint32_t key_count);
PurifiedState apply_gate(const PurifiedState &s, const CMat &gate, const std::vector<int> &qubits);
/// Basis permutation of the adversary registers; may depend on the label.
PurifiedState apply_basis_map(const PurifiedState &s,
                              const std::function<uint64_t(const std::vector<SlotValue> &, uint64_t)> &map);
/// X^k or Z^k on an n-qubit block, k read from the key slot.
PurifiedState apply_key_pauli(const PurifiedState &s, const std::string &key_slot, PauliKind kind, int lambda,
                              int offset, int n);

// ---------------------------------------------------------------------------
// Collision-free sets.

struct CFParams {
    int ell = 1;
    int lambda = 0;
    int n = 0;
    void validate() const;
};

inline uint32_t prefix(uint32_t y, int lambda, int n) { return lambda == 0 ? 0U : (y >> (n - lambda)); }

/// Definition verbatim: equal-size subsets of size i <= l have distinct prefix XORs.
bool is_collision_free(const BitSet &s, const CFParams &p);
/// {y not in S : S u {y} collision-free}, by exhaustive subset enumeration.
BitSet cf_set(const BitSet &s, const CFParams &p);
/// Forbidden-prefix set: y not in S is admissible iff prefix(y) is not in the result.
BitSet cf_forbidden_prefixes(const BitSet &prefixes, int ell);
/// 2^n - l|S|^{2l} 2^{n-lambda}, as a signed value.
double cf_lower_bound(size_t s_size, const CFParams &p);

// ---------------------------------------------------------------------------
// Path recording.

/// Which labels record a query and which images constrain the answer.
struct RecordSpec {
    int target_slot = 0;
    /// Slots whose union of images must stay collision-free with y (the target is implied).
    std::vector<int> shared_slots;
    /// Empty means plain injectivity: y not in the union image.
    std::optional<CFParams> cf;
    /// When set, the target slot is slot_by_control[value of the control block].
    int control_offset = -1;
    int control_width = 0;
    std::vector<int> slot_by_control;
};

/// |x>|R> -> (N-|R|)^{-1/2} sum_{y not in Im R} |y>|R u {(x,y)}> on the block [offset, offset+n).
PurifiedState pr_apply(const PurifiedState &s, const std::string &slot, int offset, int n);
/// Writes (x,y) into target with y uniform over CF(Im(target u other)).
PurifiedState pcfpr_apply(const PurifiedState &s, const std::string &target, const std::string &other, int offset,
                          const CFParams &p);
PurifiedState record_query(const PurifiedState &s, int offset, int n, const RecordSpec &spec);

// ---------------------------------------------------------------------------
// Correlated pairs and projections.

using PairOfPairs = std::pair<InjectiveRelation::Pair, InjectiveRelation::Pair>;

/// {((u,v),(u',v')) in R x R : v xor u' = k}, diagonal included.
std::vector<PairOfPairs> corx(const std::vector<InjectiveRelation::Pair> &r, uint32_t k);
/// Keys k < 2^lambda with |corx(R, k || 0^{n-lambda})| = l.
std::vector<uint32_t> good_keys(const std::vector<InjectiveRelation::Pair> &r, int ell, int lambda, int n);

PurifiedState project_good(const PurifiedState &s, const std::function<bool(const std::vector<SlotValue> &)> &pred);

/// Relabels every term. Throws if two populated labels map to the same image.
using LabelMap = std::function<std::vector<SlotValue>(const std::vector<SlotValue> &)>;
PurifiedState label_rewrite(const PurifiedState &s, std::vector<SlotSpec> out_schema, const LabelMap &f);

/// General isometry on the purification registers: each label maps to a weighted superposition.
using LabelExpansion = std::function<std::vector<std::pair<std::vector<SlotValue>, cplx>>(const std::vector<SlotValue> &)>;
PurifiedState label_expand(const PurifiedState &s, std::vector<SlotSpec> out_schema, const LabelExpansion &f);

struct NonInjectiveRewrite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace rewrites {

/// Moves the pairs (u,v) of `from` that start a k-correlated pair (some (u',v') in `from`
/// with v xor u' = k) into a new relation slot appended at the end.
LabelMap partition_by_key(int from, int key_slot, int n, int lambda);
/// Moves the pairs (u,v) of `from` that finish a k-correlated pair with some (u',v') in `ref`
/// (v' xor u = k) into a new relation slot appended at the end.
LabelMap partition_by_partner(int from, int ref, int key_slot, int n, int lambda);
/// Inverse of either partition: merges slot `part` back into `from` and erases it.
LabelMap merge_slots(int from, int part);
/// Pairs each (x,z) in `first` with (z xor k, y) in `second`; `first` becomes a multiset of
/// 4-tuples (x, z, z xor k, y) and `second` is erased.
LabelMap pair_multisets(int first, int second, int key_slot, int n, int lambda);
/// Inverse of pair_multisets; re-inserts the second relation at index `second`.
LabelMap unpair_multisets(int slot, int second);
/// f_k: (x, z, z xor k, y) -> (x, z, y).
LabelMap apply_injection(int slot, int key_slot, int n, int lambda);
/// Inverse of apply_injection.
LabelMap unapply_injection(int slot, int key_slot, int n, int lambda);

}  // namespace rewrites

}  // namespace qhro

#endif
