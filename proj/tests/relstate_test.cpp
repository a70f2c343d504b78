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

#include <cmath>
#include <set>

#include <unsupported/Eigen/KroneckerProduct>

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace qhro;

namespace {

SlotValue rel(std::vector<std::pair<uint32_t, uint32_t>> pairs) {
    SlotValue s;
    for (auto [x, y] : pairs) s.items.push_back(Tuple{Value(x), Value(y), 0, 0});
    s.canonicalize();
    return s;
}

std::vector<SlotSpec> one_relation() { return {SlotSpec{"E", SlotKind::Relation, 2}}; }

// All injective relations over [N] x [N] of size <= t_max, canonical.
std::vector<std::vector<std::pair<uint32_t, uint32_t>>> all_relations(uint32_t N, size_t t_max) {
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> out{{}};
    for (size_t t = 1; t <= t_max; ++t) {
        std::vector<std::vector<std::pair<uint32_t, uint32_t>>> next;
        for (const auto &r : out) {
            if (r.size() != t - 1) continue;
            for (uint32_t x = 0; x < N; ++x)
                for (uint32_t y = 0; y < N; ++y) {
                    std::pair<uint32_t, uint32_t> p{x, y};
                    if (!r.empty() && !(r.back() < p)) continue;
                    bool clash = false;
                    for (auto &q : r) clash |= q.second == y;
                    if (clash) continue;
                    auto nr = r;
                    nr.push_back(p);
                    next.push_back(nr);
                }
        }
        out.insert(out.end(), next.begin(), next.end());
    }
    return out;
}

}  // namespace

TEST(relation_state_vector, examples) {
    auto a = relation_state_vector(InjectiveRelation({{0, 1}}), 1);
    ASSERT_EQ(a.size(), 4);
    ASSERT_NEAR(a[1].real(), 1.0, 1e-15);

    // Layout |x1 x2>|y1 y2>: (1/sqrt2)(|01>|10> + |10>|01>).
    auto b = relation_state_vector(InjectiveRelation({{0, 1}, {1, 0}}), 1);
    ASSERT_NEAR(b[0b0110].real(), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR(b[0b1001].real(), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR(b.norm(), 1.0, 1e-15);
}

TEST(relation_state_vector, distinct_relations_are_orthogonal) {
    auto rels = all_relations(2, 2);
    for (size_t i = 0; i < rels.size(); ++i)
        for (size_t j = 0; j < rels.size(); ++j) {
            if (rels[i].size() != rels[j].size()) continue;
            auto a = relation_state_vector(InjectiveRelation(rels[i]), 1);
            auto b = relation_state_vector(InjectiveRelation(rels[j]), 1);
            ASSERT_NEAR(std::abs(a.dot(b)), i == j ? 1.0 : 0.0, 1e-12);
        }
}

TEST(relation_state_vector, repeated_pairs_have_unit_norm) {
    MultisetLabel m({{0, 1}, {0, 1}, {1, 1}});
    ASSERT_NEAR(relation_state_vector(m, 1).norm(), 1.0, 1e-12);
    ASSERT_THROW(InjectiveRelation({{0, 1}, {1, 1}}), std::invalid_argument);
}

TEST(label, encode_decode_round_trip) {
    std::vector<SlotValue> slots{rel({{3, 1}, {0, 2}}), SlotValue::key(5)};
    auto l = Label::encode(slots);
    auto back = l.decode();
    ASSERT_EQ(back.size(), 2u);
    ASSERT_EQ(back[0].items.size(), 2u);
    ASSERT_EQ(back[0].items[0][0], 0);
    ASSERT_EQ(back[1].key_value(), 5u);
    ASSERT_EQ(Label::encode(back), l);
    ASSERT_EQ(l.to_json().dump(), "[[[0,2],[3,1]],5]");
}

TEST(pr_apply, from_empty_relation) {
    auto s = PurifiedState::start(basis_state(2, 0), one_relation());
    auto out = pr_apply(s, "E", 0, 2);
    ASSERT_EQ(out.size(), 4u);
    for (uint32_t y = 0; y < 4; ++y) {
        auto l = Label::encode({rel({{0, y}})});
        auto it = out.terms().find(l);
        ASSERT_NE(it, out.terms().end());
        ASSERT_LE((it->second - 0.5 * basis_state(2, y).amps()).norm(), 1e-15);
    }
    ASSERT_LE((reduce(out) - 0.25 * CMat::Identity(4, 4)).norm(), 1e-15);
}

TEST(pr_apply, avoids_recorded_outputs) {
    PurifiedState s(2, one_relation());
    s.accumulate(Label::encode({rel({{1, 2}})}), basis_state(2, 3).amps());
    auto out = pr_apply(s, "E", 0, 2);
    ASSERT_EQ(out.size(), 3u);
    for (uint32_t y : {0u, 1u, 3u}) {
        auto it = out.terms().find(Label::encode({rel({{1, 2}, {3, y}})}));
        ASSERT_NE(it, out.terms().end());
        ASSERT_LE((it->second - basis_state(2, y).amps() / std::sqrt(3.0)).norm(), 1e-15);
    }
}

TEST(pr_apply, full_relation_is_an_error) {
    PurifiedState s(1, one_relation());
    s.accumulate(Label::encode({rel({{0, 0}, {1, 1}})}), basis_state(1, 0).amps());
    ASSERT_THROW(pr_apply(s, "E", 0, 1), std::domain_error);
}

TEST(pr_apply, partial_isometry_exhaustive) {
    // Images of the orthonormal inputs |x>|R> (N = 4, |R| <= 2) stay orthonormal.
    const uint32_t N = 4;
    std::vector<PurifiedState> images;
    for (const auto &r : all_relations(N, 2))
        for (uint32_t x = 0; x < N; ++x) {
            PurifiedState s(2, one_relation());
            s.accumulate(Label::encode({rel(r)}), basis_state(2, x).amps());
            images.push_back(pr_apply(s, "E", 0, 2));
        }
    double worst = 0;
    for (size_t i = 0; i < images.size(); ++i)
        for (size_t j = i; j < images.size(); ++j)
            worst = std::max(worst, std::abs(inner(images[i], images[j]) - cplx(i == j ? 1.0 : 0.0)));
    ASSERT_LE(worst, 1e-10);
}

TEST(pr_apply, agrees_with_expanded_hilbert_space) {
    // Two queries with an interleaved unitary, N = 4, one ancilla. The label engine must
    // match direct expansion of the PR formula over ordered histories.
    const int n = 2, q = 3;
    const uint32_t N = 4;
    Rng rng(21);
    auto a1 = haar_unitary(8, rng);
    auto a2 = haar_unitary(8, rng);
    CVec v0 = a1.mat().col(0);

    auto s = PurifiedState::start(StateVector(q, v0), one_relation());
    s = pr_apply(s, "E", 0, n);
    s = apply_gate(s, a2.mat(), {0, 1, 2});
    s = pr_apply(s, "E", 0, n);

    // Expanded: adversary (3 qubits) (x) relation register |x1 x2>|y1 y2> (8 qubits).
    CVec full_labels = CVec::Zero(Eigen::Index{1} << (q + 8));
    for (const auto &kv : s.terms()) {
        auto slot = kv.first.decode()[0];
        InjectiveRelation r({{slot.items[0][0], slot.items[0][1]}, {slot.items[1][0], slot.items[1][1]}});
        full_labels += Eigen::kroneckerProduct(kv.second, relation_state_vector(r, n)).eval();
    }

    CVec direct = CVec::Zero(full_labels.size());
    for (uint32_t x1 = 0; x1 < N; ++x1)
        for (uint32_t y1 = 0; y1 < N; ++y1) {
            // After query one: |y1>_A |b> with amplitude <x1 b|v0> / 2.
            CVec mid = CVec::Zero(8);
            for (int b = 0; b < 2; ++b) mid[y1 * 2 + b] = v0[x1 * 2 + b] / 2.0;
            mid = a2.mat() * mid;
            for (uint32_t x2 = 0; x2 < N; ++x2)
                for (uint32_t y2 = 0; y2 < N; ++y2) {
                    if (y2 == y1) continue;
                    CVec fin = CVec::Zero(8);
                    for (int b = 0; b < 2; ++b) fin[y2 * 2 + b] = mid[x2 * 2 + b] / std::sqrt(3.0);
                    InjectiveRelation r({{x1, y1}, {x2, y2}});
                    direct += Eigen::kroneckerProduct(fin, relation_state_vector(r, n)).eval();
                }
        }
    // Each unordered relation arises from two ordered histories, each contributing its own
    // share of the symmetric vector; the label engine sums those shares.
    ASSERT_LE((full_labels - direct).norm(), 1e-10);
}

TEST(pcfpr_apply, reduces_to_shared_collision_free_map) {
    // l = 1, lambda = n: admissible outputs are exactly the unused ones across both slots.
    std::vector<SlotSpec> two{{"E1", SlotKind::Relation, 2}, {"E2", SlotKind::Relation, 2}};
    PurifiedState s(2, two);
    s.accumulate(Label::encode({rel({{0, 1}}), rel({{2, 3}})}), basis_state(2, 2).amps());
    auto out = pcfpr_apply(s, "E1", "E2", 0, CFParams{1, 2, 2});
    ASSERT_EQ(out.size(), 2u);
    for (uint32_t y : {0u, 2u}) {
        auto it = out.terms().find(Label::encode({rel({{0, 1}, {2, y}}), rel({{2, 3}})}));
        ASSERT_NE(it, out.terms().end());
        ASSERT_NEAR(it->second.norm(), 1 / std::sqrt(2.0), 1e-15);
    }
}

TEST(pcfpr_apply, empty_relations_give_uniform_outputs) {
    std::vector<SlotSpec> two{{"E1", SlotKind::Relation, 2}, {"E2", SlotKind::Relation, 2}};
    auto s = PurifiedState::start(basis_state(2, 0), two);
    auto out = pcfpr_apply(s, "E2", "E1", 0, CFParams{1, 2, 2});
    ASSERT_EQ(out.size(), 4u);
    ASSERT_LE((reduce(out) - 0.25 * CMat::Identity(4, 4)).norm(), 1e-15);
}

TEST(pcfpr_apply, preserves_norm_on_random_inputs) {
    Rng rng(31);
    std::vector<SlotSpec> two{{"E1", SlotKind::Relation, 2}, {"E2", SlotKind::Relation, 2}};
    CFParams p{2, 2, 3};
    for (int trial = 0; trial < 100; ++trial) {
        PurifiedState s(4, two);
        // Up to two random collision-free labels carrying random amplitudes.
        for (int t = 0; t < 2; ++t) {
            uint32_t y1 = uint32_t(rng.below(8)), y2 = uint32_t(rng.below(8));
            if (y1 == y2 || !is_collision_free({y1, y2}, p)) continue;
            s.accumulate(Label::encode({rel({{uint32_t(rng.below(8)), y1}}), rel({{uint32_t(rng.below(8)), y2}})}),
                         haar_state(4, rng).amps());
        }
        if (s.size() == 0) continue;
        double before = s.norm2();
        auto out = pcfpr_apply(s, trial % 2 ? "E1" : "E2", trial % 2 ? "E2" : "E1", 1, p);
        ASSERT_NEAR(out.norm2(), before, 1e-9);
    }
}

TEST(cf_set, examples) {
    ASSERT_EQ(cf_set({0b00}, CFParams{1, 2, 2}), (BitSet{0b01, 0b10, 0b11}));
    ASSERT_EQ(cf_lower_bound(1, CFParams{1, 2, 2}), 3.0);
    ASSERT_EQ(cf_set({}, CFParams{2, 1, 3}).size(), 8u);
    ASSERT_THROW(cf_set({0, 1}, CFParams{1, 0, 2}), std::invalid_argument);
}

TEST(cf_set, definition_on_equal_size_subsets_only) {
    // {0,1,2,3} prefixes: 1-subsets distinct, but 0^1 = 2^3, so not 2-fold collision-free.
    ASSERT_TRUE(is_collision_free({0, 1, 2, 3}, CFParams{1, 2, 2}));
    ASSERT_FALSE(is_collision_free({0, 1, 2, 3}, CFParams{2, 2, 2}));
    // A single element equal to a 2-subset XOR is a mixed-size coincidence and is allowed.
    ASSERT_TRUE(is_collision_free({1, 2, 3}, CFParams{2, 2, 2}));
}

TEST(cf_set, lemma_bound_small_exhaustive) {
    for (int n = 1; n <= 4; ++n)
        for (int lambda = 0; lambda <= n; ++lambda)
            for (int ell = 1; ell <= 2; ++ell) {
                CFParams p{ell, lambda, n};
                for (uint32_t mask = 0; mask < (1U << (1U << n)); ++mask) {
                    if (__builtin_popcount(mask) > 3) continue;
                    BitSet s;
                    for (uint32_t y = 0; y < (1U << n); ++y)
                        if (mask >> y & 1U) s.push_back(y);
                    if (!is_collision_free(s, p)) continue;
                    ASSERT_GE(double(cf_set(s, p).size()), cf_lower_bound(s.size(), p));
                }
            }
}

TEST(cf_set, prefix_reduction_matches_definition) {
    // For y outside S, membership depends on prefix(y) only.
    auto check = [](const BitSet &s, const CFParams &p) {
        auto lit = cf_set(s, p);
        BitSet pre;
        for (auto y : s) pre.push_back(prefix(y, p.lambda, p.n));
        auto bad = cf_forbidden_prefixes(pre, p.ell);
        BitSet red;
        std::set<uint32_t> in(s.begin(), s.end());
        for (uint32_t y = 0; y < (1U << p.n); ++y) {
            if (in.count(y)) continue;
            if (!std::binary_search(bad.begin(), bad.end(), prefix(y, p.lambda, p.n))) red.push_back(y);
        }
        ASSERT_EQ(lit, red);
    };
    for (int n = 1; n <= 5; ++n)
        for (int lambda = 0; lambda <= n; ++lambda)
            for (int ell = 1; ell <= 2; ++ell) {
                CFParams p{ell, lambda, n};
                uint32_t N = 1U << n;
                for (uint32_t a = 0; a < N; ++a)
                    for (uint32_t b = a + 1; b <= N; ++b)
                        for (uint32_t c = b + 1; c <= N + 1; ++c) {
                            BitSet s{a};
                            if (b < N) s.push_back(b);
                            if (b < N && c < N) s.push_back(c);
                            if (c < N && b >= N) continue;
                            if (is_collision_free(s, p)) check(s, p);
                        }
            }
    Rng rng(32);
    for (int i = 0; i < 2000; ++i) {
        CFParams p{1 + int(rng.below(2)), int(rng.below(9)), 8};
        BitSet s;
        std::set<uint32_t> seen;
        size_t want = rng.below(5);
        while (s.size() < want) {
            uint32_t y = uint32_t(rng.below(256));
            if (seen.insert(y).second) s.push_back(y);
        }
        if (is_collision_free(s, p)) check(s, p);
    }
}

TEST(cf_set, monotone_under_inclusion) {
    for (int n = 2; n <= 6; ++n) {
        uint32_t N = 1U << n;
        for (auto [ell, lambda] : {std::pair{1, n}, std::pair{2, n}, std::pair{2, n - 1}, std::pair{1, n / 2}}) {
            CFParams p{ell, lambda, n};
            for (uint32_t a = 0; a < N; ++a)
                for (uint32_t b = a + 1; b < N; ++b) {
                    BitSet big{a, b};
                    if (!is_collision_free(big, p)) continue;
                    auto cb = cf_set(big, p);
                    for (const BitSet &small : {BitSet{}, BitSet{a}, BitSet{b}}) {
                        auto cs = cf_set(small, p);
                        ASSERT_TRUE(std::includes(cs.begin(), cs.end(), cb.begin(), cb.end()));
                    }
                }
        }
    }
}

TEST(corx, examples) {
    auto c = corx({{0, 1}, {2, 0}}, 3);
    ASSERT_EQ(c.size(), 1u);
    ASSERT_EQ(c[0].first, (std::pair<uint32_t, uint32_t>{0, 1}));
    ASSERT_EQ(c[0].second, (std::pair<uint32_t, uint32_t>{2, 0}));
    ASSERT_TRUE(corx({}, 1).empty());
    // Diagonal: (u,v) with v xor u = k pairs with itself.
    ASSERT_EQ(corx({{1, 2}}, 3).size(), 1u);
}

TEST(good_keys, examples) {
    ASSERT_EQ(good_keys({}, 0, 2, 2).size(), 4u);
    ASSERT_TRUE(good_keys({}, 1, 2, 2).empty());
}

TEST(good_keys, correlated_pair_claim_small) {
    // N = 4, t = 2, l = 1: G-query (x_a, z, z^k, y_a) and one U-query (x_b, y_b).
    const uint32_t N = 4;
    for (uint32_t xa = 0; xa < N; ++xa)
        for (uint32_t xb = 0; xb < N; ++xb)
            for (uint32_t ya = 0; ya < N; ++ya)
                for (uint32_t yb = 0; yb < N; ++yb) {
                    if (ya == yb) continue;
                    for (uint32_t z = 0; z < N; ++z) {
                        if (z == ya || z == yb) continue;
                        for (uint32_t k = 0; k < N; ++k) {
                            std::vector<std::pair<uint32_t, uint32_t>> r{{xa, z}, {z ^ k, ya}, {xb, yb}};
                            bool good = corx(r, k).size() == 1;
                            std::set<uint32_t> bad;
                            for (auto x : {xa, xb}) {
                                for (auto y : {ya, yb}) bad.insert(x ^ y);
                                bad.insert(x ^ z);
                            }
                            ASSERT_EQ(good, !bad.count(k));
                        }
                    }
                }
}

TEST(project_good, trivial_predicates) {
    Rng rng(33);
    auto s = pr_apply(PurifiedState::start(haar_state(2, rng), one_relation()), "E", 0, 2);
    auto all = project_good(s, [](const auto &) { return true; });
    ASSERT_NEAR(all.norm2(), s.norm2(), 1e-15);
    ASSERT_EQ(project_good(s, [](const auto &) { return false; }).size(), 0u);
    auto half = project_good(s, [](const std::vector<SlotValue> &l) { return l[0].items[0][1] < 2; });
    ASSERT_NEAR(half.norm2(), 0.5, 1e-12);
}

namespace {

// Random purified state with slots (E, K): relation sizes 0..3 over N = 4 and 4 keys.
PurifiedState random_keyed_state(Rng &rng) {
    std::vector<SlotSpec> schema{{"E", SlotKind::Relation, 2}, {"K", SlotKind::Key, 1}};
    PurifiedState s(2, schema);
    for (int i = 0; i < 6; ++i) {
        std::vector<std::pair<uint32_t, uint32_t>> r;
        std::set<uint32_t> used;
        size_t size = rng.below(4);
        while (r.size() < size) {
            uint32_t y = uint32_t(rng.below(4));
            if (used.insert(y).second) r.emplace_back(uint32_t(rng.below(4)), y);
        }
        s.accumulate(Label::encode({rel(r), SlotValue::key(uint32_t(rng.below(4)))}),
                     CVec(haar_state(2, rng).amps() / std::sqrt(6.0)));
    }
    return s;
}

}  // namespace

TEST(label_rewrite, identity_and_invisibility) {
    Rng rng(34);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = random_keyed_state(rng);
        auto same = label_rewrite(s, s.schema(), [](const auto &l) { return l; });
        ASSERT_EQ(same.size(), s.size());
        ASSERT_NEAR(std::abs(inner(same, s) - cplx(s.norm2())), 0, 1e-15);

        auto schema = s.schema();
        schema.push_back(SlotSpec{"E2", SlotKind::Relation, 2});
        auto split = label_rewrite(s, schema, rewrites::partition_by_key(0, 1, 2, 2));
        ASSERT_LE((reduce(split) - reduce(s)).norm(), 1e-12);
        ASSERT_NEAR(split.norm2(), s.norm2(), 1e-12);

        auto back = label_rewrite(split, s.schema(), rewrites::merge_slots(0, 2));
        ASSERT_EQ(back.size(), s.size());
        for (const auto &kv : s.terms()) {
            auto it = back.terms().find(kv.first);
            ASSERT_NE(it, back.terms().end());
            ASSERT_EQ(it->second, kv.second);
        }
    }
}

TEST(label_rewrite, detects_collisions) {
    std::vector<SlotSpec> schema{{"E", SlotKind::Relation, 2}};
    PurifiedState s(1, schema);
    s.accumulate(Label::encode({rel({{0, 1}})}), basis_state(1, 0).amps());
    s.accumulate(Label::encode({rel({{1, 1}})}), basis_state(1, 1).amps());
    auto forget_input = [](const std::vector<SlotValue> &l) {
        auto out = l;
        for (auto &t : out[0].items) t[0] = 0;
        return out;
    };
    ASSERT_THROW(label_rewrite(s, schema, forget_input), NonInjectiveRewrite);
}

TEST(label_rewrite, pair_and_injection_round_trip) {
    // Label {(x,z), (z^k, y)} with key k, as produced by one G-query.
    std::vector<SlotSpec> schema{{"E", SlotKind::Relation, 2}, {"K", SlotKind::Key, 1}};
    PurifiedState s(2, schema);
    uint32_t x = 1, z = 2, k = 3, y = 0;
    s.accumulate(Label::encode({rel({{x, z}, {z ^ k, y}}), SlotValue::key(k)}), basis_state(2, 1).amps());

    auto sch2 = schema;
    sch2.push_back({"F", SlotKind::Relation, 2});
    auto a = label_rewrite(s, sch2, rewrites::partition_by_key(0, 1, 2, 2));
    auto sch3 = sch2;
    sch3.push_back({"S", SlotKind::Relation, 2});
    auto b = label_rewrite(a, sch3, rewrites::partition_by_partner(0, 2, 1, 2, 2));
    auto l = b.terms().begin()->first.decode();
    ASSERT_TRUE(l[0].items.empty());
    ASSERT_EQ(l[2].items.size(), 1u);
    ASSERT_EQ(l[3].items.size(), 1u);

    std::vector<SlotSpec> sch4{{"E", SlotKind::Relation, 2}, {"K", SlotKind::Key, 1}, {"P", SlotKind::Multiset, 4}};
    auto c = label_rewrite(b, sch4, rewrites::pair_multisets(2, 3, 1, 2, 2));
    auto sch5 = sch4;
    sch5[2].arity = 3;
    auto d = label_rewrite(c, sch5, rewrites::apply_injection(2, 1, 2, 2));
    auto triple = d.terms().begin()->first.decode()[2].items[0];
    ASSERT_EQ(triple[0], x);
    ASSERT_EQ(triple[1], z);
    ASSERT_EQ(triple[2], y);
    ASSERT_NEAR(d.norm2(), 1.0, 1e-12);

    auto e = label_rewrite(d, sch4, rewrites::unapply_injection(2, 1, 2, 2));
    auto f = label_rewrite(e, sch3, rewrites::unpair_multisets(2, 3));
    auto g = label_rewrite(f, sch2, rewrites::merge_slots(0, 3));
    auto h = label_rewrite(g, schema, rewrites::merge_slots(0, 2));
    ASSERT_EQ(h.terms().begin()->first, s.terms().begin()->first);
}

TEST(purified_state, memory_cap) {
    auto s = PurifiedState::start(basis_state(2, 0), one_relation(), 8);
    ASSERT_THROW(pr_apply(s, "E", 0, 2), MemoryCapExceeded);
}

TEST(purified_state, json_serialization) {
    PurifiedState s(1, one_relation());
    s.accumulate(Label::encode({rel({{0, 1}})}), basis_state(1, 1).amps());
    auto j = s.to_json();
    ASSERT_EQ(j.dump(),
              R"({"adv_qubits":1,"schema":[{"arity":2,"kind":"relation","name":"E"}],)"
              R"("terms":[{"amplitudes":[[0.0,0.0],[1.0,0.0]],"label":[[[0,1]]]}]})");
}

TEST(key_ops, pauli_and_superposition) {
    auto s = PurifiedState::start(basis_state(2, 0), one_relation());
    auto k = add_key_superposition(s, "K", 4);
    ASSERT_EQ(k.size(), 4u);
    auto x = apply_key_pauli(k, "K", PauliKind::X, 2, 0, 2);
    // Each key branch now holds |k>, so the view is maximally mixed.
    ASSERT_LE((reduce(x) - 0.25 * CMat::Identity(4, 4)).norm(), 1e-15);
}
