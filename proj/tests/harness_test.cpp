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

#include <cmath>
#include <set>

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace qhro;

namespace {

double max_abs(const CMat &m) { return m.cwiseAbs().maxCoeff(); }

PrSetup bare_pr(const std::string &oracle, int n, std::vector<std::string> slots = {"E"}) {
    PrSetup s;
    for (const auto &name : slots) s.slots.push_back(SlotSpec{name, SlotKind::Relation, 2});
    s.oracles[oracle] = PrOracle{bare_oracle("U", n), {{"U", PrBase{slots.front()}}}, {}};
    return s;
}

BindingSampler haar_sampler(const std::string &oracle, int n) {
    return [=](Rng &rng) {
        ConcreteBindings b;
        b.emplace(oracle, ConcreteOracle{bare_oracle("U", n), {{"U", {haar_unitary(Eigen::Index{1} << n, rng)}}}, {}});
        return b;
    };
}

std::vector<size_t> relation_sizes(const PurifiedState &s, int slot) {
    std::vector<size_t> out;
    for (const auto &kv : s.terms()) out.push_back(kv.first.slot(slot).items.size());
    return out;
}

}  // namespace

TEST(run_concrete, examples) {
    Rng rng(1);
    auto a = haar_unitary(4, rng);
    AdversaryProgram p;
    p.n = 1;
    p.m_anc = 1;
    p.steps.push_back(Interleave{a.mat(), {}});
    auto out = run_concrete(p, std::map<std::string, UnitaryMatrix>{});
    EXPECT_LE((out.amps() - a.mat().col(0)).norm(), 1e-12);

    auto one = program_parallel_zero(1, 1, "O");
    auto id = run_concrete(one, {{"O", UnitaryMatrix::identity(1)}});
    EXPECT_NEAR(std::abs(id[0]), 1.0, 1e-12);

    AdversaryProgram twice;
    twice.n = 1;
    twice.steps = {Interleave{CMat::Identity(2, 2), {}}, QuantumQuery{"O"}, Interleave{CMat::Identity(2, 2), {}},
                   QuantumQuery{"O"}};
    twice.declared = {{"O", 2}};
    auto x = run_concrete(twice, {{"O", pauli_string(PauliKind::X, 1, 1, 1)}});
    EXPECT_NEAR(std::abs(x[0]), 1.0, 1e-12);
}

TEST(run_concrete, errors) {
    auto p = program_parallel_zero(2, 2, "O");
    EXPECT_THROW(run_concrete(p, std::map<std::string, UnitaryMatrix>{}), std::invalid_argument);
    EXPECT_THROW(run_concrete(p, {{"O", UnitaryMatrix::identity(3)}}), std::invalid_argument);

    AdversaryProgram no_interleave;
    no_interleave.n = 1;
    no_interleave.steps = {QuantumQuery{"O"}};
    no_interleave.declared = {{"O", 1}};
    EXPECT_THROW(no_interleave.validate(), std::invalid_argument);

    auto miscounted = p;
    miscounted.declared["O"] = 3;
    EXPECT_THROW(miscounted.validate(), std::invalid_argument);
}

TEST(run_pr, single_query_gives_maximally_mixed_view) {
    for (int n = 1; n <= 3; ++n) {
        auto s = run_pr(program_parallel_zero(n, 1, "O"), bare_pr("O", n));
        auto v = reduce_view(s);
        const double N = std::pow(2.0, n);
        EXPECT_LE(max_abs(v.reduced.mat() - CMat::Identity(1 << n, 1 << n) / N), 1e-12);
        EXPECT_EQ(v.labels, static_cast<size_t>(N));
        EXPECT_NEAR(v.mass, 1.0, 1e-12);
        EXPECT_NEAR(v.mass_by_size.at(1), 1.0, 1e-12);
    }
}

TEST(run_pr, relation_grows_by_one_per_query) {
    auto s = run_pr(program_parallel_zero(2, 2, "O"), bare_pr("O", 2));
    for (auto sz : relation_sizes(s, 0)) EXPECT_EQ(sz, 2U);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
}

TEST(run_pr, two_query_construction_records_two_pairs_per_call) {
    PrSetup setup;
    setup.slots = {SlotSpec{"E", SlotKind::Relation, 2}};
    setup.keys = {{"k", 2}};
    setup.oracles["G"] = PrOracle{pru_two_query(2, 2), {{"U", PrBase{"E"}}}, {}};
    AdversaryProgram p = program_random(2, 0, {"G", "G"}, 11);
    auto s = run_pr(p, setup);
    for (auto sz : relation_sizes(s, 0)) EXPECT_EQ(sz, 4U);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-10);
}

TEST(run_pr, norm_is_preserved_on_random_programs) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto p = program_random(2, 1, {"O", "O", "O"}, seed);
        auto s = run_pr(p, bare_pr("O", 2));
        EXPECT_NEAR(s.norm2(), 1.0, 1e-9) << "seed " << seed;
        auto v = reduce_view(s);
        EXPECT_NEAR(v.reduced.trace(), v.mass, 1e-9);
    }
}

TEST(run_pr, relabeling_is_invisible_to_the_view) {
    // y -> y xor 1 on every recorded output is injective on labels, so the view is unchanged.
    for (uint64_t seed = 0; seed < 50; ++seed) {
        auto p = program_random(2, 0, {"O", "O"}, 100 + seed);
        auto s = run_pr(p, bare_pr("O", 2));
        auto r = label_rewrite(s, s.schema(), [](const std::vector<SlotValue> &slots) {
            auto out = slots;
            for (auto &t : out[0].items) t[1] ^= 1;
            out[0].canonicalize();
            return out;
        });
        ASSERT_LE(max_abs(reduce(s) - reduce(r)), 1e-12);
    }
}

TEST(run_pr, fixed_bases_act_as_gates) {
    PrSetup setup;
    auto x = pauli_string(PauliKind::X, 1, 1, 1);
    setup.oracles["O"] = PrOracle{bare_oracle("U", 1), {}, {{"U", x}}};
    auto s = run_pr(program_parallel_zero(1, 1, "O"), setup);
    auto v = reduce_view(s);
    EXPECT_NEAR(v.reduced.mat()(1, 1).real(), 1.0, 1e-12);
}

TEST(reduce_view, examples) {
    std::vector<SlotSpec> schema{SlotSpec{"E", SlotKind::Relation, 2}};
    auto single = PurifiedState::start(basis_state(1, 1), schema);
    auto v = reduce_view(single);
    EXPECT_NEAR(v.reduced.mat()(1, 1).real(), 1.0, 1e-12);
    EXPECT_EQ(v.labels, 1U);

    PurifiedState two(1, schema);
    SlotValue a = SlotValue::empty(schema[0]);
    SlotValue b = a;
    b.insert(Tuple{0, 1, 0, 0});
    two.accumulate(Label::encode({a}), basis_state(1, 0).amps() / std::sqrt(2.0));
    two.accumulate(Label::encode({b}), basis_state(1, 1).amps() / std::sqrt(2.0));
    auto w = reduce_view(two);
    EXPECT_LE(max_abs(w.reduced.mat() - CMat::Identity(2, 2) / 2.0), 1e-12);
    EXPECT_NEAR(w.mass_by_size[0], 0.5, 1e-12);
    EXPECT_NEAR(w.mass_by_size[1], 0.5, 1e-12);
}

TEST(classical_query, basis_input_appends_the_generator_output) {
    // Registers: input w (1 qubit) | transcript (1) | answer (3).
    const int n = 3, lambda = 1, m_in = 1;
    Rng rng(2);
    auto u = haar_unitary(8, rng);
    ConcreteBindings b;
    b.emplace("F", ConcreteOracle{prfs_generator(n, lambda, m_in), {{"U", {u}}}, {{"k", 1}}});
    for (uint32_t w = 0; w < 2; ++w) {
        AdversaryProgram p;
        p.n = n;
        p.m_anc = 2;
        p.steps = {Interleave{w ? pauli_string(PauliKind::X, 1, 1, 1).mat() : CMat(CMat::Identity(2, 2)), {0}},
                   ClassicalQuery{"F", 0, 1, 1, 2}};
        p.declared = {{"F", 1}};
        auto out = run_concrete(p, b);
        auto expect = tensor(tensor(basis_state(1, w), basis_state(1, w)), prfs_output(u, 1, w, n, lambda, m_in));
        EXPECT_NEAR(fidelity(out, expect), 1.0, 1e-12);
    }
}

TEST(classical_query, superposed_input_splits_transcript_mass) {
    AdversaryProgram p;
    p.n = 1;
    p.m_anc = 2;
    p.steps = {Interleave{hadamard_gate(), {0}}, ClassicalQuery{"O", 0, 1, 1, 2}};
    p.declared = {{"O", 1}};
    auto out = run_concrete(p, {{"O", UnitaryMatrix::identity(1)}});
    auto rho = reduced_state(out, {1});
    EXPECT_LE(max_abs(rho.mat() - CMat::Identity(2, 2) / 2.0), 1e-12);
}

TEST(classical_query, transcript_overflow) {
    AdversaryProgram p;
    p.n = 1;
    p.m_anc = 2;
    p.steps = {Interleave{CMat::Identity(2, 2), {0}}, ClassicalQuery{"O", 0, 1, 1, 2}, ClassicalQuery{"O", 0, 1, 1, 2}};
    p.declared = {{"O", 2}};
    // Input 0 leaves the transcript at |0>, so reuse is allowed; a written transcript is not.
    EXPECT_NO_THROW(run_concrete(p, {{"O", UnitaryMatrix::identity(1)}}));
    p.steps[0] = Interleave{pauli_string(PauliKind::X, 1, 1, 1).mat(), {0}};
    EXPECT_THROW(run_concrete(p, {{"O", UnitaryMatrix::identity(1)}}), std::invalid_argument);
    PrSetup setup = bare_pr("O", 1);
    EXPECT_THROW(run_pr(p, setup), std::invalid_argument);
}

TEST(classical_query, per_input_slots_answer_without_replacement) {
    // Two classical queries on the same w = 1 record into that input's slot with distinct outputs.
    const int n = 2;
    PrSetup setup;
    setup.slots = {SlotSpec{"E0", SlotKind::Relation, 2}, SlotSpec{"E1", SlotKind::Relation, 2}};
    PrBase base;
    base.slot_by_control = {"E0", "E1"};
    setup.oracles["F"] = PrOracle{bare_oracle("U", n), {{"U", base}}, {}};
    AdversaryProgram p;
    p.n = n;
    p.m_anc = 3 + n;  // w | two transcripts | two answer blocks (the second is the oracle register)
    p.steps = {Interleave{pauli_string(PauliKind::X, 1, 1, 1).mat(), {0}}, ClassicalQuery{"F", 0, 1, 1, 3},
               ClassicalQuery{"F", 0, 1, 2, 3 + n}};
    p.declared = {{"F", 2}};
    auto s = run_pr(p, setup);
    EXPECT_NEAR(s.norm2(), 1.0, 1e-12);
    for (const auto &kv : s.terms()) {
        auto slots = kv.first.decode();
        EXPECT_TRUE(slots[0].items.empty());
        ASSERT_EQ(slots[1].items.size(), 2U);
        EXPECT_NE(slots[1].items[0][1], slots[1].items[1][1]);
    }
}

TEST(haar_view_mc, fixed_unitary_is_exact_with_zero_noise) {
    Rng rng(3);
    auto u = haar_unitary(4, rng);
    BindingSampler fixed = [&](Rng &) {
        ConcreteBindings b;
        b.emplace("O", ConcreteOracle{bare_oracle("U", 2), {{"U", {u}}}, {}});
        return b;
    };
    auto p = program_parallel_zero(2, 1, "O");
    auto mc = haar_view_mc({p}, fixed, McOptions{200, 5, 2, 50});
    CVec col = u.mat().col(0);
    CMat exact = col * col.adjoint();
    auto est = td_estimate(mc, exact, 1);
    EXPECT_LE(est.td, 1e-12);
    EXPECT_LE(est.stderr, 1e-12);
}

TEST(haar_view_mc, independent_trials) {
    auto p = program_parallel_zero(1, 1, "O");
    auto one = haar_view_mc({p}, haar_sampler("O", 1), McOptions{1, 9, 1, 50});
    auto two = haar_view_mc({p}, haar_sampler("O", 1), McOptions{2, 9, 1, 50});
    EXPECT_GT(max_abs(one.mean - two.mean), 1e-6);
    EXPECT_EQ(one.batch_means.size(), 1U);
}

TEST(haar_view_mc, result_is_independent_of_jobs) {
    auto p = program_random(2, 1, {"O", "O"}, 4);
    auto a = haar_view_mc({p}, haar_sampler("O", 2), McOptions{400, 17, 1, 50});
    auto b = haar_view_mc({p}, haar_sampler("O", 2), McOptions{400, 17, 4, 50});
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(td_estimate(a, b.mean, 3).stderr, td_estimate(b, a.mean, 3).stderr);
}

TEST(haar_view_mc, two_query_view_within_path_recording_bound) {
    const int n = 2, t = 2;
    auto p = program_random(n, 1, {"O", "O"}, 21);
    auto mc = haar_view_mc({p}, haar_sampler("O", n), McOptions{20000, 1, 0, 50});
    auto pr = reduce_view(run_pr(p, bare_pr("O", n)));
    auto est = td_estimate(mc, pr.reduced.mat(), 2);
    const double N = 4;
    EXPECT_LE(est.td, 2.0 * t * (t - 1) / (N + 1) + 3 * est.stderr);
    EXPECT_GT(est.stderr, 0.0);
}

TEST(haar_view_mc, one_copy_prs_matches_path_recording) {
    const int n = 2, lambda = 1;
    PrSetup setup;
    setup.slots = {SlotSpec{"E", SlotKind::Relation, 2}};
    setup.keys = {{"k", lambda}};
    setup.oracles["G"] = PrOracle{prs_generator(n, lambda), {{"U", PrBase{"E"}}}, {}};
    auto p = program_parallel_zero(n, 1, "G");
    auto pr = reduce_view(run_pr(p, setup));
    BindingSampler sampler = [&](Rng &rng) {
        ConcreteBindings b;
        auto u = haar_unitary(4, rng);
        b.emplace("G", ConcreteOracle{prs_generator(n, lambda), {{"U", {u}}}, {{"k", uint32_t(rng.below(2))}}});
        return b;
    };
    auto mc = haar_view_mc({p}, sampler, McOptions{10000, 4, 0, 50});
    auto est = td_estimate(mc, pr.reduced.mat(), 5);
    EXPECT_LE(est.td, 2.0 * 1 * 0 / 5.0 + 3 * est.stderr + 1e-12);
}

TEST(program_library, xor_compare_and_swap) {
    auto p = program_xor_compare(2, "O");
    EXPECT_EQ(p.view_qubits(), 2);
    auto out = run_concrete(p, {{"O", UnitaryMatrix::identity(2)}});
    EXPECT_NEAR(std::abs(out[0]), 1.0, 1e-12);

    auto sw = controlled_swap(0, 1, 2, 1);
    AdversaryProgram q;
    q.n = 1;
    q.m_anc = 2;
    q.steps = {Interleave{pauli_string(PauliKind::X, 0b101, 3, 3).mat(), {}}, sw};
    auto r = run_concrete(q, std::map<std::string, UnitaryMatrix>{});
    EXPECT_NEAR(std::abs(r[0b110]), 1.0, 1e-12);

    auto f = fourier_gate(2);
    EXPECT_LE(unitarity_defect(f), 1e-12);
    auto padded = pad_dummy_queries(program_parallel_zero(1, 1, "O"), "O", 2, 0);
    EXPECT_EQ(padded.declared.at("O"), 3);
    EXPECT_EQ(program_fourier(2, 0, {"O"}).query_counts().at("O"), 1);
    EXPECT_FALSE(p.to_json()["steps"].empty());
}

TEST(parallel_for, propagates_errors_and_covers_every_index) {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](int i) { hits[static_cast<size_t>(i)]++; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](int i) {
                     if (i == 7) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}
