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

#include <unsupported/Eigen/KroneckerProduct>

#include "gtest/gtest.h"

#include "test_util.hpp"

using namespace qhro;

namespace {

double max_abs(const CMat &m) { return m.cwiseAbs().maxCoeff(); }

UnitaryMatrix hadamard_u() { return UnitaryMatrix(1, qhro::testing::hadamard()); }

}  // namespace

TEST(pru_two_query, zero_key_is_u_squared) {
    Rng rng(1);
    for (int n = 1; n <= 3; ++n) {
        auto u = haar_unitary(Eigen::Index{1} << n, rng);
        auto g = instantiate(pru_two_query(n, n), {{"U", u}}, {{"k", 0}});
        EXPECT_LE(max_abs(g.mat() - u.mat() * u.mat()), 1e-12);
    }
}

TEST(pru_two_query, hadamard_conjugates_x_to_z) {
    auto g = instantiate(pru_two_query(1, 1), {{"U", hadamard_u()}}, {{"k", 1}});
    EXPECT_LE(max_abs(g.mat() - pauli_string(PauliKind::Z, 1, 1, 1).mat()), 1e-12);
}

TEST(pru_two_query, unitary_for_every_key) {
    Rng rng(2);
    for (int n = 1; n <= 3; ++n) {
        for (int s = 0; s < 50; ++s) {
            auto u = haar_unitary(Eigen::Index{1} << n, rng);
            for (uint32_t k = 0; k < (1U << n); ++k) {
                auto g = instantiate(pru_two_query(n, n), {{"U", u}}, {{"k", k}});
                ASSERT_LE(unitarity_defect(g.mat()), 1e-10);
            }
        }
    }
}

TEST(pru_two_query, key_occupies_the_prefix) {
    // With lambda < n the key flips only the leading bits.
    auto g = instantiate(pru_two_query(3, 1), {{"U", UnitaryMatrix::identity(3)}}, {{"k", 1}});
    EXPECT_LE(max_abs(g.mat() - pauli_string(PauliKind::X, 1, 1, 3).mat()), 1e-12);
    EXPECT_NEAR(std::abs(g.mat()(4, 0)), 1.0, 1e-12);
}

TEST(pru_one_query, examples) {
    Rng rng(3);
    auto u = haar_unitary(4, rng);
    auto g0 = instantiate(pru_one_query(2, 2), {{"U", u}}, {{"k", 0}});
    EXPECT_LE(max_abs(g0.mat() - u.mat()), 1e-12);

    CMat zh(2, 2);
    zh << 1, 1, -1, 1;
    zh /= std::sqrt(2.0);
    auto g1 = instantiate(pru_one_query(1, 1), {{"U", hadamard_u()}}, {{"k", 1}});
    EXPECT_LE(max_abs(g1.mat() - zh), 1e-12);
}

TEST(pru_one_query, choi_states_of_distinct_keys_are_orthogonal) {
    auto id = UnitaryMatrix::identity(1);
    auto c0 = choi_state(instantiate(pru_one_query(1, 1), {{"U", id}}, {{"k", 0}}));
    auto c1 = choi_state(instantiate(pru_one_query(1, 1), {{"U", id}}, {{"k", 1}}));
    EXPECT_NEAR(fidelity(c0, c1), 0.0, 1e-12);
}

TEST(prs_generator, identity_gives_key_prefix) {
    for (uint32_t k = 0; k < 4; ++k) {
        auto s = prs_output(UnitaryMatrix::identity(3), k, 3, 2);
        EXPECT_NEAR(std::abs(s[k << 1]), 1.0, 1e-12);
    }
    auto a = prs_output(UnitaryMatrix::identity(3), 1, 3, 2);
    auto b = prs_output(UnitaryMatrix::identity(3), 2, 3, 2);
    EXPECT_NEAR(fidelity(a, b), 0.0, 1e-12);
}

TEST(prs_generator, unit_norm_under_haar) {
    Rng rng(4);
    auto u = haar_unitary(16, rng);
    for (uint32_t k = 0; k < 4; ++k) EXPECT_NEAR(prs_output(u, k, 4, 2).norm(), 1.0, 1e-12);
}

TEST(prfs_generator, examples) {
    auto s = prfs_output(UnitaryMatrix::identity(3), 1, 0, 3, 1, 1);
    EXPECT_NEAR(std::abs(s[0b100]), 1.0, 1e-12);
    auto t = prfs_output(UnitaryMatrix::identity(3), 0, 1, 3, 1, 1);
    EXPECT_NEAR(std::abs(t[0b010]), 1.0, 1e-12);

    std::vector<StateVector> outs;
    for (uint32_t k = 0; k < 2; ++k)
        for (uint32_t w = 0; w < 2; ++w) outs.push_back(prfs_output(UnitaryMatrix::identity(3), k, w, 3, 1, 1));
    for (size_t i = 0; i < outs.size(); ++i)
        for (size_t j = i + 1; j < outs.size(); ++j) EXPECT_NEAR(fidelity(outs[i], outs[j]), 0.0, 1e-12);

    Rng rng(5);
    auto u = haar_unitary(8, rng);
    EXPECT_NEAR(prfs_output(u, 1, 1, 3, 1, 1).norm(), 1.0, 1e-12);
}

TEST(spru, zero_keys_square_each_block) {
    Rng rng(6);
    auto u = haar_unitary(4, rng);
    auto g = instantiate(spru(2, 1, 1), {{"U", u}}, {{"k1", 0}, {"k2", 0}});
    CMat u2 = u.mat() * u.mat();
    CMat ab = Eigen::kroneckerProduct(u2, CMat::Identity(2, 2)).eval();
    CMat bc = Eigen::kroneckerProduct(CMat::Identity(2, 2), u2).eval();
    EXPECT_LE(max_abs(g.mat() - bc * ab), 1e-12);
}

TEST(spru, unitary_on_the_joint_register) {
    Rng rng(7);
    for (int s = 0; s < 20; ++s) {
        auto u = haar_unitary(4, rng);
        auto g = instantiate(spru(2, 1, 1), {{"U", u}}, {{"k1", uint32_t(s & 1)}, {"k2", uint32_t((s >> 1) & 1)}});
        EXPECT_EQ(g.qubits(), 3);
        EXPECT_LE(unitarity_defect(g.mat()), 1e-10);
    }
}

TEST(glued_second_moment, within_gluing_bound) {
    // Lemma bound 5k^2/2^{|B|} with k = 2 on the operator distance; Frobenius dominates it.
    Rng rng(8);
    for (int overlap : {1, 2}) {
        auto e = glued_second_moment(3, overlap, 4000, rng);
        double bound = 5.0 * 4.0 / std::pow(2.0, overlap);
        EXPECT_LE(e.frobenius_distance, bound) << "overlap " << overlap;
        EXPECT_GT(e.frame_potential, 1.0);
    }
}

TEST(haar_moment2, is_a_projector_of_rank_two) {
    for (Eigen::Index d : {2, 3, 4}) {
        CMat m = haar_moment2(d);
        EXPECT_LE(max_abs(m * m - m), 1e-12);
        EXPECT_NEAR(m.trace().real(), 2.0, 1e-12);
    }
}

TEST(haar_moment2, matches_monte_carlo) {
    // E[U (x) U (x) conj(U) (x) conj(U)] in the row-major vec convention of the twirl.
    Rng rng(9);
    const Eigen::Index d = 2, d2 = 4;
    CMat acc = CMat::Zero(d2 * d2, d2 * d2);
    const int M = 20000;
    for (int i = 0; i < M; ++i) {
        CMat u = haar_unitary(d, rng).mat();
        CMat uu = Eigen::kroneckerProduct(u, u).eval();
        acc += Eigen::kroneckerProduct(uu, uu.conjugate()).eval();
    }
    acc /= M;
    EXPECT_LE(max_abs(acc - haar_moment2(d)), 0.03);
}

TEST(descriptor, validation_errors) {
    EXPECT_THROW(pru_two_query(2, 3), std::invalid_argument);
    EXPECT_THROW(pru_two_query(2, 0), std::invalid_argument);
    EXPECT_THROW(prfs_generator(3, 2, 2), std::invalid_argument);
    EXPECT_THROW(spru(2, 2, 1), std::invalid_argument);
    OracleDescriptor d{"bad", 2, {OracleCall{"U", 1, 2}}, {}};
    EXPECT_THROW(validate(d), std::invalid_argument);
    EXPECT_THROW(instantiate(bare_oracle("U", 2), {}, {}), std::invalid_argument);
}

TEST(descriptor, json_lists_ops_in_order) {
    auto j = pru_two_query(2, 2).to_json();
    ASSERT_EQ(j["ops"].size(), 3U);
    EXPECT_EQ(j["ops"][1]["op"], "key_shift");
    EXPECT_EQ(pru_two_query(2, 2).calls().at("U"), 2);
}
