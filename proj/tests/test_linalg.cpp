/*
 Copyright 2026 The ctwillems Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>

#include "ctwillems/linalg.hpp"
#include "oracles.hpp"

using ctwillems::Matrix;
using ctwillems::Vector;

namespace {

double penrose_violation(const Matrix& M, const Matrix& P) {
    const double scale = std::max(1.0, M.norm());
    double worst = 0.0;
    worst = std::max(worst, (M * P * M - M).norm() / scale);
    worst = std::max(worst, (P * M * P - P).norm() / std::max(1.0, P.norm()));
    worst = std::max(worst, ((M * P).transpose() - M * P).norm() / std::max(1.0, (M * P).norm()));
    worst = std::max(worst, ((P * M).transpose() - P * M).norm() / std::max(1.0, (P * M).norm()));
    return worst;
}

}  // namespace

TEST_CASE("matrix exponential closed forms") {
    SECTION("zero matrix") {
        const Matrix E = ctwillems::matrix_exponential(Matrix::Zero(2, 2), 1.0);
        CHECK((E - Matrix::Identity(2, 2)).norm() == 0.0);
    }
    SECTION("nilpotent series terminates") {
        Matrix A(2, 2);
        A << 0, 1, 0, 0;
        const double T = 0.37;
        const Matrix E = ctwillems::matrix_exponential(A, T);
        Matrix expected(2, 2);
        expected << 1, T, 0, 1;
        CHECK((E - expected).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("scalar decay") {
        Matrix A(1, 1);
        A << -1.0;
        const Matrix E = ctwillems::matrix_exponential(A, 1.0);
        CHECK(E(0, 0) == Catch::Approx(0.36787944117144233).epsilon(1e-13));
    }
    SECTION("non-square rejected") {
        CHECK_THROWS_AS(ctwillems::matrix_exponential(Matrix::Zero(2, 3), 1.0), ctwillems::DimensionError);
    }
}

TEST_CASE("matrix exponential matches Taylor oracle") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Matrix A = oracles::random_matrix(4, 4, seed);
        const Matrix E = ctwillems::matrix_exponential(A, 0.5);
        const Matrix ref = oracles::taylor_expm(A, 0.5);
        CHECK((E - ref).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("matrix exponential semigroup and nonsingularity") {
    for (std::uint64_t seed = 5; seed < 13; ++seed) {
        const Matrix A = oracles::random_matrix(3, 3, seed);
        const double s = 0.4, t = 1.1;
        const Matrix Es = ctwillems::matrix_exponential(A, s);
        const Matrix Et = ctwillems::matrix_exponential(A, t);
        const Matrix Est = ctwillems::matrix_exponential(A, s + t);
        CHECK((Es * Et - Est).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(ctwillems::numerical_rank(Et) == 3);
        // inverse flow: e^{A t} e^{-A t} = I
        const Matrix Eneg = ctwillems::matrix_exponential(A, -t);
        CHECK((Et * Eneg - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pseudoinverse basics") {
    SECTION("identity") {
        const Matrix P = ctwillems::pseudoinverse(Matrix::Identity(3, 3));
        CHECK((P - Matrix::Identity(3, 3)).norm() < 1e-14);
    }
    SECTION("diagonal with zero") {
        Matrix M(2, 2);
        M << 2, 0, 0, 0;
        const Matrix P = ctwillems::pseudoinverse(M);
        Matrix expected(2, 2);
        expected << 0.5, 0, 0, 0;
        CHECK((P - expected).norm() < 1e-14);
    }
    SECTION("full row rank: right inverse, cross-checked with normal equations") {
        const Matrix M = oracles::random_matrix(3, 7, 42);
        const Matrix P = ctwillems::pseudoinverse(M);
        CHECK((M * P - Matrix::Identity(3, 3)).norm() < 1e-9);
        const Matrix P_ne = M.transpose() * (M * M.transpose()).inverse();
        CHECK((P - P_ne).norm() < 1e-9);
    }
}

TEST_CASE("pseudoinverse satisfies Penrose identities on all rank profiles") {
    for (std::uint64_t seed = 100; seed < 108; ++seed) {
        const Matrix wide = oracles::random_matrix(3, 6, seed);
        const Matrix tall = oracles::random_matrix(6, 3, seed + 1000);
        // rank-deficient 5x5 of rank 2
        const Matrix low = oracles::random_matrix(5, 2, seed + 2000) *
                           oracles::random_matrix(2, 5, seed + 3000);
        CHECK(penrose_violation(wide, ctwillems::pseudoinverse(wide)) < 1e-9);
        CHECK(penrose_violation(tall, ctwillems::pseudoinverse(tall)) < 1e-9);
        CHECK(penrose_violation(low, ctwillems::pseudoinverse(low)) < 1e-9);
    }
}

TEST_CASE("numerical rank") {
    CHECK(ctwillems::numerical_rank(Matrix::Zero(3, 5)) == 0);
    CHECK(ctwillems::numerical_rank(Matrix::Identity(4, 4)) == 4);

    for (std::uint64_t seed = 7; seed < 15; ++seed) {
        const Vector a = oracles::random_vector(5, seed);
        const Vector b = oracles::random_vector(5, seed + 50);
        const Matrix outer = a * b.transpose();
        CHECK(ctwillems::numerical_rank(outer) == 1);

        // invariant under permutation and nonzero scaling
        const Matrix M = oracles::random_matrix(4, 6, seed + 99);
        const int r = ctwillems::numerical_rank(M);
        Matrix permuted = M;
        permuted.row(0).swap(permuted.row(3));
        permuted.col(1).swap(permuted.col(5));
        CHECK(ctwillems::numerical_rank(permuted) == r);
        CHECK(ctwillems::numerical_rank(Matrix(-3.7 * M)) == r);
        CHECK(ctwillems::numerical_rank(Matrix(1e-6 * M)) == r);
    }
}

TEST_CASE("svd result is ordered and orthonormal") {
    for (std::uint64_t seed = 3; seed < 9; ++seed) {
        const Matrix M = oracles::random_matrix(5, 8, seed);
        const auto dec = ctwillems::svd(M);
        for (Eigen::Index i = 1; i < dec.singular_values.size(); ++i) {
            CHECK(dec.singular_values(i - 1) >= dec.singular_values(i));
        }
        const Matrix utu = dec.left_vectors.transpose() * dec.left_vectors;
        const Matrix vtv = dec.right_vectors.transpose() * dec.right_vectors;
        CHECK((utu - Matrix::Identity(utu.rows(), utu.cols())).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((vtv - Matrix::Identity(vtv.rows(), vtv.cols())).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("eigenvalues of fixed matrices") {
    SECTION("diagonal") {
        Matrix A(2, 2);
        A << 1, 0, 0, -2;
        const auto ev = ctwillems::eigenvalues(A);
        CHECK(ev[0].real() == Catch::Approx(-2.0).margin(1e-12));
        CHECK(ev[1].real() == Catch::Approx(1.0).margin(1e-12));
        CHECK(std::abs(ev[0].imag()) < 1e-12);
    }
    SECTION("rotation generator") {
        Matrix A(2, 2);
        A << 0, -1, 1, 0;
        const auto ev = ctwillems::eigenvalues(A);
        CHECK(std::abs(ev[0] - std::complex<double>(0, -1)) < 1e-12);
        CHECK(std::abs(ev[1] - std::complex<double>(0, 1)) < 1e-12);
    }
    SECTION("non-square rejected") {
        CHECK_THROWS_AS(ctwillems::eigenvalues(Matrix::Zero(2, 3)), ctwillems::DimensionError);
    }
}

TEST_CASE("eigenvalues match characteristic-polynomial root oracle") {
    for (std::uint64_t seed = 11; seed < 19; ++seed) {
        Matrix A = oracles::random_matrix(4, 4, seed);
        A = Matrix(0.5 * (A + A.transpose()));  // symmetric: real spectrum
        auto ev = ctwillems::eigenvalues(A);
        auto roots = oracles::polynomial_roots(oracles::characteristic_polynomial(A));
        std::sort(roots.begin(), roots.end(),
                  [](const auto& a, const auto& b) { return a.real() < b.real(); });
        REQUIRE(ev.size() == roots.size());
        for (std::size_t i = 0; i < ev.size(); ++i) {
            CHECK(std::abs(ev[i] - roots[i]) < 1e-8);
        }
    }
}

TEST_CASE("non-finite input rejected") {
    Matrix M = Matrix::Identity(2, 2);
    M(0, 1) = std::nan("");
    CHECK_THROWS_AS(ctwillems::matrix_exponential(M, 1.0), ctwillems::ValueError);
    CHECK_THROWS_AS(ctwillems::svd(M), ctwillems::ValueError);
}
