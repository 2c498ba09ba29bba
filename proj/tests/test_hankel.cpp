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

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ctwillems/hankel.hpp"
#include "ctwillems/signal.hpp"
#include "oracles.hpp"

using ctwillems::HankelSlice;
using ctwillems::InputFunction;
using ctwillems::Matrix;
using ctwillems::SampledSignal;
using ctwillems::Vector;

namespace {

SampledSignal ramp_signal(double delta, double T, int N) {
    const auto q = static_cast<int>(std::llround(T / delta));
    Matrix samples(1, N * q + 1);
    for (int j = 0; j <= N * q; ++j) samples(0, j) = static_cast<double>(j) * delta;
    return SampledSignal(delta, T, N, samples);
}

}  // namespace

TEST_CASE("sampled signal invariants") {
    CHECK_THROWS_AS(SampledSignal(1e-3, 1.0, 2, Matrix::Zero(1, 5)), ctwillems::DimensionError);
    CHECK_THROWS_AS(SampledSignal(0.3, 1.0, 2, Matrix::Zero(1, 7)), ctwillems::PreconditionError);
    Matrix bad = Matrix::Zero(1, 3);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(SampledSignal(0.5, 1.0, 1, bad), ctwillems::ValueError);

    const auto z = ramp_signal(0.5, 1.0, 4);
    CHECK(z.samples_per_segment() == 2);
    CHECK(z.sample_count() == 9);
    CHECK(z.time(3) == Catch::Approx(1.5));
}

TEST_CASE("hankel_row direct indexing") {
    SECTION("integer sequence at delta == T") {
        const auto z = ramp_signal(1.0, 1.0, 4);  // z(i) = i
        const auto H = ctwillems::hankel_row(z, 0, 3, 0);
        Matrix expected(1, 4);
        expected << 0, 1, 2, 3;
        CHECK((H.matrix - expected).norm() == 0.0);
    }
    SECTION("constant signal") {
        Matrix samples = Matrix::Constant(2, 9, 3.25);
        const SampledSignal z(0.5, 1.0, 4, samples);
        for (int k = 0; k < 2; ++k) {
            const auto H = ctwillems::hankel_row(z, 0, 3, k);
            CHECK((H.matrix.array() == 3.25).all());
        }
    }
    SECTION("linear ramp at an interior offset") {
        const auto z = ramp_signal(0.5, 1.0, 4);
        const auto H = ctwillems::hankel_row(z, 1, 3, 1);
        Matrix expected(1, 3);
        expected << 1.5, 2.5, 3.5;
        CHECK((H.matrix - expected).norm() == 0.0);
    }
    SECTION("bounds checks") {
        const auto z = ramp_signal(0.5, 1.0, 4);
        CHECK_THROWS_AS(ctwillems::hankel_row(z, 1, 4, 0), ctwillems::BoundsError);
        CHECK_THROWS_AS(ctwillems::hankel_row(z, -1, 2, 0), ctwillems::BoundsError);
        CHECK_THROWS_AS(ctwillems::hankel_row(z, 0, 3, 2), ctwillems::BoundsError);
    }
}

TEST_CASE("hankel_deep") {
    SECTION("depth one equals the full row") {
        const auto z = ramp_signal(0.5, 1.0, 4);
        const auto deep = ctwillems::hankel_deep(z, 1, 1);
        const auto row = ctwillems::hankel_row(z, 0, 3, 1);
        CHECK((deep.matrix - row.matrix).norm() == 0.0);
    }
    SECTION("classic Hankel of 0..3") {
        const auto z = ramp_signal(1.0, 1.0, 4);
        const auto H = ctwillems::hankel_deep(z, 2, 0);
        Matrix expected(2, 3);
        expected << 0, 1, 2, 1, 2, 3;
        CHECK((H.matrix - expected).norm() == 0.0);
        CHECK_THROWS_AS(ctwillems::hankel_deep(z, 5, 0), ctwillems::BoundsError);
    }
    SECTION("matches the reference DT Hankel of the subsampled sequence") {
        for (std::uint64_t seed = 31; seed < 35; ++seed) {
            const Matrix raw = oracles::random_matrix(2, 13, seed);
            const SampledSignal z(0.25, 0.75, 4, raw);  // q = 3
            const int L = 2;
            for (int k = 0; k < 3; ++k) {
                std::vector<Vector> sub;
                for (int i = 0; i <= 4 - 1; ++i) sub.push_back(raw.col(k + 3 * i));
                const Matrix ref = oracles::dt_hankel_reference(sub, L);
                const auto H = ctwillems::hankel_deep(z, L, k);
                CHECK((H.matrix - ref).norm() == 0.0);
            }
        }
    }
    SECTION("shape for every offset") {
        const Matrix raw = oracles::random_matrix(3, 21, 99);
        const SampledSignal z(0.2, 0.8, 5, raw);  // q = 4, N = 5
        for (int k = 0; k < 4; ++k) {
            const auto H = ctwillems::hankel_deep(z, 3, k);
            CHECK(H.matrix.rows() == 9);
            CHECK(H.matrix.cols() == 3);
        }
    }
}

TEST_CASE("hankel shift identity") {
    // advancing (a, b) by one segment re-reads the same samples one segment later
    const Matrix raw = oracles::random_matrix(2, 11, 123);
    const SampledSignal z(0.5, 1.0, 5, raw);
    for (int k = 0; k < 2; ++k) {
        const auto lhs = ctwillems::hankel_row(z, 1, 3, k);
        const auto rhs = ctwillems::hankel_row(z, 0, 2, k);
        for (int j = 0; j < 3; ++j) {
            CHECK((lhs.matrix.col(j) - z.data().col(k + (1 + j) * 2)).norm() == 0.0);
            CHECK((rhs.matrix.col(j) - z.data().col(k + j * 2)).norm() == 0.0);
        }
    }
}

TEST_CASE("derivative_signal") {
    SECTION("piecewise-constant source is identically zero") {
        ctwillems::PiecewiseConstant pc;
        pc.levels = {Vector::Constant(1, 2.0), Vector::Constant(1, -1.0)};
        pc.hold = 1.0;
        const InputFunction u(std::move(pc));
        const auto z = SampledSignal::from_function(u, 1.0, 2, 0.25);
        const auto d = ctwillems::derivative_signal(z, &u);
        CHECK(d.data().cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("sinusoid source derivative is exact") {
        ctwillems::SinusoidSum s;
        s.amplitudes = {{1.0}};
        s.frequencies = {{2.5}};
        s.phases = {{0.4}};
        const InputFunction u(std::move(s));
        const auto z = SampledSignal::from_function(u, 1.0, 3, 0.1);
        const auto d = ctwillems::derivative_signal(z, &u);
        for (int j = 0; j < d.sample_count(); ++j) {
            CHECK(d.data()(0, j) == Catch::Approx(2.5 * std::cos(2.5 * d.time(j) + 0.4)).margin(1e-14));
        }
    }
    SECTION("finite differences on t^2") {
        const double delta = 1e-3;
        const int N = 2, q = 1000;
        Matrix samples(1, N * q + 1);
        for (int j = 0; j <= N * q; ++j) {
            const double t = j * delta;
            samples(0, j) = t * t;
        }
        const SampledSignal z(delta, 1.0, N, samples);
        const auto d = ctwillems::derivative_signal(z);
        double worst_interior = 0.0;
        for (int j = 1; j < d.sample_count() - 1; ++j) {
            if (j % q == 0 || j % q == q - 1) continue;  // segment-edge one-sided stencils
            worst_interior = std::max(worst_interior, std::abs(d.data()(0, j) - 2.0 * d.time(j)));
        }
        CHECK(worst_interior < 1e-5);
        // one-sided boundary stencils are second order on a quadratic: still exact
        CHECK(std::abs(d.data()(0, 0) - 0.0) < 1e-9);
        CHECK(std::abs(d.data()(0, N * q) - 2.0 * d.time(N * q)) < 1e-8);
    }
    SECTION("never differences across a segment boundary") {
        // piecewise-constant samples: FD must be zero everywhere, including
        // right next to the jumps
        ctwillems::PiecewiseConstant pc;
        pc.levels = {Vector::Constant(1, 1.0), Vector::Constant(1, 5.0)};
        pc.hold = 1.0;
        const auto z = SampledSignal::from_function(InputFunction(std::move(pc)), 1.0, 2, 0.25);
        const auto d = ctwillems::derivative_signal(z);
        CHECK(d.data().cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("signal CSV round trip is bit exact") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "ctwillems_csv_test";
    fs::create_directories(dir);
    const auto path = dir / "z.csv";

    for (std::uint64_t seed = 50; seed < 54; ++seed) {
        const Matrix raw = oracles::random_matrix(3, 13, seed) * 1e3;
        const SampledSignal z(0.25, 1.0, 3, raw);
        ctwillems::write_signal_csv(z, path);
        const auto back = ctwillems::read_signal_csv(path, 1.0, 3);
        REQUIRE(back.dim() == z.dim());
        REQUIRE(back.sample_count() == z.sample_count());
        CHECK(back.delta() == z.delta());
        CHECK((back.data() - z.data()).cwiseAbs().maxCoeff() == 0.0);
    }
    fs::remove_all(dir);
}
