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
#include <filesystem>

#include "ctwillems/excitation.hpp"
#include "oracles.hpp"

using ctwillems::DtPeSequence;
using ctwillems::InputFunction;
using ctwillems::Matrix;
using ctwillems::PeDataset;
using ctwillems::SampledSignal;
using ctwillems::Side;
using ctwillems::Vector;

namespace {

std::vector<Vector> scalar_sequence(std::initializer_list<double> vals) {
    std::vector<Vector> seq;
    for (double v : vals) seq.push_back(Vector::Constant(1, v));
    return seq;
}

PeDataset scaled_dataset(const PeDataset& data, double s) {
    const auto scale = [&](const SampledSignal& z) {
        return SampledSignal(z.delta(), z.segment_length(), z.segments(), Matrix(s * z.data()));
    };
    return PeDataset(scale(data.u), scale(data.x), scale(data.y));
}

}  // namespace

TEST_CASE("discrete persistence-of-excitation rank checks") {
    SECTION("accepted sequence") {
        const auto seq = scalar_sequence({1, 0, 0, 1});
        const Matrix H = ctwillems::dt_hankel(seq, 2);
        Matrix expected(2, 3);
        expected << 1, 0, 0, 0, 0, 1;
        CHECK((H - expected).norm() == 0.0);
        CHECK(ctwillems::numerical_rank(H) == 2);
        CHECK(ctwillems::dt_pe_check(seq, 2));
    }
    SECTION("constant sequence is rank deficient") {
        const auto seq = scalar_sequence({1, 1, 1, 1});
        CHECK(ctwillems::numerical_rank(ctwillems::dt_hankel(seq, 2)) == 1);
        CHECK_FALSE(ctwillems::dt_pe_check(seq, 2));
    }
}

TEST_CASE("design_dt_pe_sequence") {
    SECTION("certified full rank and deterministic") {
        const auto seq = ctwillems::design_dt_pe_sequence(2, 3, 8, 7);
        CHECK(seq.length() == 8);
        CHECK(seq.m() == 2);
        CHECK(ctwillems::numerical_rank(ctwillems::dt_hankel(seq.values, 3)) == 6);

        const auto again = ctwillems::design_dt_pe_sequence(2, 3, 8, 7);
        for (int i = 0; i < seq.length(); ++i) {
            CHECK((seq.values[static_cast<std::size_t>(i)] -
                   again.values[static_cast<std::size_t>(i)])
                      .norm() == 0.0);
        }
    }
    SECTION("infeasible length is refused with the bound") {
        CHECK_THROWS_AS(ctwillems::design_dt_pe_sequence(1, 3, 4, 0), ctwillems::InfeasibleError);
        CHECK_THROWS_WITH(ctwillems::design_dt_pe_sequence(1, 3, 4, 0),
                          Catch::Matchers::ContainsSubstring("order*(m+1)-1"));
    }
}

TEST_CASE("sampling-interval resonance check") {
    SECTION("real spectrum imposes no constraint") {
        Matrix A(2, 2);
        A << -1, 0.3, 0.2, -2;
        for (double T : {0.1, 1.0, 3.14159, 10.0}) {
            CHECK(ctwillems::check_sampling_interval(A, T));
        }
    }
    SECTION("harmonic oscillator forbids multiples of pi") {
        Matrix A(2, 2);
        A << 0, -1, 1, 0;  // eigenvalues +-i, |Im difference| = 2
        CHECK_FALSE(ctwillems::check_sampling_interval(A, M_PI));
        CHECK_FALSE(ctwillems::check_sampling_interval(A, 2.0 * M_PI));
        CHECK(ctwillems::check_sampling_interval(A, 1.0));
        const auto bad = ctwillems::resonant_periods(A, 7.0);
        REQUIRE(bad.size() == 2);
        CHECK(bad[0] == Catch::Approx(M_PI));
        CHECK(bad[1] == Catch::Approx(2.0 * M_PI));
    }
    SECTION("complex pair 1 +- 2i forbids multiples of pi/2") {
        Matrix A(2, 2);
        A << 1, -2, 2, 1;
        CHECK(ctwillems::check_sampling_interval(A, 0.7));
        CHECK_FALSE(ctwillems::check_sampling_interval(A, M_PI / 2.0));
        CHECK_FALSE(ctwillems::check_sampling_interval(A, M_PI));
    }
    SECTION("guard band widens the rejected neighborhood") {
        Matrix A(2, 2);
        A << 0, -1, 1, 0;
        CHECK(ctwillems::check_sampling_interval(A, M_PI * (1.0 + 1e-3), 1e-6));
        CHECK_FALSE(ctwillems::check_sampling_interval(A, M_PI * (1.0 + 1e-3), 1e-2));
    }
}

TEST_CASE("build_pe_input hold semantics") {
    DtPeSequence seq;
    seq.values = scalar_sequence({1, -1});
    seq.order = 1;
    const InputFunction u = ctwillems::build_pe_input(seq, 1.0);
    CHECK(u.value(0.5)(0) == 1.0);
    CHECK(u.value(1.0)(0) == -1.0);
    CHECK(u.value(1.5)(0) == -1.0);
    CHECK(u.value(0.0)(0) == 1.0);
    CHECK(u.value(1.0, Side::Left)(0) == 1.0);
}

TEST_CASE("piecewise-constant input has an offset-independent Hankel") {
    const auto seq = ctwillems::design_dt_pe_sequence(1, 3, 8, 3);
    const double T = 0.5;
    const InputFunction u = ctwillems::build_pe_input(seq, T);
    const auto z = SampledSignal::from_function(u, T, seq.length(), 0.05);
    const Matrix reference = ctwillems::dt_hankel(seq.values, 3);
    for (int k = 0; k < z.samples_per_segment(); ++k) {
        const auto H = ctwillems::hankel_deep(z, 3, k);
        CHECK((H.matrix - reference).norm() == 0.0);
    }
}

TEST_CASE("collect_dataset") {
    const auto sys = ctwillems::make_double_integrator();
    SECTION("zero input from the origin stays at the origin") {
        const auto data =
            ctwillems::collect_dataset(sys, Vector::Zero(2), InputFunction::zero(1), 0.5, 4, 0.05);
        CHECK(data.x.data().cwiseAbs().maxCoeff() == 0.0);
        CHECK(data.y.data().cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("full-state output reproduces the state samples") {
        const auto seq = ctwillems::design_dt_pe_sequence(1, 3, 6, 11);
        const auto data = ctwillems::collect_dataset(sys, Vector::Zero(2),
                                                     ctwillems::build_pe_input(seq, 0.5), 0.5, 6, 0.05);
        CHECK((data.y.data() - data.x.data()).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("states at segment boundaries match the discrete iteration") {
        const auto seq = ctwillems::design_dt_pe_sequence(1, 3, 6, 11);
        const double T = 0.5;
        const auto data = ctwillems::collect_dataset(sys, Vector::Zero(2),
                                                     ctwillems::build_pe_input(seq, T), T, 6, 0.05);
        const auto [Ad, Bd] = ctwillems::exact_discretize(sys, T);
        Vector xk = Vector::Zero(2);
        for (int i = 0; i < 6; ++i) {
            CHECK((data.x.sample(i * data.offsets()) - xk).cwiseAbs().maxCoeff() < 1e-9);
            xk = ctwillems::step_discrete(Ad, Bd, xk, seq.values[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("certify_pe") {
    const auto sys = ctwillems::make_double_integrator();
    const double T = 1.0;
    const int N = 10;
    const double delta = 0.05;

    SECTION("zero data fails with rank zero") {
        auto data =
            ctwillems::collect_dataset(sys, Vector::Zero(2), InputFunction::zero(1), T, N, delta);
        const auto cert = ctwillems::certify_pe(data, 1);
        CHECK_FALSE(cert.passed);
        for (const auto& r : cert.per_offset) CHECK(r.rank == 0);
    }

    SECTION("persistently exciting run passes at every offset, and order is monotone") {
        const auto seq = ctwillems::design_dt_pe_sequence(1, 5, N, 17);
        auto data = ctwillems::collect_dataset(sys, Vector::Zero(2),
                                               ctwillems::build_pe_input(seq, T), T, N, delta);
        for (int L : {3, 2, 1}) {
            const auto cert = ctwillems::certify_pe(data, L);
            INFO("depth L = " << L);
            CHECK(cert.passed);
            CHECK(static_cast<int>(cert.per_offset.size()) == data.offsets());
            for (const auto& r : cert.per_offset) CHECK(r.rank == L * 1 + 2);
        }
        const auto cert = ctwillems::certify_pe(data, 1);
        ctwillems::attach_certificate(data, cert);
        CHECK(data.order_certified.value() == 3);
        CHECK(data.sigma_min_profile.size() == static_cast<std::size_t>(data.offsets()));

        // rank decisions are invariant under a global scaling of the records
        const auto scaled = scaled_dataset(data, -37.5);
        CHECK(ctwillems::certify_pe(scaled, 1).passed);
        const auto tiny = scaled_dataset(data, 1e-5);
        CHECK(ctwillems::certify_pe(tiny, 1).passed);
    }

    SECTION("resonant sampling interval loses excitation from the origin") {
        const auto osc = ctwillems::make_oscillator();
        REQUIRE_FALSE(ctwillems::check_sampling_interval(osc.A, M_PI));
        const auto seq = ctwillems::design_dt_pe_sequence(1, 3, N, 23);
        // fine grid keeps integration noise below the rank tolerance, so the
        // structural collinearity of the states is what the sweep sees
        const auto data = ctwillems::collect_dataset(osc, Vector::Zero(2),
                                                     ctwillems::build_pe_input(seq, M_PI), M_PI, N,
                                                     M_PI / 100.0);
        const auto cert = ctwillems::certify_pe(data, 1);
        CHECK_FALSE(cert.passed);
        for (const auto& r : cert.per_offset) CHECK(r.rank < cert.required_rank);
    }

    SECTION("too few segments are refused, not reported as failure") {
        const auto seq = ctwillems::design_dt_pe_sequence(1, 3, 5, 29);
        const auto data = ctwillems::collect_dataset(sys, Vector::Zero(2),
                                                     ctwillems::build_pe_input(seq, T), T, 5, 0.25);
        CHECK_THROWS_AS(ctwillems::certify_pe(data, 4), ctwillems::InfeasibleError);
        CHECK_THROWS_WITH(ctwillems::certify_pe(data, 4),
                          Catch::Matchers::ContainsSubstring("L*(m+1)+n-1"));
    }
}

TEST_CASE("dataset and certificate serialization round trips") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "ctwillems_dataset_test";
    fs::create_directories(dir);

    const auto sys = ctwillems::make_double_integrator();
    const auto seq = ctwillems::design_dt_pe_sequence(1, 3, 6, 31);
    auto data = ctwillems::collect_dataset(sys, Vector::Zero(2),
                                           ctwillems::build_pe_input(seq, 0.5), 0.5, 6, 0.05);
    data.seed = seq.seed;
    ctwillems::save_dataset(data, dir);
    const auto back = ctwillems::load_dataset(dir);
    CHECK(back.seed == seq.seed);
    CHECK((back.u.data() - data.u.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.x.data() - data.x.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.y.data() - data.y.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(back.u_source.has_value());

    const auto cert = ctwillems::certify_pe(data, 1);
    const auto json = ctwillems::certificate_to_json(cert);
    const auto cert_back = ctwillems::certificate_from_json(json);
    CHECK(cert_back.passed == cert.passed);
    CHECK(cert_back.order == cert.order);
    CHECK(cert_back.per_offset.size() == cert.per_offset.size());
    CHECK(cert_back.sigma_min_overall() == cert.sigma_min_overall());

    const auto seq_back = ctwillems::sequence_from_json(ctwillems::sequence_to_json(seq));
    CHECK(seq_back.order == seq.order);
    for (int i = 0; i < seq.length(); ++i) {
        CHECK((seq_back.values[static_cast<std::size_t>(i)] -
               seq.values[static_cast<std::size_t>(i)])
                  .norm() == 0.0);
    }
    fs::remove_all(dir);
}
