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
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctwillems/errors.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/linalg.hpp"
#include "ctwillems/rng.hpp"

namespace ctwillems {

/// Continuous-time plant  x' = A x + B u,  y = C x + D u.
struct LtiSystem {
    Matrix A, B, C, D;

    LtiSystem(Matrix a, Matrix b, Matrix c, Matrix d)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        if (A.rows() != A.cols()) throw DimensionError("LtiSystem: A must be square");
        if (B.rows() != A.rows()) throw DimensionError("LtiSystem: B row count must match A");
        if (C.cols() != A.rows()) throw DimensionError("LtiSystem: C column count must match A");
        if (D.rows() != C.rows() || D.cols() != B.cols()) {
            throw DimensionError("LtiSystem: D must be outputs x inputs");
        }
        if (A.rows() < 1 || B.cols() < 1 || C.rows() < 1) {
            throw DimensionError("LtiSystem: n, m, p must be at least 1");
        }
        require_finite(A, "LtiSystem.A");
        require_finite(B, "LtiSystem.B");
        require_finite(C, "LtiSystem.C");
        require_finite(D, "LtiSystem.D");
    }

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(C.rows()); }
};

/// Uniformly sampled (input, state, output) record of one simulation run.
struct Trajectory {
    double delta = 0.0;
    Matrix inputs;   // m x (K+1)
    Matrix states;   // n x (K+1)
    Matrix outputs;  // p x (K+1)

    int sample_count() const { return static_cast<int>(states.cols()); }
    double time(int k) const { return static_cast<double>(k) * delta; }
};

namespace detail {

inline std::int64_t checked_step_count(double horizon, double delta, const char* what) {
    if (!(delta > 0.0)) throw ValueError(std::string(what) + ": delta must be positive");
    if (!(horizon > 0.0)) throw ValueError(std::string(what) + ": horizon must be positive");
    const auto steps = static_cast<std::int64_t>(std::llround(horizon / delta));
    if (steps < 1 || std::abs(static_cast<double>(steps) * delta - horizon) >
                         1e-9 * std::max(1.0, std::abs(horizon))) {
        throw PreconditionError(std::string(what) + ": horizon must be an integer multiple of delta");
    }
    return steps;
}

// One RK4 step of x' = A x + B u(t) on a breakpoint-free interval [t, t+h].
// The final stage samples u from the left so a switching instant at the
// interval end never leaks the next segment's value into this step.
inline Vector rk4_step(const LtiSystem& sys, const Vector& x, const InputFunction& u, double t,
                       double h) {
    const auto f = [&](double tau, const Vector& xi, Side side) -> Vector {
        return sys.A * xi + sys.B * u.value(tau, side);
    };
    const Vector s1 = f(t, x, Side::Right);
    const Vector s2 = f(t + 0.5 * h, x + 0.5 * h * s1, Side::Right);
    const Vector s3 = f(t + 0.5 * h, x + 0.5 * h * s2, Side::Right);
    const Vector s4 = f(t + h, x + h * s3, Side::Left);
    return x + (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
}

}  // namespace detail

/// Integrates the plant over [0, horizon] on the grid t_k = k*delta.
///
/// Fixed-step RK4 with two substeps per sample; every interval is split at
/// input breakpoints so no stage is evaluated across a discontinuity.
/// Inputs and outputs are recorded right-continuously at the grid points.
inline Trajectory simulate(const LtiSystem& sys, const Vector& x0, const InputFunction& u,
                           double horizon, double delta) {
    if (x0.size() != sys.n()) throw DimensionError("simulate: x0 must have length n");
    if (u.dim() != sys.m()) throw DimensionError("simulate: input dimension must be m");
    require_finite(x0, "simulate.x0");
    const std::int64_t steps = detail::checked_step_count(horizon, delta, "simulate");
    if (const auto end = u.domain_end()) {
        if (*end < horizon * (1.0 - 1e-12) - 1e-9) {
            throw DomainError("simulate: input is not defined over the full horizon");
        }
    }

    const auto breakpoints = u.breakpoints();
    std::size_t bp_cursor = 0;
    const double snap = 1e-9 * delta;

    Trajectory traj;
    traj.delta = delta;
    traj.inputs.resize(sys.m(), steps + 1);
    traj.states.resize(sys.n(), steps + 1);
    traj.outputs.resize(sys.p(), steps + 1);

    Vector x = x0;
    for (std::int64_t k = 0; k <= steps; ++k) {
        const double tk = static_cast<double>(k) * delta;
        const Vector uk = u.value(tk, Side::Right);
        traj.inputs.col(k) = uk;
        traj.states.col(k) = x;
        traj.outputs.col(k) = sys.C * x + sys.D * uk;
        if (k == steps) break;

        const double tnext = static_cast<double>(k + 1) * delta;
        while (bp_cursor < breakpoints.size() && breakpoints[bp_cursor] <= tk + snap) {
            ++bp_cursor;
        }
        double cur = tk;
        std::size_t cursor = bp_cursor;
        while (cursor < breakpoints.size() && breakpoints[cursor] < tnext - snap) {
            x = detail::rk4_step(sys, x, u, cur, breakpoints[cursor] - cur);
            cur = breakpoints[cursor];
            ++cursor;
        }
        // two substeps per smooth piece keep the local error far below 1e-10
        const double h = 0.5 * (tnext - cur);
        x = detail::rk4_step(sys, x, u, cur, h);
        x = detail::rk4_step(sys, x, u, cur + h, h);
    }
    return traj;
}

/// Zero-order-hold discretization (e^{AT}, int_0^T e^{A(T-s)} ds B), computed
/// from the exponential of the augmented matrix [[A, B], [0, 0]] * T.
inline std::pair<Matrix, Matrix> exact_discretize(const LtiSystem& sys, double T) {
    if (!(T > 0.0)) throw ValueError("exact_discretize: T must be positive");
    const int n = sys.n();
    const int m = sys.m();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = sys.A;
    aug.topRightCorner(n, m) = sys.B;
    const Matrix E = matrix_exponential(aug, T);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

/// One zero-order-hold step: Ad x + Bd mu.
inline Vector step_discrete(const Matrix& Ad, const Matrix& Bd, const Vector& x, const Vector& mu) {
    if (Ad.rows() != Ad.cols() || Ad.cols() != x.size() || Bd.rows() != Ad.rows() ||
        Bd.cols() != mu.size()) {
        throw DimensionError("step_discrete: inconsistent dimensions");
    }
    return Ad * x + Bd * mu;
}

// ---------------------------------------------------------------------------
// Benchmark plants

inline LtiSystem make_scalar_stable() {
    Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
    A << -1.0;
    B << 1.0;
    C << 1.0;
    D << 0.0;
    return LtiSystem(A, B, C, D);
}

inline LtiSystem make_double_integrator() {
    Matrix A(2, 2), B(2, 1);
    A << 0, 1, 0, 0;
    B << 0, 1;
    return LtiSystem(A, B, Matrix::Identity(2, 2), Matrix::Zero(2, 1));
}

inline LtiSystem make_oscillator() {
    Matrix A(2, 2), B(2, 1);
    A << 0, -1, 1, 0;
    B << 0, 1;
    return LtiSystem(A, B, Matrix::Identity(2, 2), Matrix::Zero(2, 1));
}

/// Seeded random plant, redrawn until the pair (A, B) is controllable.
/// Outputs: p = 2 for n >= 2 (p = 1 otherwise), with random C and D.
inline LtiSystem make_random_controllable(int n, int m, std::uint64_t seed) {
    if (n < 1 || m < 1 || n > 16) throw DimensionError("make_random_controllable: bad dimensions");
    const int p = n >= 2 ? 2 : 1;
    for (std::uint64_t attempt = 0; attempt < 256; ++attempt) {
        UniformRng rng(seed + attempt);
        Matrix A(n, n), B(n, m), C(p, n), D(p, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = rng.symmetric();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) B(i, j) = rng.symmetric();
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n; ++j) C(i, j) = rng.symmetric();
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < m; ++j) D(i, j) = rng.symmetric();

        Matrix ctrb(n, n * m);
        Matrix block = B;
        for (int i = 0; i < n; ++i) {
            ctrb.middleCols(i * m, m) = block;
            block = A * block;
        }
        if (numerical_rank(ctrb) == n) {
            return LtiSystem(A, B, C, D);
        }
    }
    throw InfeasibleError("make_random_controllable: no controllable draw found");
}

inline LtiSystem make_preset(const std::string& name, std::uint64_t seed = 0) {
    if (name == "scalar_stable") return make_scalar_stable();
    if (name == "double_integrator") return make_double_integrator();
    if (name == "oscillator") return make_oscillator();
    if (name == "random_controllable") return make_random_controllable(3, 2, seed);
    throw ValueError("unknown system preset: " + name);
}

}  // namespace ctwillems
