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
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctwillems/errors.hpp"
#include "ctwillems/excitation.hpp"
#include "ctwillems/hankel.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/io.hpp"
#include "ctwillems/linalg.hpp"
#include "ctwillems/lti.hpp"
#include "ctwillems/signal.hpp"

namespace ctwillems {

/// Desired trajectory over one segment interval [0, T]: a piecewise
/// differentiable input (right-differentiable at its breakpoints) plus the
/// initial state the trajectory should start from.
struct TargetSpec {
    InputFunction u_bar;
    Vector x_bar0;
};

struct SolveOptions {
    double cutoff_rel = kDefaultPinvCutoff;
    double tol_solve = 1e-6;
    /// Run even when the dataset carries no passing excitation certificate.
    bool force_uncertified = false;
};

/// Bookkeeping for one breakpoint reset of the parameter vector.
struct ResetRecord {
    double time = 0.0;
    int offset = 0;
    Vector alpha_before;
    Vector alpha_after;
    double continuity_residual = 0.0;  // ||H(x)(T_j) (after - before)||
};

/// The time-varying parameter vector on the offset grid, one N-vector per
/// offset k = 0..q-1, with the per-offset solve residuals.
struct AlphaSolution {
    double delta = 0.0;
    Matrix alpha;  // N x q
    std::vector<ResetRecord> resets;
    Vector input_residual;  // q entries, inf-norm of H(u) alpha - u_bar
    Vector state_residual;  // q entries, 2-norm of H(x) d(alpha)/dt
    double sigma_min_seen = std::numeric_limits<double>::infinity();

    int offsets() const { return static_cast<int>(alpha.cols()); }
    double max_input_residual() const {
        return input_residual.size() ? input_residual.maxCoeff() : 0.0;
    }
    double max_state_residual() const {
        return state_residual.size() ? state_residual.maxCoeff() : 0.0;
    }
};

/// Data-based trajectory on the offset grid t = k*delta, k = 0..q-1.
struct Reconstruction {
    double delta = 0.0;
    Matrix u_rec, y_rec, x_rec;
    double max_input_residual = 0.0;
    std::optional<double> oracle_error;

    int offsets() const { return static_cast<int>(u_rec.cols()); }
    double time(int k) const { return static_cast<double>(k) * delta; }
};

// Per-offset data matrices, all over the full column range [0, N-1].
inline Matrix input_hankel(const PeDataset& data, int k) {
    return hankel_row(data.u, 0, data.segments() - 1, k).matrix;
}
inline Matrix state_hankel(const PeDataset& data, int k) {
    return hankel_row(data.x, 0, data.segments() - 1, k).matrix;
}
inline Matrix output_hankel(const PeDataset& data, int k) {
    return hankel_row(data.y, 0, data.segments() - 1, k).matrix;
}
inline Matrix stacked_data_matrix(const PeDataset& data, int k) {
    Matrix M(data.m() + data.n(), data.segments());
    M.topRows(data.m()) = input_hankel(data, k);
    M.bottomRows(data.n()) = state_hankel(data, k);
    return M;
}

namespace detail {

inline void require_certified(const PeDataset& data, const SolveOptions& opts, const char* what) {
    if (opts.force_uncertified) return;
    const int needed = data.n() + 1;
    if (!data.order_certified || *data.order_certified < needed) {
        throw PreconditionError(std::string(what) +
                                ": dataset is not certified persistently exciting of order n+1");
    }
}

// Pseudoinverse of the stacked data matrix at one offset, with a full-row-rank
// guard. Tracks the smallest surviving singular value for diagnostics.
class ThetaEvaluator {
public:
    ThetaEvaluator(const PeDataset& data, const SolveOptions& opts) : data_(data), opts_(opts) {
        if (data.segments() < data.m() + data.n()) {
            throw InfeasibleError("alpha solve: need at least m+n segments for full row rank");
        }
    }

    Matrix theta(int k) const {
        const Matrix M = stacked_data_matrix(data_, k);
        const SvdResult dec = svd(M);
        const Eigen::Index rows = M.rows();
        const double sigma_max = dec.singular_values(0);
        const double sigma_min = dec.singular_values(rows - 1);
        if (sigma_max <= 0.0 || sigma_min <= opts_.cutoff_rel * sigma_max) {
            std::ostringstream msg;
            msg << "rank loss in the data matrix at offset k = " << k
                << " (t = " << static_cast<double>(k) * data_.delta() << ")";
            throw SingularityError(msg.str());
        }
        sigma_min_seen = std::min(sigma_min_seen, sigma_min);
        Vector inv(dec.singular_values.size());
        for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = 1.0 / dec.singular_values(i);
        return dec.right_vectors * inv.asDiagonal() * dec.left_vectors.transpose();
    }

    mutable double sigma_min_seen = std::numeric_limits<double>::infinity();

private:
    const PeDataset& data_;
    const SolveOptions& opts_;
};

// Right-hand side of the parameter ODE
//   d(alpha)/dt = Theta(t) ( [du_bar/dt; 0] - [H(du/dt) alpha; 0] ),
// evaluated at grid offset k. All data matrices are read at recorded samples.
class AlphaOde {
public:
    AlphaOde(const PeDataset& data, const TargetSpec& target, const SampledSignal& u_dot,
             const SolveOptions& opts)
        : data_(data), target_(target), u_dot_(u_dot), theta_(data, opts) {}

    Vector rhs(int k, const Vector& alpha, Side side) const {
        const Vector w = target_.u_bar.derivative(time(k), side) -
                         hankel_row(u_dot_, 0, data_.segments() - 1, k).matrix * alpha;
        return theta_.theta(k).leftCols(data_.m()) * w;
    }

    double time(int k) const { return static_cast<double>(k) * data_.delta(); }
    double delta() const { return data_.delta(); }
    double sigma_min_seen() const { return theta_.sigma_min_seen; }

    // One classical RK4 step across two grid intervals. The stride is chosen
    // so every stage (start, midpoint, end) falls on a recorded sample; a
    // half-grid stage would otherwise have no data matrix to read.
    Vector rk4_double_step(int k, const Vector& a) const {
        const double h = 2.0 * delta();
        const Vector s1 = rhs(k, a, Side::Right);
        const Vector s2 = rhs(k + 1, a + 0.5 * h * s1, Side::Right);
        const Vector s3 = rhs(k + 1, a + 0.5 * h * s2, Side::Right);
        const Vector s4 = rhs(k + 2, a + h * s3, Side::Right);
        return a + (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
    }

    // One trapezoidal (Heun) step across a single grid interval, again with
    // both stages on recorded samples. end_side selects the left limit of the
    // target derivative when the step closes onto a breakpoint.
    Vector heun_step(int k, const Vector& a, Side end_side) const {
        const Vector s1 = rhs(k, a, Side::Right);
        const Vector s2 = rhs(k + 1, a + delta() * s1, end_side);
        return a + 0.5 * delta() * (s1 + s2);
    }

private:
    const PeDataset& data_;
    const TargetSpec& target_;
    const SampledSignal& u_dot_;
    ThetaEvaluator theta_;
};

// Fills columns j = 0..k1-k0-1 of `alpha` with the parameter vector at grid
// offsets k0+j, starting from the preset column 0. Two interleaved
// double-step strands cover the even and odd offsets. The odd strand starts
// with a third-order Adams-Moulton corrector over (k0, k0+1, k0+2), using a
// Heun predictor for the midpoint stage, so the whole scheme stays on
// recorded samples.
inline void integrate_strands(const AlphaOde& ode, Matrix& alpha, int k0, int k1) {
    const int len = k1 - k0;
    for (int k = k0; k + 2 < k1; k += 2) {
        alpha.col(k + 2 - k0) = ode.rk4_double_step(k, alpha.col(k - k0));
    }
    if (len == 2) {
        alpha.col(1) = ode.heun_step(k0, alpha.col(0), Side::Right);
    } else if (len >= 3) {
        const double h = ode.delta();
        const Vector f0 = ode.rhs(k0, alpha.col(0), Side::Right);
        const Vector a1_pred = alpha.col(0) + 0.5 * h * (f0 + ode.rhs(k0 + 1, alpha.col(0) + h * f0,
                                                                      Side::Right));
        const Vector f1 = ode.rhs(k0 + 1, a1_pred, Side::Right);
        const Vector f2 = ode.rhs(k0 + 2, alpha.col(2), Side::Right);
        alpha.col(1) = alpha.col(0) + (h / 12.0) * (5.0 * f0 + 8.0 * f1 - f2);
        for (int k = k0 + 1; k + 2 < k1; k += 2) {
            alpha.col(k + 2 - k0) = ode.rk4_double_step(k, alpha.col(k - k0));
        }
    }
}

}  // namespace detail

/// Grid offsets of the target's interior breakpoints. Each breakpoint must
/// lie on the sample grid.
inline std::vector<int> target_breakpoint_offsets(const PeDataset& data, const TargetSpec& target) {
    const double T = data.segment_length();
    const double delta = data.delta();
    const int q = data.offsets();
    std::vector<int> offsets;
    for (const double tj : target.u_bar.breakpoints()) {
        if (tj <= 0.0 || tj >= T * (1.0 - 1e-12)) continue;
        const auto k = static_cast<int>(std::llround(tj / delta));
        if (std::abs(static_cast<double>(k) * delta - tj) > 1e-9 * std::max(1.0, T)) {
            throw PreconditionError("target breakpoint does not lie on the sample grid");
        }
        if (k >= 1 && k <= q - 1 && (offsets.empty() || offsets.back() != k)) {
            offsets.push_back(k);
        }
    }
    return offsets;
}

/// Minimum-norm parameter vector matching the target's initial input and
/// state: alpha(0) = Theta(0) [u_bar(0); x_bar(0)]. Requires data certified
/// persistently exciting of order n+1.
inline Vector alpha_initial(const PeDataset& data, const Vector& u_bar0, const Vector& x_bar0,
                            const SolveOptions& opts = {}) {
    detail::require_certified(data, opts, "alpha_initial");
    if (u_bar0.size() != data.m() || x_bar0.size() != data.n()) {
        throw DimensionError("alpha_initial: target vectors must have sizes m and n");
    }
    detail::ThetaEvaluator theta(data, opts);
    Vector rhs(data.m() + data.n());
    rhs.head(data.m()) = u_bar0;
    rhs.tail(data.n()) = x_bar0;
    return theta.theta(0) * rhs;
}

/// Parameter vector after the breakpoint at offset k_j: the input is reset to
/// the commanded value while the reconstructed state is carried over, which
/// keeps H(x) alpha continuous across the jump. The state row of the data
/// matrix is continuous at T_j, so the left-limit matrix equals the sampled
/// one.
inline Vector reset_alpha(const PeDataset& data, const Vector& alpha_before, int k_j,
                          const Vector& u_bar_at_tj, const SolveOptions& opts = {}) {
    detail::require_certified(data, opts, "reset_alpha");
    if (k_j < 0 || k_j >= data.offsets()) throw BoundsError("reset_alpha: offset out of range");
    if (alpha_before.size() != data.segments() || u_bar_at_tj.size() != data.m()) {
        throw DimensionError("reset_alpha: inconsistent dimensions");
    }
    detail::ThetaEvaluator theta(data, opts);
    Vector rhs(data.m() + data.n());
    rhs.head(data.m()) = u_bar_at_tj;
    rhs.tail(data.n()) = state_hankel(data, k_j) * alpha_before;
    return theta.theta(k_j) * rhs;
}

/// Solution of one target segment [T_j, T_{j+1}) on the offset grid.
struct SegmentSolution {
    int k_begin = 0;
    int k_end = 0;  // exclusive
    Matrix alpha;   // N x (k_end - k_begin)
    Vector input_residual;
    Vector state_residual;
    /// alpha advanced one final grid step onto T_{j+1} with the left-sided
    /// target derivative; absent for the last segment.
    std::optional<Vector> alpha_end_left;
    double sigma_min_seen = std::numeric_limits<double>::infinity();
};

/// Integrates the parameter ODE across target segment `segment_index`, given
/// the parameter vector at the segment's first offset. Residuals are recorded
/// per offset: the input match in the inf-norm and the state annihilation
/// ||H(x) d(alpha)/dt|| in the 2-norm, with the derivative taken as the
/// evaluated right-hand side.
inline SegmentSolution solve_alpha(const PeDataset& data, const TargetSpec& target,
                                   int segment_index, const Vector& alpha_start,
                                   const SolveOptions& opts = {}) {
    detail::require_certified(data, opts, "solve_alpha");
    if (target.u_bar.dim() != data.m()) {
        throw DimensionError("solve_alpha: target input dimension must be m");
    }
    if (alpha_start.size() != data.segments()) {
        throw DimensionError("solve_alpha: alpha must have one entry per data segment");
    }

    const auto breaks = target_breakpoint_offsets(data, target);
    const int segment_count = static_cast<int>(breaks.size()) + 1;
    if (segment_index < 0 || segment_index >= segment_count) {
        throw BoundsError("solve_alpha: segment index out of range");
    }
    const int k0 = segment_index == 0 ? 0 : breaks[static_cast<std::size_t>(segment_index - 1)];
    const int k1 = segment_index == segment_count - 1
                       ? data.offsets()
                       : breaks[static_cast<std::size_t>(segment_index)];

    const SampledSignal u_dot =
        derivative_signal(data.u, data.u_source ? &*data.u_source : nullptr);
    detail::AlphaOde ode(data, target, u_dot, opts);

    SegmentSolution seg;
    seg.k_begin = k0;
    seg.k_end = k1;
    seg.alpha.resize(data.segments(), k1 - k0);
    seg.alpha.col(0) = alpha_start;
    detail::integrate_strands(ode, seg.alpha, k0, k1);

    seg.input_residual.resize(k1 - k0);
    seg.state_residual.resize(k1 - k0);
    for (int k = k0; k < k1; ++k) {
        const Vector a = seg.alpha.col(k - k0);
        const Vector u_match =
            input_hankel(data, k) * a - target.u_bar.value(ode.time(k), Side::Right);
        seg.input_residual(k - k0) = u_match.cwiseAbs().maxCoeff();
        const Vector a_dot = ode.rhs(k, a, Side::Right);
        seg.state_residual(k - k0) = (state_hankel(data, k) * a_dot).norm();
    }
    if (k1 < data.offsets()) {
        seg.alpha_end_left = ode.heun_step(k1 - 1, seg.alpha.col(k1 - 1 - k0), Side::Left);
    }
    seg.sigma_min_seen = ode.sigma_min_seen();
    return seg;
}

/// Reads the reconstructed input, state and output off the data matrices:
/// u_rec(k) = H(u)(k) alpha(k), and likewise for x and y.
inline Reconstruction generate_trajectory(const PeDataset& data, const AlphaSolution& sol) {
    if (sol.offsets() != data.offsets()) {
        throw PreconditionError("generate_trajectory: alpha must cover every offset of [0, T)");
    }
    Reconstruction rec;
    rec.delta = data.delta();
    rec.u_rec.resize(data.m(), sol.offsets());
    rec.x_rec.resize(data.n(), sol.offsets());
    rec.y_rec.resize(data.p(), sol.offsets());
    for (int k = 0; k < sol.offsets(); ++k) {
        const Vector a = sol.alpha.col(k);
        rec.u_rec.col(k) = input_hankel(data, k) * a;
        rec.x_rec.col(k) = state_hankel(data, k) * a;
        rec.y_rec.col(k) = output_hankel(data, k) * a;
    }
    rec.max_input_residual = sol.max_input_residual();
    return rec;
}

struct ReconstructResult {
    AlphaSolution alpha;
    Reconstruction reconstruction;
};

/// End-to-end data-based trajectory generation: initial parameter vector,
/// per-segment integration, breakpoint resets, then the reconstructed
/// signals.
inline ReconstructResult reconstruct(const PeDataset& data, const TargetSpec& target,
                                     const SolveOptions& opts = {}) {
    detail::require_certified(data, opts, "reconstruct");
    if (target.u_bar.dim() != data.m()) {
        throw DimensionError("reconstruct: target input dimension must be m");
    }
    if (target.x_bar0.size() != data.n()) {
        throw DimensionError("reconstruct: target initial state must have length n");
    }
    if (const auto end = target.u_bar.domain_end()) {
        if (*end < data.segment_length() * (1.0 - 1e-12)) {
            throw DomainError("reconstruct: target input is not defined on [0, T]");
        }
    }

    const auto breaks = target_breakpoint_offsets(data, target);
    const int q = data.offsets();

    AlphaSolution sol;
    sol.delta = data.delta();
    sol.alpha.resize(data.segments(), q);
    sol.input_residual.resize(q);
    sol.state_residual.resize(q);

    Vector a = alpha_initial(data, target.u_bar.value(0.0, Side::Right), target.x_bar0, opts);
    const int segment_count = static_cast<int>(breaks.size()) + 1;
    for (int j = 0; j < segment_count; ++j) {
        const SegmentSolution seg = solve_alpha(data, target, j, a, opts);
        sol.alpha.middleCols(seg.k_begin, seg.k_end - seg.k_begin) = seg.alpha;
        sol.input_residual.segment(seg.k_begin, seg.k_end - seg.k_begin) = seg.input_residual;
        sol.state_residual.segment(seg.k_begin, seg.k_end - seg.k_begin) = seg.state_residual;
        sol.sigma_min_seen = std::min(sol.sigma_min_seen, seg.sigma_min_seen);

        if (j < segment_count - 1) {
            const int k_next = seg.k_end;
            const Vector before = *seg.alpha_end_left;
            const Vector u_cmd =
                target.u_bar.value(static_cast<double>(k_next) * data.delta(), Side::Right);
            const Vector after = reset_alpha(data, before, k_next, u_cmd, opts);

            ResetRecord rr;
            rr.time = static_cast<double>(k_next) * data.delta();
            rr.offset = k_next;
            rr.alpha_before = before;
            rr.alpha_after = after;
            rr.continuity_residual = (state_hankel(data, k_next) * (after - before)).norm();
            sol.resets.push_back(std::move(rr));
            a = after;
        }
    }

    ReconstructResult out;
    out.reconstruction = generate_trajectory(data, sol);
    out.alpha = std::move(sol);
    return out;
}

// ---------------------------------------------------------------------------
// Oracle comparison and serialization

struct OracleComparison {
    double max_abs_error = 0.0;        // max_k ||y_rec(k) - y_sim(k)||_inf
    double max_output_magnitude = 0.0;  // max_k ||y_sim(k)||_inf
    Matrix y_oracle;                    // p x q
};

/// Direct simulation of the known plant under the target input, compared
/// against the data-based reconstruction on the same grid.
inline OracleComparison compare_with_simulation(const Reconstruction& rec, const LtiSystem& sys,
                                                const TargetSpec& target, double segment_length) {
    const auto traj = simulate(sys, target.x_bar0, target.u_bar, segment_length, rec.delta);
    OracleComparison cmp;
    cmp.y_oracle.resize(sys.p(), rec.offsets());
    for (int k = 0; k < rec.offsets(); ++k) {
        cmp.y_oracle.col(k) = traj.outputs.col(k);
        cmp.max_abs_error = std::max(
            cmp.max_abs_error, (rec.y_rec.col(k) - traj.outputs.col(k)).cwiseAbs().maxCoeff());
        cmp.max_output_magnitude =
            std::max(cmp.max_output_magnitude, traj.outputs.col(k).cwiseAbs().maxCoeff());
    }
    return cmp;
}

/// CSV layout: t, target input, reconstructed input, reconstructed output,
/// then (when an oracle is supplied) the simulated output and the row-wise
/// inf-norm output error.
inline std::string reconstruction_to_csv(const Reconstruction& rec, const TargetSpec& target,
                                         const Matrix* y_oracle = nullptr) {
    std::ostringstream out;
    out << "t";
    for (int c = 0; c < target.u_bar.dim(); ++c) out << ",u_bar" << c;
    for (int c = 0; c < rec.u_rec.rows(); ++c) out << ",u_rec" << c;
    for (int c = 0; c < rec.y_rec.rows(); ++c) out << ",y_rec" << c;
    if (y_oracle != nullptr) {
        for (int c = 0; c < y_oracle->rows(); ++c) out << ",y_oracle" << c;
        out << ",abs_error";
    }
    out << "\n";
    for (int k = 0; k < rec.offsets(); ++k) {
        out << format_double(rec.time(k));
        const Vector ub = target.u_bar.value(rec.time(k), Side::Right);
        for (Eigen::Index c = 0; c < ub.size(); ++c) out << "," << format_double(ub(c));
        for (Eigen::Index c = 0; c < rec.u_rec.rows(); ++c) {
            out << "," << format_double(rec.u_rec(c, k));
        }
        for (Eigen::Index c = 0; c < rec.y_rec.rows(); ++c) {
            out << "," << format_double(rec.y_rec(c, k));
        }
        if (y_oracle != nullptr) {
            for (Eigen::Index c = 0; c < y_oracle->rows(); ++c) {
                out << "," << format_double((*y_oracle)(c, k));
            }
            out << ","
                << format_double((rec.y_rec.col(k) - y_oracle->col(k)).cwiseAbs().maxCoeff());
        }
        out << "\n";
    }
    return out.str();
}

inline nlohmann::json diagnostics_to_json(const AlphaSolution& sol, const Reconstruction& rec) {
    nlohmann::json resets = nlohmann::json::array();
    for (const auto& r : sol.resets) {
        resets.push_back(nlohmann::json{
            {"t", r.time}, {"k", r.offset}, {"continuity_residual", r.continuity_residual}});
    }
    nlohmann::json j{{"max_input_residual", sol.max_input_residual()},
                     {"max_state_residual", sol.max_state_residual()},
                     {"sigma_min_seen", sol.sigma_min_seen},
                     {"resets", resets}};
    if (rec.oracle_error) j["oracle_error"] = *rec.oracle_error;
    return j;
}

}  // namespace ctwillems
