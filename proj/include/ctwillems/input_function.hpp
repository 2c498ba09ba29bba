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
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ctwillems/errors.hpp"
#include "ctwillems/linalg.hpp"

namespace ctwillems {

/// Evaluation side at a discontinuity. Signals are right-continuous by
/// convention; Side::Left requests the limit from below.
enum class Side { Left, Right };

namespace detail {
// Tolerance (in units of one index) for deciding that a time sits exactly on
// a switching instant despite floating-point division noise.
inline constexpr double kBoundarySnap = 1e-9;
}  // namespace detail

/// u(t) = levels[floor(t / hold)]; constant on [i*hold, (i+1)*hold), defined
/// on [0, levels.size()*hold], right-continuous at the switching instants.
struct PiecewiseConstant {
    std::vector<Vector> levels;
    double hold = 1.0;
};

/// Per-channel sum of sinusoids: u_c(t) = sum_j amp[c][j] sin(freq[c][j] t + phase[c][j]).
struct SinusoidSum {
    std::vector<std::vector<double>> amplitudes;
    std::vector<std::vector<double>> frequencies;
    std::vector<std::vector<double>> phases;
};

/// Per-channel polynomial in t; coefficients in ascending powers.
struct Polynomial {
    std::vector<std::vector<double>> coefficients;
};

/// Piecewise-constant with arbitrary interior breakpoints; the last level
/// holds indefinitely. levels.size() == breakpoints.size() + 1.
struct SquareWave {
    std::vector<Vector> levels;
    std::vector<double> breakpoints;
};

/// Vector-valued input signal with analytic derivative and explicit
/// breakpoint bookkeeping, so integrators never step across a switching
/// instant unaware.
class InputFunction {
public:
    InputFunction(PiecewiseConstant pc) : impl_(std::move(pc)) { validate(); }
    InputFunction(SinusoidSum s) : impl_(std::move(s)) { validate(); }
    InputFunction(Polynomial p) : impl_(std::move(p)) { validate(); }
    InputFunction(SquareWave sw) : impl_(std::move(sw)) { validate(); }

    /// Identically-zero input with the given channel count.
    static InputFunction zero(int dim) {
        Polynomial p;
        p.coefficients.assign(static_cast<std::size_t>(dim), {0.0});
        return InputFunction(std::move(p));
    }

    int dim() const {
        return std::visit(
            [](const auto& f) -> int {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PiecewiseConstant> || std::is_same_v<F, SquareWave>) {
                    return static_cast<int>(f.levels.front().size());
                } else if constexpr (std::is_same_v<F, SinusoidSum>) {
                    return static_cast<int>(f.amplitudes.size());
                } else {
                    return static_cast<int>(f.coefficients.size());
                }
            },
            impl_);
    }

    Vector value(double t, Side side = Side::Right) const {
        check_domain(t);
        return std::visit([&](const auto& f) { return eval_value(f, t, side); }, impl_);
    }

    Vector derivative(double t, Side side = Side::Right) const {
        check_domain(t);
        return std::visit([&](const auto& f) { return eval_derivative(f, t, side); }, impl_);
    }

    /// Interior switching instants in ascending order; empty for smooth kinds.
    std::vector<double> breakpoints() const {
        return std::visit(
            [](const auto& f) -> std::vector<double> {
                using F = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<F, PiecewiseConstant>) {
                    std::vector<double> out;
                    for (std::size_t i = 1; i < f.levels.size(); ++i) {
                        out.push_back(static_cast<double>(i) * f.hold);
                    }
                    return out;
                } else if constexpr (std::is_same_v<F, SquareWave>) {
                    return f.breakpoints;
                } else {
                    return {};
                }
            },
            impl_);
    }

    /// End of the definition interval, when bounded (piecewise-constant holds).
    std::optional<double> domain_end() const {
        if (const auto* pc = std::get_if<PiecewiseConstant>(&impl_)) {
            return static_cast<double>(pc->levels.size()) * pc->hold;
        }
        return std::nullopt;
    }

    const std::variant<PiecewiseConstant, SinusoidSum, Polynomial, SquareWave>& raw() const {
        return impl_;
    }

private:
    std::variant<PiecewiseConstant, SinusoidSum, Polynomial, SquareWave> impl_;

    void check_domain(double t) const {
        if (!std::isfinite(t) || t < -detail::kBoundarySnap) {
            throw DomainError("input function evaluated before t = 0");
        }
        if (const auto end = domain_end()) {
            if (t > *end * (1.0 + 1e-12) + detail::kBoundarySnap) {
                throw DomainError("input function evaluated past the end of its domain");
            }
        }
    }

    void validate() const {
        if (const auto* pc = std::get_if<PiecewiseConstant>(&impl_)) {
            if (pc->levels.empty() || !(pc->hold > 0.0)) {
                throw ValueError("piecewise-constant input needs levels and a positive hold");
            }
            for (const auto& l : pc->levels) {
                if (l.size() != pc->levels.front().size()) {
                    throw DimensionError("piecewise-constant levels must share one dimension");
                }
                require_finite(l, "piecewise-constant level");
            }
        } else if (const auto* s = std::get_if<SinusoidSum>(&impl_)) {
            if (s->amplitudes.empty() || s->amplitudes.size() != s->frequencies.size() ||
                s->amplitudes.size() != s->phases.size()) {
                throw DimensionError("sinusoid sum needs matching per-channel term lists");
            }
            for (std::size_t c = 0; c < s->amplitudes.size(); ++c) {
                if (s->amplitudes[c].size() != s->frequencies[c].size() ||
                    s->amplitudes[c].size() != s->phases[c].size()) {
                    throw DimensionError("sinusoid sum term lists must align per channel");
                }
            }
        } else if (const auto* p = std::get_if<Polynomial>(&impl_)) {
            if (p->coefficients.empty()) {
                throw DimensionError("polynomial input needs at least one channel");
            }
            for (const auto& c : p->coefficients) {
                if (c.empty()) throw DimensionError("polynomial channel needs coefficients");
            }
        } else if (const auto* sw = std::get_if<SquareWave>(&impl_)) {
            if (sw->levels.size() != sw->breakpoints.size() + 1 || sw->levels.empty()) {
                throw DimensionError("square wave needs breakpoints.size()+1 levels");
            }
            for (std::size_t i = 1; i < sw->breakpoints.size(); ++i) {
                if (!(sw->breakpoints[i] > sw->breakpoints[i - 1])) {
                    throw ValueError("square-wave breakpoints must be strictly increasing");
                }
            }
            for (const auto& l : sw->levels) {
                if (l.size() != sw->levels.front().size()) {
                    throw DimensionError("square-wave levels must share one dimension");
                }
                require_finite(l, "square-wave level");
            }
        }
    }

    // Segment index for a uniform hold, honoring the evaluation side at
    // switching instants and clamping to the defined levels.
    static std::size_t hold_index(double t, double hold, std::size_t count, Side side) {
        const double r = t / hold;
        const double nearest = std::round(r);
        double idx;
        if (std::abs(r - nearest) <= detail::kBoundarySnap) {
            idx = (side == Side::Right) ? nearest : nearest - 1.0;
        } else {
            idx = std::floor(r);
        }
        if (idx < 0.0) idx = 0.0;
        if (idx > static_cast<double>(count - 1)) idx = static_cast<double>(count - 1);
        return static_cast<std::size_t>(idx);
    }

    static Vector eval_value(const PiecewiseConstant& f, double t, Side side) {
        return f.levels[hold_index(t, f.hold, f.levels.size(), side)];
    }
    static Vector eval_derivative(const PiecewiseConstant& f, double, Side) {
        return Vector::Zero(static_cast<Eigen::Index>(f.levels.front().size()));
    }

    static Vector eval_value(const SinusoidSum& f, double t, Side) {
        Vector v(static_cast<Eigen::Index>(f.amplitudes.size()));
        for (std::size_t c = 0; c < f.amplitudes.size(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < f.amplitudes[c].size(); ++j) {
                acc += f.amplitudes[c][j] * std::sin(f.frequencies[c][j] * t + f.phases[c][j]);
            }
            v(static_cast<Eigen::Index>(c)) = acc;
        }
        return v;
    }
    static Vector eval_derivative(const SinusoidSum& f, double t, Side) {
        Vector v(static_cast<Eigen::Index>(f.amplitudes.size()));
        for (std::size_t c = 0; c < f.amplitudes.size(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < f.amplitudes[c].size(); ++j) {
                acc += f.amplitudes[c][j] * f.frequencies[c][j] *
                       std::cos(f.frequencies[c][j] * t + f.phases[c][j]);
            }
            v(static_cast<Eigen::Index>(c)) = acc;
        }
        return v;
    }

    static Vector eval_value(const Polynomial& f, double t, Side) {
        Vector v(static_cast<Eigen::Index>(f.coefficients.size()));
        for (std::size_t c = 0; c < f.coefficients.size(); ++c) {
            const auto& coef = f.coefficients[c];
            double acc = 0.0;
            for (std::size_t j = coef.size(); j-- > 0;) acc = acc * t + coef[j];
            v(static_cast<Eigen::Index>(c)) = acc;
        }
        return v;
    }
    static Vector eval_derivative(const Polynomial& f, double t, Side) {
        Vector v(static_cast<Eigen::Index>(f.coefficients.size()));
        for (std::size_t c = 0; c < f.coefficients.size(); ++c) {
            const auto& coef = f.coefficients[c];
            double acc = 0.0;
            for (std::size_t j = coef.size(); j-- > 1;) {
                acc = acc * t + static_cast<double>(j) * coef[j];
            }
            v(static_cast<Eigen::Index>(c)) = acc;
        }
        return v;
    }

    static Vector eval_value(const SquareWave& f, double t, Side side) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < f.breakpoints.size(); ++i) {
            const double bp = f.breakpoints[i];
            const double snap = detail::kBoundarySnap * std::max(1.0, std::abs(bp));
            if (std::abs(t - bp) <= snap) {
                idx = (side == Side::Right) ? i + 1 : i;
                return f.levels[idx];
            }
            if (t > bp) idx = i + 1;
        }
        return f.levels[idx];
    }
    static Vector eval_derivative(const SquareWave& f, double, Side) {
        return Vector::Zero(static_cast<Eigen::Index>(f.levels.front().size()));
    }
};

}  // namespace ctwillems
