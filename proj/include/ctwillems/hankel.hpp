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

#include "ctwillems/errors.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/linalg.hpp"
#include "ctwillems/signal.hpp"

namespace ctwillems {

/// One evaluation of a time-varying Hankel matrix at grid offset t = k*delta,
/// 0 <= k < q. Entries are raw samples; no interpolation happens here.
struct HankelSlice {
    int offset_index = 0;
    Matrix matrix;
};

/// Row of segment-shifted samples [z(t+aT)  z(t+(a+1)T) ... z(t+bT)] at
/// offset t = k*delta. The degenerate case a == b (single column) is allowed
/// so that deep stacks of every legal depth can be formed.
inline HankelSlice hankel_row(const SampledSignal& z, int a, int b, int k) {
    const int N = z.segments();
    const int q = z.samples_per_segment();
    if (a < 0 || b < a || b > N - 1) {
        throw BoundsError("hankel_row: need 0 <= a <= b <= N-1");
    }
    if (k < 0 || k >= q) {
        throw BoundsError("hankel_row: offset index must satisfy 0 <= k < q");
    }
    Matrix M(z.dim(), b - a + 1);
    for (int i = 0; i <= b - a; ++i) {
        M.col(i) = z.data().col(k + (a + i) * q);
    }
    return HankelSlice{k, std::move(M)};
}

/// Depth-L stack: rows l = 0..L-1 are hankel_row(z, l, N-L+l, k), giving a
/// (dim*L) x (N-L+1) matrix. At each offset this is exactly the classic
/// discrete-time Hankel of the subsampled sequence {z(k*delta + i*T)}.
inline HankelSlice hankel_deep(const SampledSignal& z, int L, int k) {
    const int N = z.segments();
    if (L < 1 || L > N) {
        throw BoundsError("hankel_deep: need 1 <= L <= N");
    }
    const int cols = N - L + 1;
    const int dim = z.dim();
    Matrix M(dim * L, cols);
    for (int l = 0; l < L; ++l) {
        M.middleRows(l * dim, dim) = hankel_row(z, l, N - L + l, k).matrix;
    }
    return HankelSlice{k, std::move(M)};
}

/// Samples the derivative of z on the grid of z.
///
/// With an analytic source the derivative is evaluated exactly
/// (right-derivative at switching instants). Otherwise finite differences are
/// used: central in the interior of each segment, one-sided at the segment
/// boundaries i*T, never differencing across a boundary. Samples at a
/// boundary belong to the segment starting there (signals are
/// right-continuous), except the final sample at N*T which closes the last
/// segment.
inline SampledSignal derivative_signal(const SampledSignal& z, const InputFunction* source = nullptr) {
    const int q = z.samples_per_segment();
    const int N = z.segments();
    const double delta = z.delta();
    Matrix d(z.dim(), z.sample_count());

    if (source != nullptr) {
        if (source->dim() != z.dim()) {
            throw DimensionError("derivative_signal: source dimension mismatch");
        }
        for (int j = 0; j < z.sample_count(); ++j) {
            d.col(j) = source->derivative(z.time(j), Side::Right);
        }
        return SampledSignal(delta, z.segment_length(), N, std::move(d));
    }

    const Matrix& s = z.data();
    for (int seg = 0; seg < N; ++seg) {
        const int lo = seg * q;
        const int hi = (seg == N - 1) ? N * q : (seg + 1) * q - 1;  // inclusive owned range
        for (int j = lo; j <= hi; ++j) {
            if (j - 1 >= lo && j + 1 <= hi) {
                d.col(j) = (s.col(j + 1) - s.col(j - 1)) / (2.0 * delta);
            } else if (j + 2 <= hi) {
                d.col(j) = (-3.0 * s.col(j) + 4.0 * s.col(j + 1) - s.col(j + 2)) / (2.0 * delta);
            } else if (j - 2 >= lo) {
                d.col(j) = (3.0 * s.col(j) - 4.0 * s.col(j - 1) + s.col(j - 2)) / (2.0 * delta);
            } else if (j + 1 <= hi) {
                d.col(j) = (s.col(j + 1) - s.col(j)) / delta;
            } else if (j - 1 >= lo) {
                d.col(j) = (s.col(j) - s.col(j - 1)) / delta;
            } else {
                // single-sample segment (delta == T): no in-segment neighbor
                d.col(j).setZero();
            }
        }
    }
    return SampledSignal(delta, z.segment_length(), N, std::move(d));
}

}  // namespace ctwillems
