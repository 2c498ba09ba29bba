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
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>

#include "ctwillems/errors.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/io.hpp"
#include "ctwillems/linalg.hpp"

namespace ctwillems {

/// Uniformly sampled vector signal on [0, N*T], step delta, with T an exact
/// multiple q of delta. Sample j lives at t = j*delta; there are N*q + 1
/// samples, the last one closing the final segment.
class SampledSignal {
public:
    SampledSignal(double delta, double segment_length, int segments, Matrix samples)
        : delta_(delta), T_(segment_length), N_(segments), samples_(std::move(samples)) {
        if (!(delta_ > 0.0)) throw ValueError("SampledSignal: delta must be positive");
        if (!(T_ > 0.0) || N_ < 1) throw ValueError("SampledSignal: T and N must be positive");
        const auto q = static_cast<std::int64_t>(std::llround(T_ / delta_));
        if (q < 1 || std::abs(static_cast<double>(q) * delta_ - T_) > 1e-9 * std::max(1.0, T_)) {
            throw PreconditionError("SampledSignal: T must be an integer multiple of delta");
        }
        q_ = static_cast<int>(q);
        if (samples_.cols() != static_cast<Eigen::Index>(N_) * q_ + 1) {
            throw DimensionError("SampledSignal: expected N*q + 1 samples");
        }
        if (samples_.rows() < 1) throw DimensionError("SampledSignal: dimension must be >= 1");
        require_finite(samples_, "SampledSignal");
    }

    /// Samples an input function on the grid (right-continuous at breakpoints).
    static SampledSignal from_function(const InputFunction& f, double segment_length, int segments,
                                       double delta) {
        return sample_impl(f, segment_length, segments, delta);
    }

    int dim() const { return static_cast<int>(samples_.rows()); }
    double delta() const { return delta_; }
    double segment_length() const { return T_; }
    int segments() const { return N_; }
    int samples_per_segment() const { return q_; }
    int sample_count() const { return static_cast<int>(samples_.cols()); }
    double time(int j) const { return static_cast<double>(j) * delta_; }

    const Matrix& data() const { return samples_; }
    Vector sample(int j) const {
        if (j < 0 || j >= sample_count()) throw BoundsError("SampledSignal: sample out of range");
        return samples_.col(j);
    }

private:
    static SampledSignal sample_impl(const InputFunction& f, double T, int N, double delta) {
        if (!(delta > 0.0)) throw ValueError("SampledSignal: delta must be positive");
        const auto q = static_cast<std::int64_t>(std::llround(T / delta));
        if (q < 1 || std::abs(static_cast<double>(q) * delta - T) > 1e-9 * std::max(1.0, T)) {
            throw PreconditionError("SampledSignal: T must be an integer multiple of delta");
        }
        const Eigen::Index count = static_cast<Eigen::Index>(N) * q + 1;
        Matrix samples(f.dim(), count);
        for (Eigen::Index j = 0; j < count; ++j) {
            samples.col(j) = f.value(static_cast<double>(j) * delta, Side::Right);
        }
        return SampledSignal(delta, T, N, std::move(samples));
    }

    double delta_;
    double T_;
    int N_;
    int q_ = 1;
    Matrix samples_;
};

/// CSV layout: header "t,ch0,ch1,...", one row per grid point, decimals with
/// full round-trip precision, LF line endings.
inline std::string signal_to_csv(const SampledSignal& z) {
    std::ostringstream out;
    out << "t";
    for (int c = 0; c < z.dim(); ++c) out << ",ch" << c;
    out << "\n";
    for (int j = 0; j < z.sample_count(); ++j) {
        out << format_double(z.time(j));
        for (int c = 0; c < z.dim(); ++c) out << "," << format_double(z.data()(c, j));
        out << "\n";
    }
    return out.str();
}

inline void write_signal_csv(const SampledSignal& z, const std::filesystem::path& path) {
    write_text_atomic(path, signal_to_csv(z));
}

/// Reads a signal written by write_signal_csv. The segmentation (T, N) is not
/// stored in the CSV and must be supplied; delta is recovered from the grid.
inline SampledSignal read_signal_csv(const std::filesystem::path& path, double segment_length,
                                     int segments) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
    if (line.rfind("t,", 0) != 0) throw IoError("unexpected CSV header in " + path.string());
    const auto header = split_csv_line(line);
    const int dim = static_cast<int>(header.size()) - 1;
    if (dim < 1) throw IoError("CSV has no channels: " + path.string());

    std::vector<Vector> rows;
    double delta = 0.0;
    double t_prev = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != dim + 1) {
            throw IoError("CSV row width mismatch in " + path.string());
        }
        const double t = parse_double(fields[0]);
        if (rows.size() == 1) delta = t - t_prev;
        t_prev = t;
        Vector v(dim);
        for (int c = 0; c < dim; ++c) v(c) = parse_double(fields[static_cast<std::size_t>(c) + 1]);
        rows.push_back(std::move(v));
    }
    if (rows.size() < 2) throw IoError("CSV needs at least two rows: " + path.string());

    Matrix samples(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        samples.col(static_cast<Eigen::Index>(j)) = rows[j];
    }
    return SampledSignal(delta, segment_length, segments, std::move(samples));
}

}  // namespace ctwillems
