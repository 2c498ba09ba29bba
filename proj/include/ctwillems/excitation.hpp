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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctwillems/errors.hpp"
#include "ctwillems/hankel.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/io.hpp"
#include "ctwillems/linalg.hpp"
#include "ctwillems/lti.hpp"
#include "ctwillems/rng.hpp"
#include "ctwillems/signal.hpp"

namespace ctwillems {

/// Discrete sequence of input levels whose depth-`order` Hankel matrix has
/// full row rank, i.e. the sequence is persistently exciting of that order.
struct DtPeSequence {
    std::vector<Vector> values;  // mu_0 .. mu_{N-1}
    int order = 0;
    std::uint64_t seed = 0;  // seed that produced the accepted draw

    int m() const { return static_cast<int>(values.front().size()); }
    int length() const { return static_cast<int>(values.size()); }
};

/// Classic block Hankel of depth L for a discrete sequence.
inline Matrix dt_hankel(const std::vector<Vector>& seq, int depth) {
    const int M = static_cast<int>(seq.size());
    if (depth < 1 || depth > M) throw BoundsError("dt_hankel: need 1 <= depth <= length");
    const int dim = static_cast<int>(seq.front().size());
    Matrix H(dim * depth, M - depth + 1);
    for (int l = 0; l < depth; ++l) {
        for (int j = 0; j <= M - depth; ++j) {
            H.block(l * dim, j, dim, 1) = seq[static_cast<std::size_t>(l + j)];
        }
    }
    return H;
}

/// True when the depth-`order` Hankel of the sequence has full row rank.
inline bool dt_pe_check(const std::vector<Vector>& seq, int order, double tol_rel = kDefaultRankTol) {
    const int m = static_cast<int>(seq.front().size());
    return numerical_rank(dt_hankel(seq, order), tol_rel) == order * m;
}

/// Draws a length-N sequence of uniform [-1, 1]^m levels, redrawing with a
/// shifted seed until the full-row-rank certificate holds. Deterministic for
/// a given seed. Requires N >= order*(m+1) - 1 so the Hankel is wide enough.
inline DtPeSequence design_dt_pe_sequence(int m, int order, int N, std::uint64_t seed) {
    if (m < 1 || order < 1) throw ValueError("design_dt_pe_sequence: m and order must be >= 1");
    const int min_length = order * (m + 1) - 1;
    if (N < min_length) {
        throw InfeasibleError("design_dt_pe_sequence: full row rank is impossible, need N >= " +
                              std::to_string(min_length) + " (order*(m+1)-1), got N = " +
                              std::to_string(N));
    }
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t draw_seed = seed + attempt;
        UniformRng rng(draw_seed);
        std::vector<Vector> values;
        values.reserve(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            Vector mu(m);
            for (int c = 0; c < m; ++c) mu(c) = rng.symmetric();
            values.push_back(std::move(mu));
        }
        if (dt_pe_check(values, order)) {
            return DtPeSequence{std::move(values), order, draw_seed};
        }
    }
    throw InfeasibleError("design_dt_pe_sequence: no full-rank draw after 64 attempts");
}

/// Sampling intervals T near 2*pi*k / |Im(lambda_i - lambda_j)| lose
/// controllability under zero-order-hold discretization. Returns the resonant
/// values in (0, t_max].
inline std::vector<double> resonant_periods(const Matrix& A, double t_max) {
    const auto ev = eigenvalues(A);
    std::vector<double> out;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        for (std::size_t j = i + 1; j < ev.size(); ++j) {
            const double d = std::abs(ev[i].imag() - ev[j].imag());
            if (d == 0.0) continue;
            const double base = 2.0 * M_PI / d;
            for (int k = 1; static_cast<double>(k) * base <= t_max * (1.0 + 1e-12); ++k) {
                out.push_back(static_cast<double>(k) * base);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              out.end());
    return out;
}

/// Checks that T stays at least guard*T away from every resonant period.
/// Matrices with a purely real spectrum impose no constraint.
inline bool check_sampling_interval(const Matrix& A, double T, double guard = 1e-6) {
    if (!(T > 0.0)) throw ValueError("check_sampling_interval: T must be positive");
    if (guard < 0.0) throw ValueError("check_sampling_interval: guard must be nonnegative");
    const double margin = guard * T;
    for (const double bad : resonant_periods(A, T + margin + 1.0)) {
        if (std::abs(T - bad) <= margin) return false;
    }
    return true;
}

/// Piecewise-constant input holding level mu_i on [iT, (i+1)T).
inline InputFunction build_pe_input(const DtPeSequence& seq, double T) {
    if (!(T > 0.0)) throw ValueError("build_pe_input: T must be positive");
    PiecewiseConstant pc;
    pc.levels = seq.values;
    pc.hold = T;
    return InputFunction(std::move(pc));
}

/// Aligned (input, state, output) records from one experiment, sharing the
/// same grid, plus the certification state attached after certify_pe.
struct PeDataset {
    SampledSignal u, x, y;
    std::optional<int> order_certified;
    std::vector<double> sigma_min_profile;  // per offset, filled on certification
    std::optional<InputFunction> u_source;  // analytic input when collected in-process
    std::uint64_t seed = 0;

    PeDataset(SampledSignal u_, SampledSignal x_, SampledSignal y_)
        : u(std::move(u_)), x(std::move(x_)), y(std::move(y_)) {
        const auto same_grid = [&](const SampledSignal& a) {
            return a.delta() == u.delta() && a.segments() == u.segments() &&
                   a.segment_length() == u.segment_length();
        };
        if (!same_grid(x) || !same_grid(y)) {
            throw DimensionError("PeDataset: u, x, y must share one sampling grid");
        }
    }

    int m() const { return u.dim(); }
    int n() const { return x.dim(); }
    int p() const { return y.dim(); }
    int segments() const { return u.segments(); }
    double segment_length() const { return u.segment_length(); }
    double delta() const { return u.delta(); }
    int offsets() const { return u.samples_per_segment(); }
};

/// Simulates the plant over [0, N*T] and packages the sampled records.
/// No certification is performed here.
inline PeDataset collect_dataset(const LtiSystem& sys, const Vector& x0, const InputFunction& u,
                                 double T, int N, double delta) {
    if (!(T > 0.0) || N < 1) throw ValueError("collect_dataset: T and N must be positive");
    const auto traj = simulate(sys, x0, u, static_cast<double>(N) * T, delta);
    PeDataset data(SampledSignal(delta, T, N, traj.inputs), SampledSignal(delta, T, N, traj.states),
                   SampledSignal(delta, T, N, traj.outputs));
    data.u_source = u;
    return data;
}

struct PeOffsetRecord {
    int offset = 0;
    int rank = 0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Evaluated witness of the excitation rank condition across all offsets.
struct PeCertificate {
    int order = 0;  // L + n
    int depth = 0;  // L
    int required_rank = 0;
    bool passed = false;
    std::vector<PeOffsetRecord> per_offset;
    int worst_offset = 0;

    double sigma_min_overall() const {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& r : per_offset) worst = std::min(worst, r.sigma_min);
        return per_offset.empty() ? 0.0 : worst;
    }
};

/// Sweeps every grid offset k and records rank and extreme singular values of
/// the stacked matrix [deep input Hankel; state row], which must have full
/// row rank L*m + n at all offsets for the data to be persistently exciting
/// of order L + n.
inline PeCertificate certify_pe(const PeDataset& data, int L, double rank_tol = kDefaultRankTol) {
    const int N = data.segments();
    const int m = data.m();
    const int n = data.n();
    if (L < 1) throw ValueError("certify_pe: L must be >= 1");
    const int min_segments = L * (m + 1) + n - 1;
    if (N < min_segments) {
        throw InfeasibleError("certify_pe: the stacked matrix cannot have full row rank, need N >= " +
                              std::to_string(min_segments) + " (L*(m+1)+n-1), got N = " +
                              std::to_string(N));
    }

    PeCertificate cert;
    cert.order = L + n;
    cert.depth = L;
    cert.required_rank = L * m + n;
    cert.passed = true;
    cert.per_offset.reserve(static_cast<std::size_t>(data.offsets()));

    double worst_sigma = std::numeric_limits<double>::infinity();
    for (int k = 0; k < data.offsets(); ++k) {
        const Matrix Hu = hankel_deep(data.u, L, k).matrix;
        const Matrix Hx = hankel_row(data.x, 0, N - L, k).matrix;
        Matrix stacked(Hu.rows() + Hx.rows(), Hu.cols());
        stacked.topRows(Hu.rows()) = Hu;
        stacked.bottomRows(Hx.rows()) = Hx;

        const SvdResult dec = svd(stacked);
        const int rank = rank_from_singular_values(dec.singular_values, stacked.rows(),
                                                   stacked.cols(), rank_tol);
        PeOffsetRecord rec;
        rec.offset = k;
        rec.rank = rank;
        rec.sigma_max = dec.singular_values.size() > 0 ? dec.singular_values(0) : 0.0;
        rec.sigma_min = dec.singular_values.size() > 0
                            ? dec.singular_values(dec.singular_values.size() - 1)
                            : 0.0;
        if (rank != cert.required_rank) cert.passed = false;
        if (rec.sigma_min < worst_sigma) {
            worst_sigma = rec.sigma_min;
            cert.worst_offset = k;
        }
        cert.per_offset.push_back(rec);
    }
    return cert;
}

/// Stores the certification outcome on the dataset. The order is attached
/// only when the certificate passed.
inline void attach_certificate(PeDataset& data, const PeCertificate& cert) {
    data.sigma_min_profile.clear();
    data.sigma_min_profile.reserve(cert.per_offset.size());
    for (const auto& r : cert.per_offset) data.sigma_min_profile.push_back(r.sigma_min);
    data.order_certified = cert.passed ? std::optional<int>(cert.order) : std::nullopt;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json sequence_to_json(const DtPeSequence& seq) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& mu : seq.values) {
        nlohmann::json level = nlohmann::json::array();
        for (Eigen::Index c = 0; c < mu.size(); ++c) level.push_back(mu(c));
        values.push_back(level);
    }
    return nlohmann::json{{"order", seq.order}, {"seed", seq.seed}, {"values", values}};
}

inline DtPeSequence sequence_from_json(const nlohmann::json& j) {
    DtPeSequence seq;
    seq.order = j.at("order").get<int>();
    seq.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& level : j.at("values")) {
        Vector mu(static_cast<Eigen::Index>(level.size()));
        for (Eigen::Index c = 0; c < mu.size(); ++c) {
            mu(c) = level.at(static_cast<std::size_t>(c)).get<double>();
        }
        seq.values.push_back(std::move(mu));
    }
    if (seq.values.empty()) throw IoError("sequence JSON has no values");
    return seq;
}

inline void save_dataset(const PeDataset& data, const std::filesystem::path& dir) {
    write_signal_csv(data.u, dir / "u.csv");
    write_signal_csv(data.x, dir / "x.csv");
    write_signal_csv(data.y, dir / "y.csv");
    const nlohmann::json sidecar{{"T", data.segment_length()}, {"N", data.segments()},
                                 {"delta", data.delta()},      {"m", data.m()},
                                 {"n", data.n()},              {"p", data.p()},
                                 {"seed", data.seed}};
    write_text_atomic(dir / "dataset.json", sidecar.dump(2) + "\n");
}

inline PeDataset load_dataset(const std::filesystem::path& dir) {
    nlohmann::json sidecar;
    try {
        sidecar = nlohmann::json::parse(read_text(dir / "dataset.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid dataset.json in " + dir.string() + ": " + e.what());
    }
    const double T = sidecar.at("T").get<double>();
    const int N = sidecar.at("N").get<int>();
    PeDataset data(read_signal_csv(dir / "u.csv", T, N), read_signal_csv(dir / "x.csv", T, N),
                   read_signal_csv(dir / "y.csv", T, N));
    data.seed = sidecar.value("seed", std::uint64_t{0});
    if (data.m() != sidecar.at("m").get<int>() || data.n() != sidecar.at("n").get<int>() ||
        data.p() != sidecar.at("p").get<int>()) {
        throw IoError("dataset.json dimensions disagree with the CSV files in " + dir.string());
    }
    return data;
}

inline nlohmann::json certificate_to_json(const PeCertificate& cert) {
    nlohmann::json per_offset = nlohmann::json::array();
    for (const auto& r : cert.per_offset) {
        per_offset.push_back(nlohmann::json{{"k", r.offset},
                                            {"rank", r.rank},
                                            {"sigma_min", r.sigma_min},
                                            {"sigma_max", r.sigma_max}});
    }
    return nlohmann::json{{"order", cert.order},
                          {"depth", cert.depth},
                          {"required_rank", cert.required_rank},
                          {"passed", cert.passed},
                          {"worst_offset", cert.worst_offset},
                          {"sigma_min_overall", cert.sigma_min_overall()},
                          {"per_offset", per_offset}};
}

inline PeCertificate certificate_from_json(const nlohmann::json& j) {
    PeCertificate cert;
    cert.order = j.at("order").get<int>();
    cert.depth = j.at("depth").get<int>();
    cert.required_rank = j.at("required_rank").get<int>();
    cert.passed = j.at("passed").get<bool>();
    cert.worst_offset = j.at("worst_offset").get<int>();
    for (const auto& r : j.at("per_offset")) {
        cert.per_offset.push_back(PeOffsetRecord{r.at("k").get<int>(), r.at("rank").get<int>(),
                                                 r.at("sigma_min").get<double>(),
                                                 r.at("sigma_max").get<double>()});
    }
    return cert;
}

}  // namespace ctwillems
