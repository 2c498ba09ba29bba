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

// Config-driven experiment runner behind the command-line tool: every stage
// reads its inputs from files and writes its outputs to files, so runs are
// reproducible and individually re-executable.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctwillems/errors.hpp"
#include "ctwillems/excitation.hpp"
#include "ctwillems/hankel.hpp"
#include "ctwillems/input_function.hpp"
#include "ctwillems/io.hpp"
#include "ctwillems/linalg.hpp"
#include "ctwillems/lti.hpp"
#include "ctwillems/reconstruct.hpp"
#include "ctwillems/signal.hpp"

namespace ctwillems {

// ---------------------------------------------------------------------------
// JSON conversions for numeric types and input functions

inline Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw PreconditionError("config: expected a matrix as an array of row arrays");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw PreconditionError("config: ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            M(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return M;
}

inline nlohmann::json matrix_to_json(const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline Vector vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw PreconditionError("config: expected a numeric array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

inline nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline std::vector<std::vector<double>> nested_from_json(const nlohmann::json& j) {
    std::vector<std::vector<double>> out;
    for (const auto& row : j) out.push_back(row.get<std::vector<double>>());
    return out;
}

inline InputFunction input_function_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "piecewise_constant") {
        PiecewiseConstant pc;
        for (const auto& level : j.at("levels")) pc.levels.push_back(vector_from_json(level));
        pc.hold = j.at("hold").get<double>();
        return InputFunction(std::move(pc));
    }
    if (kind == "sinusoid_sum") {
        SinusoidSum s;
        s.amplitudes = nested_from_json(j.at("amplitudes"));
        s.frequencies = nested_from_json(j.at("frequencies"));
        s.phases = nested_from_json(j.at("phases"));
        return InputFunction(std::move(s));
    }
    if (kind == "polynomial") {
        Polynomial p;
        p.coefficients = nested_from_json(j.at("coefficients"));
        return InputFunction(std::move(p));
    }
    if (kind == "square_wave") {
        SquareWave sw;
        for (const auto& level : j.at("levels")) sw.levels.push_back(vector_from_json(level));
        sw.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        return InputFunction(std::move(sw));
    }
    throw PreconditionError("config: unknown input kind '" + kind + "'");
}

inline nlohmann::json input_function_to_json(const InputFunction& f) {
    nlohmann::json j;
    std::visit(
        [&](const auto& impl) {
            using F = std::decay_t<decltype(impl)>;
            if constexpr (std::is_same_v<F, PiecewiseConstant>) {
                j["kind"] = "piecewise_constant";
                nlohmann::json levels = nlohmann::json::array();
                for (const auto& l : impl.levels) levels.push_back(vector_to_json(l));
                j["levels"] = levels;
                j["hold"] = impl.hold;
            } else if constexpr (std::is_same_v<F, SinusoidSum>) {
                j["kind"] = "sinusoid_sum";
                j["amplitudes"] = impl.amplitudes;
                j["frequencies"] = impl.frequencies;
                j["phases"] = impl.phases;
            } else if constexpr (std::is_same_v<F, Polynomial>) {
                j["kind"] = "polynomial";
                j["coefficients"] = impl.coefficients;
            } else {
                j["kind"] = "square_wave";
                nlohmann::json levels = nlohmann::json::array();
                for (const auto& l : impl.levels) levels.push_back(vector_to_json(l));
                j["levels"] = levels;
                j["breakpoints"] = impl.breakpoints;
            }
        },
        f.raw());
    return j;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct SystemConfig {
    std::optional<std::string> preset;
    std::optional<Matrix> A, B, C, D;
    std::uint64_t seed = 0;       // used by the random preset
    std::optional<Vector> x0;     // data-collection initial state, zero if absent
};

struct SamplingConfig {
    double T = 1.0;
    int N = 0;
    double delta = 1e-3;
};

struct ExcitationConfig {
    int order = 0;  // 0 means the reconstruction default n+1
    std::uint64_t seed = 0;
    std::optional<InputFunction> input_override;  // bypasses the designed input
};

struct TargetConfig {
    InputFunction u_bar;
    Vector x_bar0;
};

struct ToleranceConfig {
    double rank_tol = kDefaultRankTol;
    double cutoff_rel = kDefaultPinvCutoff;
    double tol_solve = 1e-6;
    double assumption_guard = 1e-6;
    double oracle_rel = 1e-4;
};

struct ExperimentConfig {
    int version = 1;
    SystemConfig system;
    SamplingConfig sampling;
    ExcitationConfig excitation;
    std::optional<TargetConfig> target;
    ToleranceConfig tolerances;
    std::filesystem::path output_dir = "out";

    LtiSystem build_system() const {
        if (system.preset) return make_preset(*system.preset, system.seed);
        if (!system.A || !system.B || !system.C || !system.D) {
            throw PreconditionError("config: system needs either a preset or all of A, B, C, D");
        }
        return LtiSystem(*system.A, *system.B, *system.C, *system.D);
    }

    Vector initial_state(const LtiSystem& sys) const {
        if (system.x0) {
            if (system.x0->size() != sys.n()) {
                throw PreconditionError("config: x0 must have length n");
            }
            return *system.x0;
        }
        return Vector::Zero(sys.n());
    }

    int resolved_order(const LtiSystem& sys) const {
        return excitation.order > 0 ? excitation.order : sys.n() + 1;
    }

    void validate(const LtiSystem& sys) const {
        if (version != 1) throw PreconditionError("config: unsupported version");
        const auto q = static_cast<std::int64_t>(std::llround(sampling.T / sampling.delta));
        if (!(sampling.delta > 0.0) || q < 1 ||
            std::abs(static_cast<double>(q) * sampling.delta - sampling.T) >
                1e-9 * std::max(1.0, sampling.T)) {
            throw PreconditionError("config: T must be an integer multiple of delta");
        }
        const int m = sys.m();
        const int n = sys.n();
        if (sampling.N < m + 1 + n) {
            throw PreconditionError("config: reconstruction needs N >= (m+1)+n = " +
                                    std::to_string(m + 1 + n));
        }
        const int order = resolved_order(sys);
        if (sampling.N < order * (m + 1) - 1) {
            throw PreconditionError("config: excitation design needs N >= order*(m+1)-1 = " +
                                    std::to_string(order * (m + 1) - 1));
        }
        if (target) {
            if (target->u_bar.dim() != m) {
                throw PreconditionError("config: target input dimension must be m");
            }
            if (target->x_bar0.size() != n) {
                throw PreconditionError("config: target x_bar0 must have length n");
            }
        }
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig cfg;
        cfg.version = j.value("version", 1);

        const auto& sys = j.at("system");
        if (sys.contains("preset")) cfg.system.preset = sys.at("preset").get<std::string>();
        if (sys.contains("A")) cfg.system.A = matrix_from_json(sys.at("A"));
        if (sys.contains("B")) cfg.system.B = matrix_from_json(sys.at("B"));
        if (sys.contains("C")) cfg.system.C = matrix_from_json(sys.at("C"));
        if (sys.contains("D")) cfg.system.D = matrix_from_json(sys.at("D"));
        cfg.system.seed = sys.value("seed", std::uint64_t{0});
        if (sys.contains("x0")) cfg.system.x0 = vector_from_json(sys.at("x0"));

        const auto& sampling = j.at("sampling");
        cfg.sampling.T = sampling.at("T").get<double>();
        cfg.sampling.N = sampling.at("N").get<int>();
        cfg.sampling.delta = sampling.at("delta").get<double>();

        if (j.contains("excitation")) {
            const auto& exc = j.at("excitation");
            cfg.excitation.order = exc.value("order", 0);
            cfg.excitation.seed = exc.value("seed", std::uint64_t{0});
            if (exc.contains("input")) {
                cfg.excitation.input_override = input_function_from_json(exc.at("input"));
            }
        }
        if (j.contains("target")) {
            const auto& tgt = j.at("target");
            cfg.target = TargetConfig{input_function_from_json(tgt.at("u_bar")),
                                      vector_from_json(tgt.at("x_bar0"))};
        }
        if (j.contains("tolerances")) {
            const auto& tol = j.at("tolerances");
            cfg.tolerances.rank_tol = tol.value("rank_tol", kDefaultRankTol);
            cfg.tolerances.cutoff_rel = tol.value("cutoff_rel", kDefaultPinvCutoff);
            cfg.tolerances.tol_solve = tol.value("tol_solve", 1e-6);
            cfg.tolerances.assumption_guard = tol.value("assumption_guard", 1e-6);
            cfg.tolerances.oracle_rel = tol.value("oracle_rel", 1e-4);
        }
        cfg.output_dir = j.value("output_dir", std::string("out"));
        return cfg;
    }

    nlohmann::json to_json() const {
        nlohmann::json sys;
        if (system.preset) sys["preset"] = *system.preset;
        if (system.A) sys["A"] = matrix_to_json(*system.A);
        if (system.B) sys["B"] = matrix_to_json(*system.B);
        if (system.C) sys["C"] = matrix_to_json(*system.C);
        if (system.D) sys["D"] = matrix_to_json(*system.D);
        sys["seed"] = system.seed;
        if (system.x0) sys["x0"] = vector_to_json(*system.x0);

        nlohmann::json exc{{"order", excitation.order}, {"seed", excitation.seed}};
        if (excitation.input_override) {
            exc["input"] = input_function_to_json(*excitation.input_override);
        }
        nlohmann::json j{
            {"version", version},
            {"system", sys},
            {"sampling",
             {{"T", sampling.T}, {"N", sampling.N}, {"delta", sampling.delta}}},
            {"excitation", exc},
            {"tolerances",
             {{"rank_tol", tolerances.rank_tol},
              {"cutoff_rel", tolerances.cutoff_rel},
              {"tol_solve", tolerances.tol_solve},
              {"assumption_guard", tolerances.assumption_guard},
              {"oracle_rel", tolerances.oracle_rel}}},
            {"output_dir", output_dir.string()}};
        if (target) {
            j["target"] = {{"u_bar", input_function_to_json(target->u_bar)},
                           {"x_bar0", vector_to_json(target->x_bar0)}};
        }
        return j;
    }
};

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    try {
        return ExperimentConfig::from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("config: missing or mistyped field: " + std::string(e.what()));
    }
}

// ---------------------------------------------------------------------------
// Stage commands

struct CliFlags {
    std::optional<std::uint64_t> seed_override;
    bool force = false;
    bool quiet = false;
};

namespace detail {

inline ExperimentConfig resolved(ExperimentConfig cfg, const CliFlags& flags) {
    if (flags.seed_override) cfg.excitation.seed = *flags.seed_override;
    return cfg;
}

inline void record_timing(const std::filesystem::path& dir, const std::string& stage,
                          double seconds) {
    nlohmann::json j = nlohmann::json::object();
    const auto path = dir / "timings.json";
    if (std::filesystem::exists(path)) {
        try {
            j = nlohmann::json::parse(read_text(path));
        } catch (...) {
            j = nlohmann::json::object();
        }
    }
    j[stage + "_seconds"] = seconds;
    write_text_atomic(path, j.dump(2) + "\n");
}

class StageTimer {
public:
    StageTimer(const std::filesystem::path& dir, std::string stage)
        : dir_(dir), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
        try {
            record_timing(dir_, stage_, elapsed.count());
        } catch (...) {
            // timing bookkeeping must not mask the stage outcome
        }
    }

private:
    std::filesystem::path dir_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

inline DtPeSequence design_from_config(const ExperimentConfig& cfg, const LtiSystem& sys) {
    return design_dt_pe_sequence(sys.m(), cfg.resolved_order(sys), cfg.sampling.N,
                                 cfg.excitation.seed);
}

}  // namespace detail

/// Designs the excitation sequence, writes it with the sampled input signal,
/// and prints the rank verdict.
inline int cmd_design(const ExperimentConfig& cfg, const CliFlags& flags, std::ostream& out) {
    const auto sys = cfg.build_system();
    cfg.validate(sys);
    detail::StageTimer timer(cfg.output_dir, "design");

    const DtPeSequence seq = detail::design_from_config(cfg, sys);
    const int rank = numerical_rank(dt_hankel(seq.values, seq.order), cfg.tolerances.rank_tol);

    nlohmann::json j = sequence_to_json(seq);
    j["m"] = seq.m();
    j["N"] = seq.length();
    j["required_rank"] = seq.order * seq.m();
    j["rank"] = rank;
    write_text_atomic(cfg.output_dir / "design_sequence.json", j.dump(2) + "\n");

    const InputFunction input = build_pe_input(seq, cfg.sampling.T);
    write_signal_csv(
        SampledSignal::from_function(input, cfg.sampling.T, cfg.sampling.N, cfg.sampling.delta),
        cfg.output_dir / "pe_input.csv");

    if (!flags.quiet) {
        out << "design: rank " << seq.order << "*" << seq.m() << " = " << rank << ": "
            << (rank == seq.order * seq.m() ? "PASS" : "FAIL") << "\n";
    }
    return 0;
}

/// Simulates the plant under the designed (or overridden) input and writes
/// the dataset. A resonant sampling interval only warns; the run continues.
inline int cmd_collect(const ExperimentConfig& cfg, const CliFlags& flags, std::ostream& out) {
    const auto sys = cfg.build_system();
    cfg.validate(sys);
    detail::StageTimer timer(cfg.output_dir, "collect");

    if (!check_sampling_interval(sys.A, cfg.sampling.T, cfg.tolerances.assumption_guard)) {
        out << "warning: sampling interval T = " << format_double(cfg.sampling.T)
            << " is resonant for this system; nearby resonant values:";
        for (const double bad : resonant_periods(sys.A, cfg.sampling.T * 1.5 + 1e-9)) {
            out << " " << format_double(bad);
        }
        out << "\n";
    }

    std::uint64_t data_seed = cfg.excitation.seed;
    InputFunction input = [&]() -> InputFunction {
        if (cfg.excitation.input_override) return *cfg.excitation.input_override;
        const auto seq_path = cfg.output_dir / "design_sequence.json";
        if (std::filesystem::exists(seq_path)) {
            const auto seq = sequence_from_json(nlohmann::json::parse(read_text(seq_path)));
            if (seq.m() != sys.m() || seq.length() != cfg.sampling.N) {
                throw PreconditionError(
                    "collect: design_sequence.json does not match the configured system");
            }
            data_seed = seq.seed;
            return build_pe_input(seq, cfg.sampling.T);
        }
        const auto seq = detail::design_from_config(cfg, sys);
        data_seed = seq.seed;
        return build_pe_input(seq, cfg.sampling.T);
    }();

    PeDataset data = collect_dataset(sys, cfg.initial_state(sys), input, cfg.sampling.T,
                                     cfg.sampling.N, cfg.sampling.delta);
    data.seed = data_seed;
    save_dataset(data, cfg.output_dir);
    if (!flags.quiet) {
        out << "collect: " << data.u.sample_count() << " samples over [0, "
            << format_double(cfg.sampling.N * cfg.sampling.T) << "]\n";
    }
    return 0;
}

/// Sweeps the excitation rank condition over all offsets and writes the
/// certificate. Exit code 0 only when the certificate passes.
inline int cmd_certify(const ExperimentConfig& cfg, const CliFlags& flags, std::ostream& out) {
    const auto sys = cfg.build_system();
    cfg.validate(sys);
    detail::StageTimer timer(cfg.output_dir, "certify");

    const PeDataset data = load_dataset(cfg.output_dir);
    const int L = std::max(1, cfg.resolved_order(sys) - sys.n());
    const PeCertificate cert = certify_pe(data, L, cfg.tolerances.rank_tol);
    write_text_atomic(cfg.output_dir / "certificate.json",
                      certificate_to_json(cert).dump(2) + "\n");
    if (!flags.quiet) {
        out << "certify: order " << cert.order << " -> " << (cert.passed ? "PASSED" : "FAILED")
            << ", worst offset " << cert.worst_offset << " (sigma_min "
            << format_double(cert.sigma_min_overall()) << ")\n";
    }
    return cert.passed ? 0 : 1;
}

/// Solves the parameter ODE for the configured target and writes the
/// reconstruction with its diagnostics. Refuses uncertified data without
/// --force; with --force the violation is recorded instead.
inline int cmd_reconstruct(const ExperimentConfig& cfg, const CliFlags& flags, std::ostream& out) {
    const auto sys = cfg.build_system();
    cfg.validate(sys);
    detail::StageTimer timer(cfg.output_dir, "reconstruct");

    if (!cfg.target) throw PreconditionError("reconstruct: config has no target section");

    PeDataset data = load_dataset(cfg.output_dir);
    const auto cert_path = cfg.output_dir / "certificate.json";
    bool certified = false;
    if (std::filesystem::exists(cert_path)) {
        const auto cert = certificate_from_json(nlohmann::json::parse(read_text(cert_path)));
        attach_certificate(data, cert);
        certified = cert.passed && cert.order >= sys.n() + 1;
    }
    if (!certified && !flags.force) {
        throw PreconditionError(
            "reconstruct: dataset is not certified; run `certify` first or pass --force");
    }

    const TargetSpec target{cfg.target->u_bar, cfg.target->x_bar0};
    SolveOptions opts;
    opts.cutoff_rel = cfg.tolerances.cutoff_rel;
    opts.tol_solve = cfg.tolerances.tol_solve;
    opts.force_uncertified = !certified;

    nlohmann::json diag;
    diag["certified"] = certified;
    diag["forced"] = !certified;
    diag["tol_solve"] = cfg.tolerances.tol_solve;

    ReconstructResult result;
    try {
        result = reconstruct(data, target, opts);
    } catch (const SingularityError& e) {
        if (!flags.force) throw;
        diag["solver_error"] = e.what();
        write_text_atomic(cfg.output_dir / "diagnostics.json", diag.dump(2) + "\n");
        out << "reconstruct: " << e.what() << "\n";
        return 2;
    }

    const OracleComparison cmp =
        compare_with_simulation(result.reconstruction, sys, target, cfg.sampling.T);
    result.reconstruction.oracle_error = cmp.max_abs_error;
    const double oracle_bound = cfg.tolerances.oracle_rel * (1.0 + cmp.max_output_magnitude);

    write_text_atomic(cfg.output_dir / "reconstruction.csv",
                      reconstruction_to_csv(result.reconstruction, target, &cmp.y_oracle));

    const bool residuals_ok = result.alpha.max_input_residual() <= cfg.tolerances.tol_solve &&
                              result.alpha.max_state_residual() <= cfg.tolerances.tol_solve;
    const bool oracle_ok = cmp.max_abs_error <= oracle_bound;
    diag.update(diagnostics_to_json(result.alpha, result.reconstruction));
    diag["oracle_bound"] = oracle_bound;
    diag["max_output_magnitude"] = cmp.max_output_magnitude;
    diag["passed"] = residuals_ok && oracle_ok;
    write_text_atomic(cfg.output_dir / "diagnostics.json", diag.dump(2) + "\n");

    if (!flags.quiet) {
        out << "reconstruct: oracle error " << format_double(cmp.max_abs_error) << " (bound "
            << format_double(oracle_bound) << "), max input residual "
            << format_double(result.alpha.max_input_residual()) << " -> "
            << (residuals_ok && oracle_ok ? "PASS" : "FAIL") << "\n";
    }
    return residuals_ok && oracle_ok ? 0 : 2;
}

/// Aggregates the stage artifacts into one report, echoing the resolved
/// configuration. Every prior stage must have produced its files.
inline int cmd_report(const ExperimentConfig& cfg, const CliFlags& flags, std::ostream& out) {
    const auto sys = cfg.build_system();
    cfg.validate(sys);

    const auto require = [&](const char* stage, const char* file) {
        const auto path = cfg.output_dir / file;
        if (!std::filesystem::exists(path)) {
            throw IoError(std::string("report: missing artifact from stage '") + stage +
                          "': " + path.string());
        }
        return nlohmann::json::parse(read_text(path));
    };

    const nlohmann::json design = require("design", "design_sequence.json");
    (void)require("collect", "dataset.json");
    const nlohmann::json certificate = require("certify", "certificate.json");
    const nlohmann::json diagnostics = require("reconstruct", "diagnostics.json");

    nlohmann::json timings = nlohmann::json::object();
    const auto timings_path = cfg.output_dir / "timings.json";
    if (std::filesystem::exists(timings_path)) {
        timings = nlohmann::json::parse(read_text(timings_path));
    }

    const bool assumption_ok =
        check_sampling_interval(sys.A, cfg.sampling.T, cfg.tolerances.assumption_guard);
    nlohmann::json resonant = nlohmann::json::array();
    for (const double bad : resonant_periods(sys.A, cfg.sampling.T * 1.5 + 1e-9)) {
        resonant.push_back(bad);
    }

    nlohmann::json report{
        {"config", cfg.to_json()},
        {"system", {{"n", sys.n()}, {"m", sys.m()}, {"p", sys.p()}}},
        {"assumption_T", {{"satisfied", assumption_ok}, {"resonant_periods", resonant}}},
        {"design", {{"order", design.at("order")}, {"seed", design.at("seed")},
                    {"rank", design.at("rank")}, {"required_rank", design.at("required_rank")}}},
        {"pe_certificate", {{"order", certificate.at("order")},
                            {"passed", certificate.at("passed")},
                            {"worst_offset", certificate.at("worst_offset")},
                            {"sigma_min_overall", certificate.at("sigma_min_overall")}}},
        {"reconstruction", diagnostics},
        {"timings", timings}};
    write_text_atomic(cfg.output_dir / "report.json", report.dump(2) + "\n");

    if (!flags.quiet) {
        out << "== run report ==\n";
        out << "system: " << (cfg.system.preset ? *cfg.system.preset : std::string("custom"))
            << " (n=" << sys.n() << ", m=" << sys.m() << ", p=" << sys.p() << ")\n";
        out << "sampling: T=" << format_double(cfg.sampling.T) << ", N=" << cfg.sampling.N
            << ", delta=" << format_double(cfg.sampling.delta) << "\n";
        out << "sampling-interval check: " << (assumption_ok ? "satisfied" : "RESONANT") << "\n";
        out << "excitation: order " << design.at("order") << ", seed " << design.at("seed")
            << ", rank " << design.at("rank") << "/" << design.at("required_rank") << "\n";
        out << "certificate: " << (certificate.at("passed").get<bool>() ? "PASSED" : "FAILED")
            << " (sigma_min " << format_double(certificate.at("sigma_min_overall").get<double>())
            << " at worst offset " << certificate.at("worst_offset") << ")\n";
        if (diagnostics.contains("solver_error")) {
            out << "reconstruction: solver error: "
                << diagnostics.at("solver_error").get<std::string>() << "\n";
        } else {
            out << "reconstruction: max input residual "
                << format_double(diagnostics.at("max_input_residual").get<double>())
                << ", max state residual "
                << format_double(diagnostics.at("max_state_residual").get<double>());
            if (diagnostics.contains("oracle_error")) {
                out << ", oracle error "
                    << format_double(diagnostics.at("oracle_error").get<double>()) << " (bound "
                    << format_double(diagnostics.at("oracle_bound").get<double>()) << ")";
            }
            out << " -> " << (diagnostics.value("passed", false) ? "PASS" : "FAIL") << "\n";
        }
        out << "timings:";
        for (const auto& [key, value] : timings.items()) {
            out << " " << key << "=" << format_double(value.get<double>());
        }
        out << "\n";
    }
    return 0;
}

/// design -> collect -> certify -> reconstruct -> report. Without --force the
/// pipeline stops at the first failing stage; with --force it runs through and
/// the report records what failed.
inline int run_all(const ExperimentConfig& cfg, const CliFlags& flags, std::ostream& out) {
    int first_failure = 0;
    const auto track = [&](int code) {
        if (code != 0 && first_failure == 0) first_failure = code;
        return code;
    };

    track(cmd_design(cfg, flags, out));
    track(cmd_collect(cfg, flags, out));
    const int certify_code = track(cmd_certify(cfg, flags, out));
    if (certify_code != 0 && !flags.force) return first_failure;
    const int rec_code = track(cmd_reconstruct(cfg, flags, out));
    if (rec_code != 0 && !flags.force) return first_failure;
    track(cmd_report(cfg, flags, out));
    return first_failure;
}

/// Exit codes: 0 success, 1 precondition or infeasibility, 2 numerical
/// failure, 3 I/O failure.
inline int run_command(const std::string& command, const std::filesystem::path& config_path,
                       const CliFlags& flags, std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig cfg = detail::resolved(load_config(config_path), flags);
        if (command == "design") return cmd_design(cfg, flags, out);
        if (command == "collect") return cmd_collect(cfg, flags, out);
        if (command == "certify") return cmd_certify(cfg, flags, out);
        if (command == "reconstruct") return cmd_reconstruct(cfg, flags, out);
        if (command == "report") return cmd_report(cfg, flags, out);
        if (command == "all") return run_all(cfg, flags, out);
        err << "error: unknown command '" << command << "'\n";
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const SingularityError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ctwillems
