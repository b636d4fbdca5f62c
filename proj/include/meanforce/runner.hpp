// runner.hpp — Experiment orchestration and CSV emission for the CLI. One
// experiment per invocation; a sweep mode fans independent configs out across
// worker threads. Float columns are printed with 17 significant digits in
// scientific notation so identical configs reproduce byte-identical files.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "meanforce/config.hpp"
#include "meanforce/gibbs_thermo.hpp"
#include "meanforce/jaynes_cummings.hpp"
#include "meanforce/operators.hpp"
#include "meanforce/reduced_dynamics.hpp"

namespace meanforce::cli {

inline std::string fmt_float(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

namespace detail {

inline void echo_defaults(const RunConfig& cfg, std::ostream& log) {
    for (const std::string& line : cfg.defaults_applied) log << line << '\n';
}

inline dyn::DrivenHamiltonianSpec make_drive_spec(const RunConfig& cfg) {
    const Matrix h_s = *cfg.h_s;
    if (!cfg.drive.active()) return dyn::DrivenHamiltonianSpec::constant(h_s);
    const DriveConfig d = cfg.drive;
    auto value = [h_s, d](double t) { return (h_s + d.gain(t) * d.matrix).eval(); };
    auto slope = [d](double t) {
        const double g = d.kind == DriveConfig::Kind::linear
                             ? d.rate
                             : d.alpha * std::exp(-d.alpha * t);
        return (g * d.matrix).eval();
    };
    return dyn::DrivenHamiltonianSpec::make(h_s, value, cfg.t_step, slope);
}

} // namespace detail

// ---- static-thermo: one CSV row of stationary mean-force thermodynamics ----

inline void run_static_thermo(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    detail::echo_defaults(cfg, log);
    const ops::TensorSpace space(cfg.h_s->rows(), cfg.h_e->rows());
    const gibbs::InverseTemperature beta(cfg.beta);
    const gibbs::EffectiveHamiltonian eff = gibbs::mean_force_hamiltonian(
        *cfg.h_s, *cfg.h_e, *cfg.h_se, space, beta, cfg.h_beta_or_default());
    const gibbs::StationaryThermo t = gibbs::stationary_thermo(eff, beta);

    const double decoupled_check = ops::frobenius(eff.matrix - *cfg.h_s);
    const double identity_check = t.internal_energy - t.free_energy - t.entropy / cfg.beta;

    out << "beta,E,F,Sigma,Z_eff,decoupled_check,identity_check\n";
    out << fmt_float(cfg.beta) << ',' << fmt_float(t.internal_energy) << ','
        << fmt_float(t.free_energy) << ',' << fmt_float(t.entropy) << ','
        << fmt_float(eff.effective_partition) << ',' << fmt_float(decoupled_check) << ','
        << fmt_float(identity_check) << '\n';
}

// ---- evolve: reduced dynamics plus the time-dependent thermo pipeline ------

inline void run_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    detail::echo_defaults(cfg, log);
    const ops::TensorSpace space(cfg.h_s->rows(), cfg.h_e->rows());
    const gibbs::InverseTemperature beta(cfg.beta);
    const double h_beta = cfg.h_beta_or_default();
    const std::vector<double> times = cfg.grid();

    const bool driven = cfg.drive.active();
    if (driven && cfg.eq18_mode == dyn::DriftMode::log_form) {
        throw ConfigError("log_form applies to undriven runs only");
    }
    const dyn::DrivenHamiltonianSpec spec = detail::make_drive_spec(cfg);

    const Matrix rho_s0 = cfg.rho_s0 ? *cfg.rho_s0 : gibbs::gibbs_state(*cfg.h_s, beta).density;
    if (cfg.rho_s0) ops::require_hermitian(rho_s0, "rho_S0");

    std::function<Matrix(double)> h_s_t;
    if (driven) h_s_t = [&spec](double t) { return spec.at(t); };
    const dyn::ProjectedSystem sys =
        dyn::make_projected_system(*cfg.h_s, *cfg.h_e, *cfg.h_se, space, h_s_t);

    auto integrate = [&](double b) {
        const dyn::JointInitialState init =
            dyn::JointInitialState::product(rho_s0, gibbs::InverseTemperature(b));
        return dyn::integrate_projection(sys, init, *cfg.h_e, times, cfg.rk_step);
    };
    const dyn::ReducedTrajectory center = integrate(cfg.beta);
    const dyn::ReducedTrajectory plus = integrate(cfg.beta + h_beta);
    const dyn::ReducedTrajectory minus = integrate(cfg.beta - h_beta);

    double max_residual = 0.0;
    const std::vector<dyn::ThermoRecord> records = dyn::thermo_trajectory(
        center, plus, minus, h_beta, spec, beta, cfg.eq18_mode, &max_residual);
    log << "hermitization residual (max) = " << max_residual << '\n';

    // optional cross-check against an independent propagation path
    std::vector<double> deviation;
    if (cfg.cross_check) {
        dyn::ReducedTrajectory reference;
        if (!driven) {
            const dyn::JointInitialState init = dyn::JointInitialState::product(rho_s0, beta);
            const dyn::CommutationReport comm =
                dyn::classify_commutation(*cfg.h_s, *cfg.h_e, *cfg.h_se, space);
            if (comm.klass == dyn::CommutationClass::env_commuting ||
                comm.klass == dyn::CommutationClass::both) {
                reference = dyn::propagate_env_commuting(sys, init, *cfg.h_e, times);
                log << "cross-check: env-commuting coupling, reference is the "
                       "block-diagonal propagation\n";
            } else {
                const Matrix h_total = ops::embed_system(*cfg.h_s, space) +
                                       ops::embed_env(*cfg.h_e, space) + *cfg.h_se;
                reference = dyn::evolve_joint_exact(
                    h_total, space, dyn::initial_joint_density(init, *cfg.h_e, space), times);
            }
        } else {
            const dyn::JointInitialState init = dyn::JointInitialState::product(rho_s0, beta);
            reference = dyn::integrate_projection(sys, init, *cfg.h_e, times, cfg.rk_step / 2.0);
            log << "cross-check: driven run, reference is the half-step reintegration\n";
        }
        deviation.reserve(times.size());
        for (size_t k = 0; k < times.size(); ++k) {
            deviation.push_back((center.states[k] - reference.states[k]).norm());
        }
    }

    const char* mode_label = driven ? "driven" : dyn::to_string(cfg.eq18_mode);
    out << "t,E_int,F,Sigma,Q,W,trace_rhoS,second_law_slack";
    if (cfg.cross_check) out << ",oracle_deviation";
    out << ",eq18_mode\n";
    for (size_t k = 0; k < records.size(); ++k) {
        const dyn::ThermoRecord& r = records[k];
        out << fmt_float(r.time) << ',' << fmt_float(r.internal_energy) << ','
            << fmt_float(r.free_energy) << ',' << fmt_float(r.entropy) << ','
            << fmt_float(r.heat) << ',' << fmt_float(r.work) << ',' << fmt_float(r.trace_rho)
            << ',' << fmt_float(r.second_law_slack);
        if (cfg.cross_check) out << ',' << fmt_float(deviation[k]);
        out << ',' << mode_label << '\n';
    }

    if (cfg.cross_check) {
        const double max_dev = *std::max_element(deviation.begin(), deviation.end());
        log << "cross-check max deviation = " << max_dev << " (tol " << cfg.tol_traj << ")\n";
        if (max_dev > cfg.tol_traj) {
            std::ostringstream os;
            os << "evolve cross-check deviation " << max_dev << " exceeds tol_traj "
               << cfg.tol_traj;
            throw OracleDeviation(os.str());
        }
    }
}

// ---- jc: the dressed-doublet pipeline --------------------------------------

inline void run_jc(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    detail::echo_defaults(cfg, log);
    const jc::JCParams& p = cfg.jc_params;
    const jc::ValidationReport rep = jc::validate(p);
    for (const std::string& w : rep.warnings) {
        const bool rwa = w.find("RWA") != std::string::npos;
        if (rwa && cfg.rwa_guard == RwaGuard::off) continue;
        if (rwa && cfg.rwa_guard == RwaGuard::error) throw ConfigError(w);
        log << "warning: " << w << '\n';
    }

    const double h_beta = cfg.h_beta_or_default();
    const jc::JCTrajectory traj = jc::build_trajectory(p, true);
    const jc::JCTrajectory plus = jc::build_trajectory(p, true, p.beta + h_beta);
    const jc::JCTrajectory minus = jc::build_trajectory(p, true, p.beta - h_beta);
    // raw channel only needed when the density columns are requested raw
    const jc::JCTrajectory display =
        cfg.normalize ? traj : jc::build_trajectory(p, false);

    double max_residual = 0.0;
    out << "t,rho_mm,rho_pp,re_rho_mp,im_rho_mp,raw_trace,E_int,Sigma,F,W,Q,"
           "second_law_slack,first_law_residual\n";
    for (double t : p.grid()) {
        const jc::JCThermoRecord r = jc::jc_thermo(t, p, traj, plus, minus, h_beta);
        double residual = 0.0;
        jc::jc_effective_hamiltonian(t, p, traj, &residual);
        max_residual = std::max(max_residual, residual);
        const jc::JCDensity d = display.density_at(display.index_of(t, "run_jc"));
        out << fmt_float(t) << ',' << fmt_float(d.rho_mm) << ',' << fmt_float(d.rho_pp) << ','
            << fmt_float(d.rho_mp.real()) << ',' << fmt_float(d.rho_mp.imag()) << ','
            << fmt_float(d.raw_trace) << ',' << fmt_float(r.internal_energy) << ','
            << fmt_float(r.entropy) << ',' << fmt_float(r.free_energy) << ','
            << fmt_float(r.work) << ',' << fmt_float(r.heat) << ','
            << fmt_float(r.second_law_slack) << ',' << fmt_float(r.first_law_residual) << '\n';
    }
    log << "hermitization residual (max) = " << max_residual << '\n';
}

// ---- check-commutators: text report -----------------------------------------

inline void run_check_commutators(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    detail::echo_defaults(cfg, log);
    const ops::TensorSpace space(cfg.h_s->rows(), cfg.h_e->rows());
    const dyn::CommutationReport rep =
        dyn::classify_commutation(*cfg.h_s, *cfg.h_e, *cfg.h_se, space);
    out << "commutator_norm([I(x)H_E, H_SE]) = " << fmt_float(rep.env_norm) << '\n';
    out << "commutator_norm([H_S(x)I, H_SE]) = " << fmt_float(rep.sys_norm) << '\n';
    out << "classification = " << dyn::to_string(rep.klass) << '\n';
}

inline void run_experiment(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    switch (cfg.experiment) {
        case Experiment::static_thermo: run_static_thermo(cfg, out, log); return;
        case Experiment::evolve: run_evolve(cfg, out, log); return;
        case Experiment::jc: run_jc(cfg, out, log); return;
        case Experiment::check_commutators: run_check_commutators(cfg, out, log); return;
    }
}

// ------------------------------- CLI entry -----------------------------------

struct CliOptions {
    std::string experiment;
    std::string config_path;
    std::string out_path;
    std::string sweep_dir;
    bool cross_check{false};
};

inline CliOptions parse_args(const std::vector<std::string>& args) {
    CliOptions opt;
    size_t i = 0;
    if (i < args.size() && !args[i].empty() && args[i].front() != '-') {
        opt.experiment = args[i++];
    }
    for (; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto need_value = [&](const char* flag) -> const std::string& {
            if (i + 1 >= args.size()) {
                throw ConfigError(std::string(flag) + " requires a value");
            }
            return args[++i];
        };
        if (a == "--config") opt.config_path = need_value("--config");
        else if (a == "--out") opt.out_path = need_value("--out");
        else if (a == "--sweep") opt.sweep_dir = need_value("--sweep");
        else if (a == "--cross-check") opt.cross_check = true;
        else throw ConfigError("unknown argument '" + a + "'");
    }
    if (opt.experiment.empty()) {
        throw ConfigError(
            "usage: meanforce <experiment> --config <path> [--out <path>] [--cross-check] "
            "[--sweep <dir>]");
    }
    if (!experiment_from(opt.experiment)) {
        throw ConfigError("unknown experiment '" + opt.experiment +
                          "' (static-thermo | evolve | jc | check-commutators)");
    }
    if (opt.config_path.empty() && opt.sweep_dir.empty()) {
        throw ConfigError("--config <path> is required (or --sweep <dir>)");
    }
    return opt;
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline RunConfig load_config(const CliOptions& opt, const std::string& path) {
    RunConfig cfg = parse_config(read_file(path));
    const Experiment requested = *experiment_from(opt.experiment);
    if (cfg.experiment_explicit && cfg.experiment != requested && opt.sweep_dir.empty()) {
        throw ConfigError("config file selects experiment '" +
                          std::string(to_string(cfg.experiment)) + "' but the command line says '" +
                          opt.experiment + "'");
    }
    if (!cfg.experiment_explicit) cfg.experiment = requested;
    if (opt.cross_check) cfg.cross_check = true;
    if (!opt.out_path.empty()) cfg.out_path = opt.out_path;
    return cfg;
}

inline int run_one(const RunConfig& cfg, std::ostream& log) {
    if (cfg.out_path.empty()) {
        run_experiment(cfg, std::cout, log);
        return 0;
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + cfg.out_path + "'");
    run_experiment(cfg, out, log);
    return 0;
}

} // namespace detail

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const OracleDeviation*>(&e)) return 4;
    if (dynamic_cast<const Error*>(&e)) return 3;
    return 1;
}

// Entry point behind main(); returns the process exit code.
inline int run_main(const std::vector<std::string>& args, std::ostream& log = std::cerr) {
    try {
        const CliOptions opt = parse_args(args);

        if (opt.sweep_dir.empty()) {
            RunConfig cfg = detail::load_config(opt, opt.config_path);
            return detail::run_one(cfg, log);
        }

        // sweep mode: every *.cfg in the directory, fanned out over workers
        namespace fs = std::filesystem;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(opt.sweep_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".cfg") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw ConfigError("sweep directory '" + opt.sweep_dir + "' contains no .cfg files");
        }

        std::mutex log_mutex;
        std::vector<int> codes(files.size(), 0);
        const size_t workers =
            std::min<size_t>(files.size(), std::max(1u, std::thread::hardware_concurrency()));
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (size_t idx = next.fetch_add(1); idx < files.size();
                     idx = next.fetch_add(1)) {
                    const fs::path& path = files[idx];
                    std::ostringstream local;
                    int code = 0;
                    try {
                        RunConfig cfg = detail::load_config(opt, path.string());
                        if (cfg.out_path.empty()) {
                            fs::path out = path;
                            out.replace_extension(".csv");
                            cfg.out_path = out.string();
                        }
                        detail::run_one(cfg, local);
                    } catch (const std::exception& e) {
                        local << "error: " << e.what() << '\n';
                        code = exit_code_for(e);
                    }
                    std::lock_guard<std::mutex> guard(log_mutex);
                    log << "[" << path.filename().string() << "]\n" << local.str();
                    codes[idx] = code;
                }
            });
        }
        for (std::thread& t : pool) t.join();
        return *std::max_element(codes.begin(), codes.end());
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

} // namespace meanforce::cli
