// config.hpp — Flat key-value run configuration with bracketed sections and
// row-per-line complex matrices ("re,im; re,im"). No structured-format
// dependency: the files are plain text, trivially diffable, and every value is
// bit-exactly specifiable.

#pragma once

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "meanforce/errors.hpp"
#include "meanforce/jaynes_cummings.hpp"
#include "meanforce/operators.hpp"
#include "meanforce/reduced_dynamics.hpp"

namespace meanforce::cli {

using ops::Matrix;

enum class Experiment { static_thermo, evolve, jc, check_commutators };

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::static_thermo: return "static-thermo";
        case Experiment::evolve: return "evolve";
        case Experiment::jc: return "jc";
        case Experiment::check_commutators: return "check-commutators";
    }
    return "?";
}

inline std::optional<Experiment> experiment_from(std::string_view name) {
    if (name == "static-thermo") return Experiment::static_thermo;
    if (name == "evolve") return Experiment::evolve;
    if (name == "jc") return Experiment::jc;
    if (name == "check-commutators") return Experiment::check_commutators;
    return std::nullopt;
}

struct DriveConfig {
    enum class Kind { none, linear, ramp };
    Kind kind{Kind::none};
    double rate{0.0};   // linear: g(t) = rate * t
    double alpha{0.0};  // ramp: g(t) = 1 - e^{-alpha t}
    Matrix matrix;      // H_S(t) = H_S + g(t) * matrix

    bool active() const { return kind != Kind::none; }

    double gain(double t) const {
        switch (kind) {
            case Kind::none: return 0.0;
            case Kind::linear: return rate * t;
            case Kind::ramp: return 1.0 - std::exp(-alpha * t);
        }
        return 0.0;
    }
};

enum class RwaGuard { warn, error, off };

struct RunConfig {
    Experiment experiment{Experiment::jc};
    bool experiment_explicit{false};
    double beta{1.0};

    std::optional<Matrix> h_s, h_e, h_se, rho_s0;
    DriveConfig drive;

    jc::JCParams jc_params;
    bool normalize{true};
    RwaGuard rwa_guard{RwaGuard::warn};

    double t_end{5.0};
    double t_step{0.01};
    double rk_step{1e-3};
    double h_beta{0.0};      // 0 -> 1e-4 * beta
    double tol_traj{1e-6};
    dyn::DriftMode eq18_mode{dyn::DriftMode::literal};
    bool cross_check{false};

    std::string out_path;

    std::vector<std::string> defaults_applied;

    double h_beta_or_default() const {
        return h_beta > 0.0 ? h_beta : gibbs::kBetaStepFactor * beta;
    }

    std::vector<double> grid() const {
        const auto n = static_cast<long>(std::llround(t_end / t_step));
        std::vector<double> g;
        g.reserve(static_cast<size_t>(n) + 1);
        for (long k = 0; k <= n; ++k) g.push_back(static_cast<double>(k) * t_step);
        return g;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline double parse_double(std::string_view text, const std::string& what) {
    const std::string_view t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError(what + ": cannot parse number '" + std::string(t) + "'");
    }
    return value;
}

inline bool parse_bool(std::string_view text, const std::string& what) {
    const std::string_view t = trim(text);
    if (t == "on" || t == "true" || t == "1") return true;
    if (t == "off" || t == "false" || t == "0") return false;
    throw ConfigError(what + ": expected on/off, got '" + std::string(t) + "'");
}

struct Section {
    std::string name; // "" for the global section
    std::vector<std::pair<std::string, std::string>> keys;
    std::vector<std::string> rows; // raw matrix rows
};

inline std::vector<Section> split_sections(std::string_view text) {
    std::vector<Section> sections;
    sections.push_back(Section{});
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        const size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++lineno;

        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            }
            sections.push_back(Section{std::string(trim(line.substr(1, line.size() - 2))), {}, {}});
            continue;
        }
        const size_t eq = line.find('=');
        Section& cur = sections.back();
        if (eq != std::string_view::npos &&
            line.substr(0, eq).find(',') == std::string_view::npos) {
            cur.keys.emplace_back(std::string(trim(line.substr(0, eq))),
                                  std::string(trim(line.substr(eq + 1))));
        } else {
            cur.rows.emplace_back(line);
        }
    }
    return sections;
}

inline Matrix parse_matrix(const Section& s) {
    if (s.rows.empty()) {
        throw ConfigError("matrix section [" + s.name + "] has no rows");
    }
    if (!s.keys.empty()) {
        throw ConfigError("matrix section [" + s.name + "] contains key-value lines");
    }
    std::vector<std::vector<ops::Complex>> rows;
    for (const std::string& raw : s.rows) {
        std::vector<ops::Complex> row;
        std::string_view rest = raw;
        while (!rest.empty()) {
            const size_t semi = rest.find(';');
            std::string_view cell = trim(rest.substr(0, semi));
            rest = (semi == std::string_view::npos) ? std::string_view{}
                                                    : trim(rest.substr(semi + 1));
            if (cell.empty()) continue;
            const size_t comma = cell.find(',');
            if (comma == std::string_view::npos) {
                throw ConfigError("matrix [" + s.name + "]: entry '" + std::string(cell) +
                                  "' is not a 're,im' pair");
            }
            const double re = parse_double(cell.substr(0, comma), "matrix [" + s.name + "]");
            const double im = parse_double(cell.substr(comma + 1), "matrix [" + s.name + "]");
            row.emplace_back(re, im);
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const size_t n = rows.size();
    for (const auto& row : rows) {
        if (row.size() != n) {
            std::ostringstream os;
            os << "matrix [" << s.name << "]: expected a square " << n << "x" << n
               << " table, found a row with " << row.size() << " entries";
            throw ConfigError(os.str());
        }
    }
    Matrix m(static_cast<ops::Index>(n), static_cast<ops::Index>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            m(static_cast<ops::Index>(i), static_cast<ops::Index>(j)) = rows[i][j];
    return m;
}

inline void require_hermitian_config(const Matrix& m, const std::string& name) {
    const double defect = ops::hermiticity_defect(m);
    const double bound = ops::kHermitianTol * std::max(1.0, ops::max_abs(m));
    if (defect > bound) {
        std::ostringstream os;
        os << "matrix [" << name << "] is not Hermitian: max asymmetry " << defect;
        throw ConfigError(os.str());
    }
}

} // namespace detail

// Parse and validate a config file. Defaults applied for omitted keys are
// recorded on the returned object so the runner can echo them to the log.
inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    const std::vector<detail::Section> sections = detail::split_sections(text);

    auto note_default = [&cfg](const std::string& line) { cfg.defaults_applied.push_back(line); };

    bool saw_experiment = false;
    bool saw_beta = false, saw_t_end = false, saw_t_step = false, saw_rk = false;
    bool saw_mode = false, saw_cross = false, saw_h_beta = false, saw_tol = false;

    std::map<std::string, bool> jc_seen;

    for (const detail::Section& s : sections) {
        if (s.name.empty()) {
            if (!s.rows.empty()) {
                throw ConfigError("stray non key-value line before any section: '" + s.rows.front() +
                                  "'");
            }
            for (const auto& [key, value] : s.keys) {
                if (key == "experiment") {
                    const auto e = experiment_from(value);
                    if (!e) throw ConfigError("unknown experiment '" + value + "'");
                    cfg.experiment = *e;
                    cfg.experiment_explicit = true;
                    saw_experiment = true;
                } else if (key == "beta") {
                    cfg.beta = detail::parse_double(value, "beta");
                    saw_beta = true;
                } else if (key == "t_end") {
                    cfg.t_end = detail::parse_double(value, "t_end");
                    saw_t_end = true;
                } else if (key == "t_step") {
                    cfg.t_step = detail::parse_double(value, "t_step");
                    saw_t_step = true;
                } else if (key == "rk_step") {
                    cfg.rk_step = detail::parse_double(value, "rk_step");
                    saw_rk = true;
                } else if (key == "h_beta") {
                    cfg.h_beta = detail::parse_double(value, "h_beta");
                    saw_h_beta = true;
                } else if (key == "tol_traj") {
                    cfg.tol_traj = detail::parse_double(value, "tol_traj");
                    saw_tol = true;
                } else if (key == "eq18_mode") {
                    if (value == "literal") {
                        cfg.eq18_mode = dyn::DriftMode::literal;
                    } else if (value == "log_form") {
                        cfg.eq18_mode = dyn::DriftMode::log_form;
                    } else {
                        throw ConfigError("eq18_mode must be literal or log_form, got '" + value +
                                          "'");
                    }
                    saw_mode = true;
                } else if (key == "cross_check") {
                    cfg.cross_check = detail::parse_bool(value, "cross_check");
                    saw_cross = true;
                } else if (key == "normalize") {
                    cfg.normalize = detail::parse_bool(value, "normalize");
                    jc_seen["normalize"] = true;
                } else if (key == "out") {
                    cfg.out_path = value;
                } else {
                    throw ConfigError("unknown key '" + key + "'");
                }
            }
        } else if (s.name == "H_S" || s.name == "H_E" || s.name == "H_SE" ||
                   s.name == "rho_S0" || s.name == "H_drive") {
            Matrix m = detail::parse_matrix(s);
            if (s.name != "rho_S0") detail::require_hermitian_config(m, s.name);
            if (s.name == "H_S") cfg.h_s = std::move(m);
            else if (s.name == "H_E") cfg.h_e = std::move(m);
            else if (s.name == "H_SE") cfg.h_se = std::move(m);
            else if (s.name == "rho_S0") cfg.rho_s0 = std::move(m);
            else cfg.drive.matrix = std::move(m);
        } else if (s.name == "drive") {
            if (!s.rows.empty()) throw ConfigError("[drive] takes key-value lines only");
            for (const auto& [key, value] : s.keys) {
                if (key == "kind") {
                    if (value == "linear") cfg.drive.kind = DriveConfig::Kind::linear;
                    else if (value == "ramp") cfg.drive.kind = DriveConfig::Kind::ramp;
                    else if (value == "none") cfg.drive.kind = DriveConfig::Kind::none;
                    else throw ConfigError("drive kind must be linear, ramp or none");
                } else if (key == "rate") {
                    cfg.drive.rate = detail::parse_double(value, "drive rate");
                } else if (key == "alpha") {
                    cfg.drive.alpha = detail::parse_double(value, "drive alpha");
                } else {
                    throw ConfigError("unknown key '" + key + "' in [drive]");
                }
            }
        } else if (s.name == "jc") {
            if (!s.rows.empty()) throw ConfigError("[jc] takes key-value lines only");
            for (const auto& [key, value] : s.keys) {
                jc_seen[key] = true;
                if (key == "omega_c") cfg.jc_params.omega_c = detail::parse_double(value, key);
                else if (key == "omega_a") cfg.jc_params.omega_a0 = detail::parse_double(value, key);
                else if (key == "omega_a_rate") {
                    const double rate = detail::parse_double(value, key);
                    if (rate != 0.0) {
                        const double w0 = cfg.jc_params.omega_a0;
                        cfg.jc_params.omega_a = [w0, rate](double t) { return w0 + rate * t; };
                    }
                } else if (key == "omega") cfg.jc_params.coupling = detail::parse_double(value, key);
                else if (key == "alpha") cfg.jc_params.ramp_alpha = detail::parse_double(value, key);
                else if (key == "n_max") {
                    cfg.jc_params.n_max = static_cast<int>(detail::parse_double(value, key));
                } else if (key == "t_end") cfg.jc_params.t_end = detail::parse_double(value, key);
                else if (key == "t_step") cfg.jc_params.t_step = detail::parse_double(value, key);
                else if (key == "quadrature_step") {
                    cfg.jc_params.quadrature_step = detail::parse_double(value, key);
                } else if (key == "normalize") {
                    cfg.normalize = detail::parse_bool(value, "normalize");
                } else if (key == "rwa_guard") {
                    if (value == "warn") cfg.rwa_guard = RwaGuard::warn;
                    else if (value == "error") cfg.rwa_guard = RwaGuard::error;
                    else if (value == "off") cfg.rwa_guard = RwaGuard::off;
                    else throw ConfigError("rwa_guard must be warn, error or off");
                } else {
                    throw ConfigError("unknown key '" + key + "' in [jc]");
                }
            }
        } else {
            throw ConfigError("unknown section [" + s.name + "]");
        }
    }

    // ---- validation ----
    if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) {
        throw ConfigError("beta must be positive");
    }
    cfg.jc_params.beta = cfg.beta;

    if (!(cfg.t_step > 0.0) || !(cfg.t_end > 0.0)) {
        throw ConfigError("time grid: t_end and t_step must be positive");
    }
    const double steps = cfg.t_end / cfg.t_step;
    if (std::abs(steps - std::llround(steps)) > 1e-9) {
        throw ConfigError("time grid: t_end must be an integer multiple of t_step");
    }
    if (!(cfg.rk_step > 0.0)) throw ConfigError("rk_step must be positive");
    const double sub = cfg.t_step / cfg.rk_step;
    if (std::abs(sub - std::llround(sub)) > 1e-9 || sub < 1.0 - 1e-9) {
        throw ConfigError("rk_step must divide t_step");
    }
    if (cfg.h_beta < 0.0) throw ConfigError("h_beta must be positive");
    if (cfg.h_beta >= cfg.beta) {
        if (saw_h_beta) throw ConfigError("h_beta must be smaller than beta");
    }

    const bool needs_matrices = cfg.experiment == Experiment::static_thermo ||
                                cfg.experiment == Experiment::evolve ||
                                cfg.experiment == Experiment::check_commutators;
    if (needs_matrices) {
        if (!cfg.h_s || !cfg.h_e || !cfg.h_se) {
            throw ConfigError(std::string(to_string(cfg.experiment)) +
                              " requires the [H_S], [H_E] and [H_SE] matrices");
        }
        const auto ds = cfg.h_s->rows(), de = cfg.h_e->rows();
        if (cfg.h_se->rows() != ds * de) {
            std::ostringstream os;
            os << "[H_SE] must be " << ds * de << "x" << ds * de << " for dim_S=" << ds
               << ", dim_E=" << de << "; found " << cfg.h_se->rows() << "x" << cfg.h_se->cols();
            throw ConfigError(os.str());
        }
        if (cfg.rho_s0 && cfg.rho_s0->rows() != ds) {
            throw ConfigError("[rho_S0] must match the H_S dimension");
        }
        if (cfg.drive.active()) {
            if (cfg.drive.matrix.size() == 0) {
                throw ConfigError("[drive] requires an [H_drive] matrix");
            }
            if (cfg.drive.matrix.rows() != ds) {
                throw ConfigError("[H_drive] must match the H_S dimension");
            }
            if (cfg.drive.kind == DriveConfig::Kind::ramp && !(cfg.drive.alpha > 0.0)) {
                throw ConfigError("drive ramp requires a positive alpha");
            }
        }
    }

    // ---- defaults echo ----
    if (!saw_experiment) note_default("default applied: experiment = jc");
    if (!saw_beta) note_default("default applied: beta = 1");
    if (cfg.experiment == Experiment::evolve) {
        if (!saw_t_end) note_default("default applied: t_end = 5");
        if (!saw_t_step) note_default("default applied: t_step = 0.01");
        if (!saw_rk) note_default("default applied: rk_step = 0.001");
        if (!saw_mode) note_default("default applied: eq18_mode = literal");
        if (!saw_cross) note_default("default applied: cross_check = off");
        if (!saw_tol) note_default("default applied: tol_traj = 1e-06");
        if (!cfg.rho_s0) note_default("default applied: rho_S0 = gibbs(H_S, beta)");
    }
    if (!saw_h_beta && cfg.experiment != Experiment::check_commutators) {
        note_default("default applied: h_beta = 1e-04 * beta");
    }
    if (cfg.experiment == Experiment::jc) {
        const char* jc_defaults[][2] = {
            {"omega_c", "1"},         {"omega_a", "1.05"},      {"omega", "0.2"},
            {"alpha", "0.5"},         {"n_max", "60"},          {"t_end", "20"},
            {"t_step", "0.01"},       {"quadrature_step", "0.005"}, {"normalize", "on"},
            {"rwa_guard", "warn"},
        };
        for (const auto& kv : jc_defaults) {
            if (!jc_seen.count(kv[0])) {
                note_default(std::string("default applied: ") + kv[0] + " = " + kv[1]);
            }
        }
        const double q = cfg.jc_params.t_step / cfg.jc_params.quadrature_step;
        if (std::abs(q - std::llround(q)) > 1e-9 || q < 1.0 - 1e-9) {
            throw ConfigError("quadrature_step must divide t_step");
        }
    }
    return cfg;
}

} // namespace meanforce::cli
