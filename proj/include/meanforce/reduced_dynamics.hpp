// reduced_dynamics.hpp — Exact joint evolution of rho_SE(t), the projected
// block equation of motion for the reduced density operator, commutation
// special cases, and the time-dependent / driven effective Hamiltonian with
// its thermodynamic functions.
//
// E-space bookkeeping is always done in the eigenbasis of H_E; the reduced
// states returned to callers live in the original S basis (partial traces are
// invariant under environment-only rotations).

#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "meanforce/errors.hpp"
#include "meanforce/gibbs_thermo.hpp"
#include "meanforce/operators.hpp"

namespace meanforce::dyn {

using ops::Index;
using ops::Matrix;
using ops::Complex;
using gibbs::InverseTemperature;

// ------------------------------ initial states -------------------------------

struct JointInitialState {
    enum class Kind { product, entangled };

    Kind kind;
    Matrix rho_s0;       // product: initial system state, unit trace
    double bath_beta{0}; // product: bath inverse temperature
    Matrix amplitudes;   // entangled: a_{i nu}, dim_s x dim_e, sum |a|^2 = 1

    static JointInitialState product(Matrix rho_s0, InverseTemperature bath_beta) {
        ops::require_hermitian(rho_s0, "JointInitialState::product");
        if (std::abs(rho_s0.trace().real() - 1.0) > 1e-10) {
            throw ContractViolation("JointInitialState::product: rho_S(0) must have unit trace");
        }
        JointInitialState s{Kind::product, std::move(rho_s0), bath_beta.value, {}};
        return s;
    }

    static JointInitialState entangled(Matrix amplitudes) {
        const double total = amplitudes.squaredNorm();
        if (std::abs(total - 1.0) > 1e-12) {
            throw ContractViolation(
                "JointInitialState::entangled: amplitudes must be normalized to 1");
        }
        JointInitialState s{Kind::entangled, {}, 0.0, std::move(amplitudes)};
        return s;
    }
};

// rho_SE(0) in the original product basis.
inline Matrix initial_joint_density(const JointInitialState& init, const Matrix& h_e,
                                    const ops::TensorSpace& space) {
    if (init.kind == JointInitialState::Kind::product) {
        if (init.rho_s0.rows() != space.dim_s || h_e.rows() != space.dim_e) {
            throw DimensionError("initial_joint_density: state dims do not match the tensor space");
        }
        const Matrix bath = gibbs::gibbs_state(h_e, InverseTemperature(init.bath_beta)).density;
        return ops::tensor_product(init.rho_s0, bath);
    }
    if (init.amplitudes.rows() != space.dim_s || init.amplitudes.cols() != space.dim_e) {
        throw DimensionError("initial_joint_density: amplitude table does not match the tensor space");
    }
    ops::Vector psi(space.total());
    for (Index i = 0; i < space.dim_s; ++i)
        for (Index nu = 0; nu < space.dim_e; ++nu)
            psi(space.joint(i, nu)) = init.amplitudes(i, nu);
    return psi * psi.adjoint();
}

// ------------------------------ trajectories ---------------------------------

enum class TrajectoryMethod { exact_partial_trace, projected_eom, simplified_diagonal };

struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<Matrix> states;       // rho_S(t_k) in the original S basis
    TrajectoryMethod method{TrajectoryMethod::exact_partial_trace};
    bool product_init{true};
    std::vector<double> joint_purity; // Tr rho_SE(t)^2, exact method only
};

// Exact propagation from a single eigendecomposition of the (time-independent)
// total Hamiltonian: rho(t) = U rho(0) U†, U = e^{-i t H}.
inline ReducedTrajectory evolve_joint_exact(const Matrix& h_total, const ops::TensorSpace& space,
                                            const Matrix& rho_se0, const std::vector<double>& times,
                                            bool product_init = true) {
    ops::require_hermitian(h_total, "evolve_joint_exact");
    if (h_total.rows() != space.total() || rho_se0.rows() != space.total()) {
        throw DimensionError("evolve_joint_exact: dims do not match the tensor space");
    }
    const ops::Spectrum spec = ops::eigh(h_total);
    const Matrix rho_eig = spec.vectors.adjoint() * rho_se0 * spec.vectors;

    ReducedTrajectory traj;
    traj.method = TrajectoryMethod::exact_partial_trace;
    traj.product_init = product_init;
    traj.times = times;
    traj.states.reserve(times.size());
    traj.joint_purity.reserve(times.size());
    const Index n = space.total();
    Matrix rotated(n, n);
    for (double t : times) {
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b)
                rotated(a, b) = rho_eig(a, b) *
                                std::polar(1.0, -t * (spec.values(a) - spec.values(b)));
        const Matrix rho_t = spec.vectors * rotated * spec.vectors.adjoint();
        traj.joint_purity.push_back((rho_t * rho_t).trace().real());
        traj.states.push_back(ops::partial_trace_env(rho_t, space));
    }
    return traj;
}

// ------------------------------ projected EOM --------------------------------

// The total Hamiltonian split into its S part (possibly time dependent), the
// environment spectrum, and the coupling, all expressed with the E factor in
// the eigenbasis of H_E.
struct ProjectedSystem {
    ops::TensorSpace space{1, 1};
    Matrix h_s0;                          // H_S at t = 0
    std::function<Matrix(double)> h_s_t;  // empty -> time independent
    Eigen::VectorXd env_levels;           // eigenvalues of H_E
    Matrix env_vectors;                   // columns: H_E eigenvectors
    Matrix h_se;                          // coupling, E factor rotated

    Matrix system_hamiltonian(double t) const {
        return h_s_t ? h_s_t(t) : h_s0;
    }

    // Full H(t) in the rotated basis.
    Matrix hamiltonian(double t) const {
        Matrix h = ops::embed_system(system_hamiltonian(t), space) + h_se;
        for (Index i = 0; i < space.dim_s; ++i)
            for (Index g = 0; g < space.dim_e; ++g)
                h(space.joint(i, g), space.joint(i, g)) += env_levels(g);
        return h;
    }

    // H_d^gamma: the E-diagonal block of H(t) at fixed gamma.
    Matrix diagonal_block(double t, Index gamma) const {
        Matrix h = system_hamiltonian(t);
        for (Index i = 0; i < space.dim_s; ++i) {
            h(i, i) += env_levels(gamma);
            for (Index j = 0; j < space.dim_s; ++j)
                h(i, j) += h_se(space.joint(i, gamma), space.joint(j, gamma));
        }
        return h;
    }

    // Rotate a joint operator into / out of the E eigenbasis.
    Matrix rotate_in(const Matrix& joint) const {
        const Matrix w = ops::embed_env(env_vectors, space);
        return w.adjoint() * joint * w;
    }
    Matrix rotate_out(const Matrix& joint) const {
        const Matrix w = ops::embed_env(env_vectors, space);
        return w * joint * w.adjoint();
    }
};

inline ProjectedSystem make_projected_system(const Matrix& h_s, const Matrix& h_e,
                                             const Matrix& h_se, const ops::TensorSpace& space,
                                             std::function<Matrix(double)> h_s_t = {}) {
    ops::require_hermitian(h_s, "make_projected_system (H_S)");
    ops::require_hermitian(h_e, "make_projected_system (H_E)");
    ops::require_hermitian(h_se, "make_projected_system (H_SE)");
    if (h_s.rows() != space.dim_s || h_e.rows() != space.dim_e || h_se.rows() != space.total()) {
        throw DimensionError("make_projected_system: operator dims do not match the tensor space");
    }
    ProjectedSystem sys;
    sys.space = space;
    sys.h_s0 = h_s;
    sys.h_s_t = std::move(h_s_t);
    const ops::Spectrum env = ops::eigh(h_e);
    sys.env_levels = env.values;
    sys.env_vectors = env.vectors;
    const Matrix w = ops::embed_env(env.vectors, space);
    sys.h_se = w.adjoint() * h_se * w;
    return sys;
}

// The inter-block flow for block gamma: sum_{beta != gamma} (Omega_{gamma beta}
// - Omega_{beta gamma}) with Omega built from the coupling and the full joint
// state, both in the rotated basis.
inline Matrix omega_sum(const ProjectedSystem& sys, const Matrix& rho_se, Index gamma) {
    const Index ds = sys.space.dim_s, de = sys.space.dim_e;
    Matrix out = Matrix::Zero(ds, ds);
    for (Index beta = 0; beta < de; ++beta) {
        if (beta == gamma) continue;
        for (Index i = 0; i < ds; ++i)
            for (Index k = 0; k < ds; ++k) {
                Complex fwd(0.0, 0.0), bwd(0.0, 0.0);
                for (Index j = 0; j < ds; ++j) {
                    fwd += sys.h_se(sys.space.joint(i, gamma), sys.space.joint(j, beta)) *
                           rho_se(sys.space.joint(j, beta), sys.space.joint(k, gamma));
                    bwd += rho_se(sys.space.joint(i, gamma), sys.space.joint(j, beta)) *
                           sys.h_se(sys.space.joint(j, beta), sys.space.joint(k, gamma));
                }
                out(i, k) += fwd - bwd;
            }
    }
    return out;
}

// d/dt of the E-diagonal blocks: -i [H_d^gamma, rho_gamma] - i omega_sum.
inline std::vector<Matrix> projection_rhs(const ProjectedSystem& sys, const Matrix& rho_se,
                                          double t = 0.0) {
    if (rho_se.rows() != sys.space.total()) {
        throw DimensionError("projection_rhs: joint state does not match the tensor space");
    }
    const Index ds = sys.space.dim_s, de = sys.space.dim_e;
    const Complex mi(0.0, -1.0);
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(de));
    for (Index gamma = 0; gamma < de; ++gamma) {
        Matrix block(ds, ds);
        for (Index i = 0; i < ds; ++i)
            for (Index k = 0; k < ds; ++k)
                block(i, k) = rho_se(sys.space.joint(i, gamma), sys.space.joint(k, gamma));
        const Matrix h_d = sys.diagonal_block(t, gamma);
        out.push_back(mi * (ops::commutator(h_d, block) + omega_sum(sys, rho_se, gamma)));
    }
    return out;
}

namespace detail {

// Full von Neumann right-hand side in the rotated basis; the E-diagonal blocks
// are produced by the literal projected equation, the rest by the commutator.
inline Matrix full_rhs(const ProjectedSystem& sys, const Matrix& rho_se, double t) {
    const Matrix h = sys.hamiltonian(t);
    Matrix out = Complex(0.0, -1.0) * ops::commutator(h, rho_se);
    const std::vector<Matrix> diag = projection_rhs(sys, rho_se, t);
    for (Index gamma = 0; gamma < sys.space.dim_e; ++gamma)
        for (Index i = 0; i < sys.space.dim_s; ++i)
            for (Index k = 0; k < sys.space.dim_s; ++k)
                out(sys.space.joint(i, gamma), sys.space.joint(k, gamma)) =
                    diag[static_cast<size_t>(gamma)](i, k);
    return out;
}

inline Matrix reduce_rotated(const ProjectedSystem& sys, const Matrix& rho_se) {
    // partial trace over E is invariant under the E-basis rotation
    return ops::partial_trace_env(rho_se, sys.space);
}

} // namespace detail

// Classical fixed-step RK4 on the stacked blocks of the joint state. The
// output grid must be a multiple of the step.
inline ReducedTrajectory integrate_projection(const ProjectedSystem& sys,
                                              const JointInitialState& init, const Matrix& h_e,
                                              const std::vector<double>& times, double step) {
    if (!(step > 0.0)) throw ParameterError("integrate_projection: step must be positive");
    if (times.empty() || times.front() != 0.0) {
        throw ParameterError("integrate_projection: time grid must start at 0");
    }
    Matrix rho = sys.rotate_in(initial_joint_density(init, h_e, sys.space));

    ReducedTrajectory traj;
    traj.method = TrajectoryMethod::projected_eom;
    traj.product_init = (init.kind == JointInitialState::Kind::product);
    traj.times = times;
    traj.states.reserve(times.size());
    traj.states.push_back(detail::reduce_rotated(sys, rho));

    double t = 0.0;
    for (size_t k = 1; k < times.size(); ++k) {
        const double span = times[k] - times[k - 1];
        if (!(span > 0.0)) throw ParameterError("integrate_projection: times must ascend");
        const auto substeps = static_cast<long>(std::llround(span / step));
        if (substeps < 1 || std::abs(substeps * step - span) > 1e-9 * std::max(1.0, span)) {
            throw ParameterError("integrate_projection: step does not divide the output grid");
        }
        for (long s = 0; s < substeps; ++s) {
            const Matrix k1 = detail::full_rhs(sys, rho, t);
            const Matrix k2 = detail::full_rhs(sys, rho + 0.5 * step * k1, t + 0.5 * step);
            const Matrix k3 = detail::full_rhs(sys, rho + 0.5 * step * k2, t + 0.5 * step);
            const Matrix k4 = detail::full_rhs(sys, rho + step * k3, t + step);
            rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += step;
        }
        traj.states.push_back(detail::reduce_rotated(sys, rho));
    }
    return traj;
}

// Simplified propagation for the [H_E, H_SE] = 0 case: each E-diagonal block
// evolves under its own H_d^gamma alone, and the reduced state is the block
// sum. Only valid (and only used) when the coupling is E-diagonal.
inline ReducedTrajectory propagate_env_commuting(const ProjectedSystem& sys,
                                                 const JointInitialState& init, const Matrix& h_e,
                                                 const std::vector<double>& times) {
    if (sys.h_s_t) {
        throw ParameterError("propagate_env_commuting: requires a time-independent H_S");
    }
    const Matrix rho0 = sys.rotate_in(initial_joint_density(init, h_e, sys.space));
    const Index ds = sys.space.dim_s, de = sys.space.dim_e;

    std::vector<ops::Spectrum> specs;
    std::vector<Matrix> blocks;
    specs.reserve(static_cast<size_t>(de));
    blocks.reserve(static_cast<size_t>(de));
    for (Index gamma = 0; gamma < de; ++gamma) {
        specs.push_back(ops::eigh(sys.diagonal_block(0.0, gamma)));
        Matrix b(ds, ds);
        for (Index i = 0; i < ds; ++i)
            for (Index k = 0; k < ds; ++k)
                b(i, k) = rho0(sys.space.joint(i, gamma), sys.space.joint(k, gamma));
        blocks.push_back(std::move(b));
    }

    ReducedTrajectory traj;
    traj.method = TrajectoryMethod::simplified_diagonal;
    traj.product_init = (init.kind == JointInitialState::Kind::product);
    traj.times = times;
    traj.states.reserve(times.size());
    for (double t : times) {
        Matrix rho_s = Matrix::Zero(ds, ds);
        for (Index gamma = 0; gamma < de; ++gamma) {
            const ops::Spectrum& s = specs[static_cast<size_t>(gamma)];
            ops::Vector phases(ds);
            for (Index a = 0; a < ds; ++a) phases(a) = std::polar(1.0, -t * s.values(a));
            const Matrix u = s.vectors * phases.asDiagonal() * s.vectors.adjoint();
            rho_s += u * blocks[static_cast<size_t>(gamma)] * u.adjoint();
        }
        traj.states.push_back(std::move(rho_s));
    }
    return traj;
}

// ------------------------------ commutation classes --------------------------

enum class CommutationClass { generic, env_commuting, sys_commuting, both };

inline const char* to_string(CommutationClass c) {
    switch (c) {
        case CommutationClass::generic: return "generic";
        case CommutationClass::env_commuting: return "env_commuting";
        case CommutationClass::sys_commuting: return "sys_commuting";
        case CommutationClass::both: return "both";
    }
    return "generic";
}

struct CommutationReport {
    double env_norm;  // ||[I (x) H_E, H_SE]||_F
    double sys_norm;  // ||[H_S (x) I, H_SE]||_F
    CommutationClass klass;
};

inline CommutationReport classify_commutation(const Matrix& h_s, const Matrix& h_e,
                                              const Matrix& h_se, const ops::TensorSpace& space) {
    const Matrix env = ops::embed_env(h_e, space);
    const Matrix sys = ops::embed_system(h_s, space);
    CommutationReport r{};
    r.env_norm = ops::commutator_norm(env, h_se);
    r.sys_norm = ops::commutator_norm(sys, h_se);
    const double env_scale = std::max(1.0, ops::frobenius(env) * ops::frobenius(h_se));
    const double sys_scale = std::max(1.0, ops::frobenius(sys) * ops::frobenius(h_se));
    const bool env_ok = r.env_norm <= 1e-10 * env_scale;
    const bool sys_ok = r.sys_norm <= 1e-10 * sys_scale;
    r.klass = env_ok ? (sys_ok ? CommutationClass::both : CommutationClass::env_commuting)
                     : (sys_ok ? CommutationClass::sys_commuting : CommutationClass::generic);
    return r;
}

// ------------------------- time-dependent effective H ------------------------

enum class DriftMode { literal, log_form };

inline const char* to_string(DriftMode m) {
    return m == DriftMode::literal ? "literal" : "log_form";
}

// Htilde_S(t, beta) from the reduced state and its initial value. The literal
// mode subtracts the density matrices themselves; the log form subtracts their
// (floored) logarithms. Both anchor to H_S exactly at t = 0.
inline gibbs::EffectiveHamiltonian effective_hamiltonian_t(const Matrix& rho_t, const Matrix& rho_0,
                                                           const Matrix& h_s,
                                                           InverseTemperature beta, double time,
                                                           DriftMode mode,
                                                           double* hermitize_residual = nullptr) {
    if (rho_t.rows() != h_s.rows() || rho_0.rows() != h_s.rows()) {
        throw DimensionError("effective_hamiltonian_t: dims differ");
    }
    Matrix diff;
    if (mode == DriftMode::literal) {
        diff = rho_t - rho_0;
    } else {
        diff = ops::log_floored(rho_t) - ops::log_floored(rho_0);
    }
    Matrix ht = ops::hermitize(h_s - diff / beta.value, hermitize_residual);
    gibbs::EffectiveHamiltonian eff{beta, time, std::move(ht),
                                    Matrix::Zero(h_s.rows(), h_s.cols()), 0.0, 1.0};
    eff.log_effective_partition = gibbs::log_partition_function(eff.matrix, beta);
    eff.effective_partition = std::exp(eff.log_effective_partition);
    return eff;
}

// Instantaneous thermo functions of the evolving system: the effective density
// is rebuilt from Htilde(t, beta) and the beta derivative must already be
// populated on `eff`.
inline gibbs::StationaryThermo thermo_t(const Matrix& rho_t, const gibbs::EffectiveHamiltonian& eff,
                                        InverseTemperature beta) {
    const Matrix rho_eff = gibbs::effective_density(eff);
    const Matrix log_rho_eff = ops::log_floored(rho_eff);
    const double b = beta.value;
    gibbs::StationaryThermo t{};
    t.internal_energy = (rho_t * (eff.matrix + b * eff.beta_derivative)).trace().real();
    t.free_energy     = (rho_t * (eff.matrix + log_rho_eff / b)).trace().real();
    t.entropy         = (rho_t * (b * b * eff.beta_derivative - log_rho_eff)).trace().real();
    return t;
}

// ------------------------------ driven systems --------------------------------

struct DrivenHamiltonianSpec {
    Matrix base;                              // H_S(0)
    std::function<Matrix(double)> value;      // t -> H_S(t)
    std::function<Matrix(double)> derivative; // t -> dH_S/dt

    bool is_static() const { return !derivative; }

    Matrix at(double t) const { return value ? value(t) : base; }

    Matrix slope(double t) const {
        if (derivative) return derivative(t);
        return Matrix::Zero(base.rows(), base.cols());
    }

    static DrivenHamiltonianSpec constant(Matrix h_s) {
        ops::require_hermitian(h_s, "DrivenHamiltonianSpec::constant");
        return DrivenHamiltonianSpec{std::move(h_s), {}, {}};
    }

    // Finite-difference derivative with the given step unless an analytic one
    // is supplied. value(0) must reproduce `base`.
    static DrivenHamiltonianSpec make(Matrix h_s0, std::function<Matrix(double)> value,
                                      double fd_step,
                                      std::function<Matrix(double)> derivative = {}) {
        ops::require_hermitian(h_s0, "DrivenHamiltonianSpec::make");
        if ((value(0.0) - h_s0).cwiseAbs().maxCoeff() > 1e-12) {
            throw ContractViolation("DrivenHamiltonianSpec: value(0) must equal the base H_S");
        }
        if (!derivative) {
            if (!(fd_step > 0.0)) {
                throw ParameterError("DrivenHamiltonianSpec: fd_step must be positive");
            }
            auto v = value;
            derivative = [v, fd_step](double t) {
                return ((v(t + fd_step) - v(t - fd_step)) / (2.0 * fd_step)).eval();
            };
        }
        return DrivenHamiltonianSpec{std::move(h_s0), std::move(value), std::move(derivative)};
    }
};

namespace detail {

inline void require_grid_index(const ReducedTrajectory& traj, size_t k, const char* who) {
    if (k >= traj.times.size()) {
        throw ParameterError(std::string(who) + ": time index beyond the trajectory grid");
    }
}

} // namespace detail

// Driven effective Hamiltonian:
//   Htilde(t) = -(1/beta)(rho(t) - rho(0)) + H_S(0)
//               + integral_0^t (rho(s) - rho(0)) dH_S/ds ds
// with the integral as a composite trapezoid over the trajectory grid.
inline gibbs::EffectiveHamiltonian driven_effective_hamiltonian(const ReducedTrajectory& traj,
                                                                const DrivenHamiltonianSpec& spec,
                                                                InverseTemperature beta, size_t k,
                                                                double* hermitize_residual = nullptr) {
    detail::require_grid_index(traj, k, "driven_effective_hamiltonian");
    if (!traj.product_init) {
        throw ContractViolation(
            "driven_effective_hamiltonian: thermodynamics requires a product initial state");
    }
    const Matrix& rho_0 = traj.states.front();
    const Matrix& rho_t = traj.states[k];

    Matrix integral = Matrix::Zero(rho_0.rows(), rho_0.cols());
    if (!spec.is_static()) {
        auto integrand = [&](size_t j) {
            return ((traj.states[j] - rho_0) * spec.slope(traj.times[j])).eval();
        };
        Matrix prev = integrand(0);
        for (size_t j = 1; j <= k; ++j) {
            Matrix cur = integrand(j);
            integral += 0.5 * (traj.times[j] - traj.times[j - 1]) * (prev + cur);
            prev = std::move(cur);
        }
    }

    Matrix ht =
        ops::hermitize(spec.at(0.0) - (rho_t - rho_0) / beta.value + integral, hermitize_residual);
    gibbs::EffectiveHamiltonian eff{beta, traj.times[k], std::move(ht),
                                    Matrix::Zero(rho_0.rows(), rho_0.cols()), 0.0, 1.0};
    eff.log_effective_partition = gibbs::log_partition_function(eff.matrix, beta);
    eff.effective_partition = std::exp(eff.log_effective_partition);
    return eff;
}

// E_int(t) = Tr{ rho(t) [Htilde + beta d_beta Htilde] }
inline double internal_energy_driven(const Matrix& rho_t, const gibbs::EffectiveHamiltonian& eff,
                                     InverseTemperature beta) {
    return (rho_t * (eff.matrix + beta.value * eff.beta_derivative)).trace().real();
}

// W(t) = integral_0^t Tr[rho(s) dH_S/ds] ds (composite trapezoid).
inline double work_integral(const ReducedTrajectory& traj, const DrivenHamiltonianSpec& spec,
                            size_t k) {
    detail::require_grid_index(traj, k, "work_integral");
    if (spec.is_static()) return 0.0;
    auto integrand = [&](size_t j) {
        return (traj.states[j] * spec.slope(traj.times[j])).trace().real();
    };
    double acc = 0.0;
    double prev = integrand(0);
    for (size_t j = 1; j <= k; ++j) {
        const double cur = integrand(j);
        acc += 0.5 * (traj.times[j] - traj.times[j - 1]) * (prev + cur);
        prev = cur;
    }
    return acc;
}

// (W, Q) with Q = Delta E_int - W; the first-law closure is checked as a
// construction guard.
inline std::pair<double, double> work_and_heat(const ReducedTrajectory& traj,
                                               const DrivenHamiltonianSpec& spec, size_t k,
                                               double e_int_t, double e_int_0) {
    const double w = work_integral(traj, spec, k);
    const double q = e_int_t - e_int_0 - w;
    if (std::abs(e_int_t - e_int_0 - q - w) > 1e-12) {
        throw Error("work_and_heat: first-law closure guard failed");
    }
    return {w, q};
}

// ------------------------------ thermo pipeline ------------------------------

struct ThermoRecord {
    double time{0.0};
    double internal_energy{0.0};
    double free_energy{0.0};
    double entropy{0.0};
    double heat{0.0};
    double work{0.0};
    double trace_rho{0.0};
    double second_law_slack{0.0};
};

// Full time-dependent pipeline over a trajectory sampled at beta and beta +- h
// (the beta derivative of Htilde needs the neighbouring-temperature runs,
// because the bath preparation itself depends on beta). Undriven runs use the
// chosen drift mode, driven runs the integral construction.
inline std::vector<ThermoRecord> thermo_trajectory(const ReducedTrajectory& center,
                                                   const ReducedTrajectory& plus,
                                                   const ReducedTrajectory& minus, double h_beta,
                                                   const DrivenHamiltonianSpec& spec,
                                                   InverseTemperature beta, DriftMode mode,
                                                   double* max_hermitize_residual = nullptr) {
    if (!center.product_init) {
        throw ContractViolation(
            "thermo_trajectory: thermodynamics requires a product initial state");
    }
    if (center.times.size() != plus.times.size() || center.times.size() != minus.times.size()) {
        throw DimensionError("thermo_trajectory: trajectory grids differ");
    }
    if (!(h_beta > 0.0)) throw ParameterError("thermo_trajectory: h_beta must be positive");

    const bool driven = !spec.is_static();
    const InverseTemperature beta_p(beta.value + h_beta);
    const InverseTemperature beta_m(beta.value - h_beta);

    auto build = [&](const ReducedTrajectory& traj, InverseTemperature b, size_t k,
                     double* residual = nullptr) {
        if (driven) return driven_effective_hamiltonian(traj, spec, b, k, residual);
        return effective_hamiltonian_t(traj.states[k], traj.states.front(), spec.base, b,
                                       traj.times[k], mode, residual);
    };

    std::vector<ThermoRecord> out;
    out.reserve(center.times.size());
    double e0 = 0.0, s0 = 0.0;
    for (size_t k = 0; k < center.times.size(); ++k) {
        double residual = 0.0;
        gibbs::EffectiveHamiltonian eff = build(center, beta, k, &residual);
        if (max_hermitize_residual) {
            *max_hermitize_residual = std::max(*max_hermitize_residual, residual);
        }
        const Matrix hp = build(plus, beta_p, k).matrix;
        const Matrix hm = build(minus, beta_m, k).matrix;
        eff.beta_derivative = ops::hermitize((hp - hm) / (2.0 * h_beta));

        const gibbs::StationaryThermo t = thermo_t(center.states[k], eff, beta);
        ThermoRecord rec;
        rec.time = center.times[k];
        rec.internal_energy = t.internal_energy;
        rec.free_energy = t.free_energy;
        rec.entropy = t.entropy;
        rec.trace_rho = center.states[k].trace().real();
        if (k == 0) {
            e0 = t.internal_energy;
            s0 = t.entropy;
        }
        const auto [w, q] = work_and_heat(center, spec, k, t.internal_energy, e0);
        rec.work = w;
        rec.heat = q;
        rec.second_law_slack = gibbs::second_law_slack(t.entropy, s0, t.internal_energy, e0, beta);
        out.push_back(rec);
    }
    return out;
}

} // namespace meanforce::dyn
