// gibbs_thermo.hpp — Canonical Gibbs states, the stationary mean-force
// effective Hamiltonian, stationary thermodynamic functions, asymptotic
// limits, relative entropy and the second-law slack.
//
// Conventions: hbar = k_B = 1, all energies dimensionless. Exponentials of
// spectra are always evaluated with the max-shift trick so Gibbs weights never
// overflow; partition functions are carried in log form internally.

#pragma once

#include <cmath>
#include <functional>
#include <sstream>

#include "meanforce/errors.hpp"
#include "meanforce/operators.hpp"

namespace meanforce::gibbs {

using ops::Matrix;
using ops::Index;

inline constexpr double kBetaStepFactor = 1e-4;   // default h_beta = 1e-4 * beta
inline constexpr double kSupportViolationValue = 1e30;

struct InverseTemperature {
    double value;

    explicit InverseTemperature(double beta) : value(beta) {
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw ParameterError("beta must be positive and finite");
        }
    }
};

// ------------------------------ partition functions --------------------------

inline double log_partition_function(const Matrix& h, InverseTemperature beta) {
    ops::Spectrum s = ops::eigh(h);
    const double shift = s.values(0); // smallest eigenvalue
    double acc = 0.0;
    for (Index k = 0; k < s.dim(); ++k) acc += std::exp(-beta.value * (s.values(k) - shift));
    return -beta.value * shift + std::log(acc);
}

inline double partition_function(const Matrix& h, InverseTemperature beta) {
    return std::exp(log_partition_function(h, beta));
}

// ------------------------------ Gibbs states ---------------------------------

struct GibbsState {
    InverseTemperature beta;
    Matrix hamiltonian;
    double log_partition;
    double partition;      // exp(log_partition); may overflow for deep spectra
    Matrix density;        // e^{-beta H} / Z, unit trace by construction
};

inline GibbsState gibbs_state(const Matrix& h, InverseTemperature beta) {
    ops::require_hermitian(h, "gibbs_state");
    ops::Spectrum s = ops::eigh(h);
    const double shift = s.values(0);
    ops::RVector w(s.dim());
    double acc = 0.0;
    for (Index k = 0; k < s.dim(); ++k) {
        w(k) = std::exp(-beta.value * (s.values(k) - shift));
        acc += w(k);
    }
    Matrix density = s.vectors * (w / acc).asDiagonal() * s.vectors.adjoint();
    const double log_z = -beta.value * shift + std::log(acc);
    return GibbsState{beta, h, log_z, std::exp(log_z), std::move(density)};
}

// ------------------------------ mean force -----------------------------------

struct EffectiveHamiltonian {
    InverseTemperature beta;
    double time{0.0};              // 0 for the stationary construction
    Matrix matrix;                 // Htilde_S
    Matrix beta_derivative;        // d_beta Htilde_S, central finite difference
    double log_effective_partition{0.0};
    double effective_partition{1.0}; // Ztilde_S = Z_SE / Z_E
};

namespace detail {

// One evaluation of the stationary mean-force matrix at a given beta:
//   Htilde_S(beta) = -(1/beta) ln[ Ztilde_S Tr_E rho_{SE,beta} ],  Ztilde_S = Z_SE / Z_E
inline std::pair<Matrix, double> mean_force_matrix(const Matrix& h_s, const Matrix& h_e,
                                                   const Matrix& h_se, const ops::TensorSpace& space,
                                                   InverseTemperature beta) {
    if (h_s.rows() != space.dim_s || h_e.rows() != space.dim_e || h_se.rows() != space.total()) {
        throw DimensionError("mean_force_hamiltonian: operator dims do not match the tensor space");
    }
    const Matrix h_tot = ops::embed_system(h_s, space) + ops::embed_env(h_e, space) + h_se;
    ops::require_hermitian(h_tot, "mean_force_hamiltonian (total Hamiltonian)");

    const GibbsState joint = gibbs_state(h_tot, beta);
    const Matrix reduced = ops::partial_trace_env(joint.density, space);
    const double log_z_eff = joint.log_partition - log_partition_function(h_e, beta);

    // ln(Ztilde * R) = ln R + ln(Ztilde) I, so the scalar factor moves out of the log.
    Matrix ht = -(ops::log_floored(reduced) +
                  log_z_eff * Matrix::Identity(space.dim_s, space.dim_s)) / beta.value;
    return {ops::hermitize(ht), log_z_eff};
}

} // namespace detail

inline EffectiveHamiltonian mean_force_hamiltonian(const Matrix& h_s, const Matrix& h_e,
                                                   const Matrix& h_se, const ops::TensorSpace& space,
                                                   InverseTemperature beta,
                                                   double h_beta = 0.0) {
    if (h_beta == 0.0) h_beta = kBetaStepFactor * beta.value;
    if (!(h_beta > 0.0)) throw ParameterError("mean_force_hamiltonian: h_beta must be positive");

    auto [matrix, log_z_eff] = detail::mean_force_matrix(h_s, h_e, h_se, space, beta);
    auto [plus, lzp]  = detail::mean_force_matrix(h_s, h_e, h_se, space,
                                                  InverseTemperature(beta.value + h_beta));
    auto [minus, lzm] = detail::mean_force_matrix(h_s, h_e, h_se, space,
                                                  InverseTemperature(beta.value - h_beta));
    (void)lzp;
    (void)lzm;
    Matrix deriv = ops::hermitize((plus - minus) / (2.0 * h_beta));

    EffectiveHamiltonian eff{beta, 0.0, std::move(matrix), std::move(deriv),
                             log_z_eff, std::exp(log_z_eff)};
    return eff;
}

// rho_tilde = e^{-beta Htilde} / Tr e^{-beta Htilde}
inline Matrix effective_density(const EffectiveHamiltonian& eff) {
    return gibbs_state(eff.matrix, eff.beta).density;
}

// ------------------------------ beta derivative ------------------------------

// Central difference of an arbitrary beta -> matrix builder, Hermitian part taken.
inline Matrix beta_derivative(const std::function<Matrix(double)>& builder,
                              InverseTemperature beta, double h_beta) {
    if (!(h_beta > 0.0)) throw ParameterError("beta_derivative: h_beta must be positive");
    const Matrix plus = builder(beta.value + h_beta);
    const Matrix minus = builder(beta.value - h_beta);
    return ops::hermitize((plus - minus) / (2.0 * h_beta));
}

// ------------------------------ thermo functions -----------------------------

struct StationaryThermo {
    double internal_energy;
    double free_energy;
    double entropy;
};

inline StationaryThermo stationary_thermo(const EffectiveHamiltonian& eff, InverseTemperature beta) {
    if (std::abs(eff.beta.value - beta.value) > 1e-12 * beta.value) {
        throw ParameterError("stationary_thermo: beta does not match the effective Hamiltonian");
    }
    const Matrix rho = effective_density(eff);
    const Matrix log_rho = ops::log_floored(rho);
    const Matrix& ht = eff.matrix;
    const Matrix& dh = eff.beta_derivative;
    const double b = beta.value;

    StationaryThermo t{};
    t.internal_energy = (rho * (ht + b * dh)).trace().real();
    t.free_energy     = (rho * (ht + log_rho / b)).trace().real();
    t.entropy         = (rho * (b * b * dh - log_rho)).trace().real();
    return t;
}

// Equilibrium/asymptotic values built from the bare system Hamiltonian.
inline StationaryThermo asymptotic_thermo(const Matrix& h_s, InverseTemperature beta) {
    const GibbsState g = gibbs_state(h_s, beta);
    const Matrix log_rho = ops::log_floored(g.density);
    StationaryThermo t{};
    t.internal_energy = (g.density * h_s).trace().real();
    t.free_energy     = -g.log_partition / beta.value;
    t.entropy         = -(g.density * log_rho).trace().real();
    return t;
}

// ------------------------------ relative entropy -----------------------------

struct RelativeEntropyResult {
    double value;
    bool support_violation;
};

// S(rho1 || rho2) = Tr(rho1 ln rho1 - rho1 ln rho2) with floored logs.
// If rho1 has weight on the floored (numerically zero) eigenspace of rho2 the
// divergence is infinite; that is reported as a flagged large-finite value so
// sweeps can continue.
inline RelativeEntropyResult relative_entropy_checked(const Matrix& rho1, const Matrix& rho2) {
    ops::require_hermitian(rho1, "relative_entropy (rho1)", 1e-10);
    ops::require_hermitian(rho2, "relative_entropy (rho2)", 1e-10);
    if (rho1.rows() != rho2.rows()) throw DimensionError("relative_entropy: dims differ");
    if (std::abs(rho1.trace().real() - 1.0) > 1e-8 || std::abs(rho2.trace().real() - 1.0) > 1e-8) {
        throw ContractViolation("relative_entropy: inputs must have unit trace");
    }

    const ops::Spectrum s1 = ops::eigh(rho1);
    const ops::Spectrum s2 = ops::eigh(rho2);
    const Index n = rho1.rows();

    double support_weight = 0.0;
    for (Index j = 0; j < n; ++j) {
        if (s2.values(j) < ops::kLogFloor) {
            support_weight += std::abs((s2.vectors.col(j).adjoint() * rho1 * s2.vectors.col(j))(0, 0));
        }
    }
    if (support_weight > 1e-10) {
        return {kSupportViolationValue, true};
    }

    double value = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double p = std::max(s1.values(i), 0.0);
        value += p * std::log(std::max(p, ops::kLogFloor));
    }
    for (Index i = 0; i < n; ++i) {
        const double p = std::max(s1.values(i), 0.0);
        if (p == 0.0) continue;
        for (Index j = 0; j < n; ++j) {
            const double q = std::max(s2.values(j), ops::kLogFloor);
            const double overlap = std::norm(s1.vectors.col(i).dot(s2.vectors.col(j)));
            value -= p * overlap * std::log(q);
        }
    }
    return {value, false};
}

inline double relative_entropy(const Matrix& rho1, const Matrix& rho2) {
    return relative_entropy_checked(rho1, rho2).value;
}

// ------------------------------ second law -----------------------------------

// Left-hand side of the entropy inequality: S(t) - S(0) - beta (E(t) - E(0)).
inline double second_law_slack(double entropy_t, double entropy_0,
                               double energy_t, double energy_0,
                               InverseTemperature beta) {
    return (entropy_t - entropy_0) - beta.value * (energy_t - energy_0);
}

} // namespace meanforce::gibbs
