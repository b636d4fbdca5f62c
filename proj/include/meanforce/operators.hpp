// operators.hpp — Dense complex operator algebra for finite-dimensional
// Hilbert spaces: tensor products, partial traces, Hermitian spectral
// calculus, commutators and norms. Everything here is a pure function.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <string>

#include "meanforce/errors.hpp"

namespace meanforce::ops {

using Matrix  = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Index   = Eigen::Index;

// Tolerances used by the operator contracts.
inline constexpr double kHermitianTol = 1e-12;  // relative, see require_hermitian
inline constexpr double kLogFloor     = 1e-14;  // eigenvalue floor before ln
inline constexpr double kNegativityTol = 1e-10; // how negative a "psd" eigenvalue may be

// ------------------------------ basics --------------------------------------

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

inline double frobenius(const Matrix& a) { return a.norm(); }

inline double max_abs(const Matrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline bool all_finite(const Matrix& a) {
    return a.allFinite();
}

inline void require_square(const Matrix& a, const char* who) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << who << ": matrix is " << a.rows() << "x" << a.cols() << ", expected square";
        throw DimensionError(os.str());
    }
}

// max_ij |A_ij - conj(A_ji)|, the absolute Hermiticity defect
inline double hermiticity_defect(const Matrix& a) {
    return max_abs(a - a.adjoint());
}

inline bool is_hermitian(const Matrix& a, double rel_tol = kHermitianTol) {
    if (a.rows() != a.cols()) return false;
    return hermiticity_defect(a) <= rel_tol * std::max(1.0, max_abs(a));
}

inline void require_hermitian(const Matrix& a, const char* who, double rel_tol = kHermitianTol) {
    require_square(a, who);
    const double defect = hermiticity_defect(a);
    const double bound  = rel_tol * std::max(1.0, max_abs(a));
    if (defect > bound) {
        std::ostringstream os;
        os << who << ": matrix is not Hermitian, max asymmetry " << defect
           << " exceeds " << bound;
        throw ContractViolation(os.str());
    }
}

// (M + M†)/2; optionally reports the Frobenius norm of the discarded part.
inline Matrix hermitize(const Matrix& a, double* residual = nullptr) {
    Matrix h = 0.5 * (a + a.adjoint());
    if (residual) *residual = frobenius(a - h);
    return h;
}

// ------------------------------ Pauli helpers --------------------------------

inline Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Matrix sigma_y() {
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

inline Matrix sigma_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

// ------------------------------ tensor space ---------------------------------

// Bipartite S (x) E factorization with the S-major joint index convention:
// joint k = i_S * dim_e + i_E. Every operation below sticks to this layout.
struct TensorSpace {
    Index dim_s{0};
    Index dim_e{0};

    TensorSpace(Index system_dim, Index env_dim) : dim_s(system_dim), dim_e(env_dim) {
        if (dim_s <= 0 || dim_e <= 0) {
            throw DimensionError("TensorSpace: dimensions must be positive");
        }
    }

    Index total() const { return dim_s * dim_e; }

    Index joint(Index i_s, Index i_e) const { return i_s * dim_e + i_e; }
};

// Kronecker product under the S-major convention:
// (A (x) B)[(i*dB+k),(j*dB+l)] = A(i,j) * B(k,l)
inline Matrix tensor_product(const Matrix& a, const Matrix& b) {
    require_square(a, "tensor_product");
    require_square(b, "tensor_product");
    const Index da = a.rows(), db = b.rows();
    Matrix out(da * db, da * db);
    for (Index i = 0; i < da; ++i)
        for (Index j = 0; j < da; ++j)
            out.block(i * db, j * db, db, db) = a(i, j) * b;
    return out;
}

// Trace over the environment factor: (rho_S)_{ij} = sum_nu rho[(i,nu),(j,nu)]
inline Matrix partial_trace_env(const Matrix& rho_se, const TensorSpace& space) {
    require_square(rho_se, "partial_trace_env");
    if (rho_se.rows() != space.total()) {
        std::ostringstream os;
        os << "partial_trace_env: operator dim " << rho_se.rows()
           << " does not match tensor space " << space.dim_s << "x" << space.dim_e;
        throw DimensionError(os.str());
    }
    Matrix out = Matrix::Zero(space.dim_s, space.dim_s);
    for (Index i = 0; i < space.dim_s; ++i)
        for (Index j = 0; j < space.dim_s; ++j) {
            Complex sum(0.0, 0.0);
            for (Index nu = 0; nu < space.dim_e; ++nu)
                sum += rho_se(space.joint(i, nu), space.joint(j, nu));
            out(i, j) = sum;
        }
    return out;
}

// Lift a system (resp. environment) operator to the joint space.
inline Matrix embed_system(const Matrix& a, const TensorSpace& space) {
    return tensor_product(a, identity(space.dim_e));
}

inline Matrix embed_env(const Matrix& b, const TensorSpace& space) {
    return tensor_product(identity(space.dim_s), b);
}

// ------------------------------ spectral calculus ----------------------------

// Eigenvalues ascending, eigenvectors as columns of a unitary.
struct Spectrum {
    RVector values;
    Matrix  vectors;

    Index dim() const { return values.size(); }

    Matrix reconstruct() const {
        return vectors * values.asDiagonal() * vectors.adjoint();
    }
};

inline Spectrum eigh(const Matrix& h) {
    require_hermitian(h, "eigh");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h + h.adjoint()));
    if (solver.info() != Eigen::Success) {
        throw Error("eigh: eigendecomposition failed to converge");
    }
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

// V f(lambda) V† for a real-valued spectral function.
inline Matrix apply_spectral_fn(const Matrix& h, const std::function<double(double)>& f) {
    Spectrum s = eigh(h);
    RVector mapped(s.dim());
    for (Index k = 0; k < s.dim(); ++k) mapped(k) = f(s.values(k));
    return s.vectors * mapped.asDiagonal() * s.vectors.adjoint();
}

// Same with a complex-valued spectral function (phases e^{-it lambda} etc.).
inline Matrix apply_spectral_fn_complex(const Matrix& h, const std::function<Complex(double)>& f) {
    Spectrum s = eigh(h);
    Vector mapped(s.dim());
    for (Index k = 0; k < s.dim(); ++k) mapped(k) = f(s.values(k));
    return s.vectors * mapped.asDiagonal() * s.vectors.adjoint();
}

// Operator logarithm of a (numerically) positive semidefinite matrix.
// Eigenvalues are clamped to `floor` before ln so that rank-deficient density
// matrices stay in-domain; an eigenvalue more negative than kNegativityTol
// (times the spectral scale) is a genuine domain error.
inline Matrix log_floored(const Matrix& m, double floor = kLogFloor) {
    Spectrum s = eigh(m);
    const double scale = std::max(1.0, s.values.cwiseAbs().maxCoeff());
    RVector mapped(s.dim());
    for (Index k = 0; k < s.dim(); ++k) {
        double lambda = s.values(k);
        if (lambda < -kNegativityTol * scale) {
            std::ostringstream os;
            os << "log_floored: eigenvalue " << lambda << " below the log floor";
            throw DomainError(os.str());
        }
        mapped(k) = std::log(std::max(lambda, floor));
    }
    return s.vectors * mapped.asDiagonal() * s.vectors.adjoint();
}

// ------------------------------ commutators ----------------------------------

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("commutator: operand shapes differ");
    }
    return a * b - b * a;
}

inline double commutator_norm(const Matrix& a, const Matrix& b) {
    return frobenius(commutator(a, b));
}

} // namespace meanforce::ops
