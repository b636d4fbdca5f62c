// Self-checks for the independent oracle toolkit. These validate the oracles
// against closed forms only, never against the library.

#include <catch2/catch.hpp>

#include "oracles.hpp"

using oracle::Matrix;
using oracle::Complex;

TEST_CASE("jacobi_eigh diagonalizes a diagonal matrix trivially") {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    m(2, 2) = 2.0;
    auto es = oracle::jacobi_eigh(m);
    CHECK(es.values[0] == Approx(1.0).margin(1e-13));
    CHECK(es.values[1] == Approx(2.0).margin(1e-13));
    CHECK(es.values[2] == Approx(3.0).margin(1e-13));
}

TEST_CASE("jacobi_eigh reproduces Pauli spectra and reconstructs random matrices") {
    Matrix sx(2, 2);
    sx << 0.0, 1.0, 1.0, 0.0;
    auto es = oracle::jacobi_eigh(sx);
    CHECK(es.values[0] == Approx(-1.0).margin(1e-13));
    CHECK(es.values[1] == Approx(+1.0).margin(1e-13));

    std::mt19937_64 rng(911);
    for (int rep = 0; rep < 4; ++rep) {
        Matrix h = oracle::random_hermitian(9, rng);
        auto e = oracle::jacobi_eigh(h);
        Matrix rebuilt = Matrix::Zero(9, 9);
        for (Eigen::Index k = 0; k < 9; ++k)
            rebuilt += e.values[static_cast<size_t>(k)] * e.vectors.col(k) * e.vectors.col(k).adjoint();
        CHECK((rebuilt - h).norm() <= 1e-12 * std::max(1.0, h.norm()));
        CHECK((e.vectors.adjoint() * e.vectors - Matrix::Identity(9, 9)).norm() < 1e-12);
    }
}

TEST_CASE("expm_series matches scalar exponentials and the exp(ln) round trip") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.0;
    d(1, 1) = 1.0;
    Matrix e = oracle::expm_series(-std::log(2.0) * d);
    CHECK(e(0, 0).real() == Approx(1.0).epsilon(1e-14));
    CHECK(e(1, 1).real() == Approx(0.5).epsilon(1e-14));

    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 0.25;
    rho(1, 1) = 0.75;
    Matrix back = oracle::expm_series(oracle::logm_jacobi(rho));
    CHECK((back - rho).norm() < 1e-12);
}

TEST_CASE("oracle partition function matches the two-level closed form") {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    CHECK(oracle::partition_function(h, std::log(2.0)) == Approx(1.5).epsilon(1e-13));
}

TEST_CASE("oracle mean-force Hamiltonian reduces to H_S when the coupling vanishes") {
    std::mt19937_64 rng(7);
    Matrix h_s = oracle::random_hermitian(2, rng);
    Matrix h_e = oracle::random_hermitian(3, rng);
    Matrix zero = Matrix::Zero(6, 6);
    Matrix ht = oracle::mean_force_hamiltonian(h_s, h_e, zero, 1.3);
    CHECK((ht - h_s).norm() < 1e-10);
}

TEST_CASE("oracle relative entropy matches the classical KL closed form") {
    Matrix r1 = Matrix::Zero(2, 2);
    r1(0, 0) = 1.0;
    Matrix r2 = Matrix::Zero(2, 2);
    r2(0, 0) = 0.5;
    r2(1, 1) = 0.5;
    CHECK(oracle::relative_entropy(r1, r2) == Approx(std::log(2.0)).epsilon(1e-12));
    std::mt19937_64 rng(13);
    Matrix rho = oracle::random_density(3, rng);
    CHECK(oracle::relative_entropy(rho, rho) == Approx(0.0).margin(1e-12));
}
