// channel.hpp — Two-qubit polarization states and the pure dephasing map
//
// The channel acts on pure two-qubit polarization states (amplitudes on the
// HH, HV, VH, VV basis). Populations are constants of motion; each coherence
// is multiplied by one decoherence factor. apply_dephasing writes that matrix
// down directly; unitary_grid_evolution reproduces it the long way, by
// evolving the full polarization (x) frequency amplitude on a grid and tracing
// the frequencies out. The two must agree to quadrature precision.

#pragma once

#include "twindeph/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace twindeph::channel {

using spectra::Complex;

// ----------------------------- States ---------------------------------------

struct PureTwoQubitState {
    Complex a{};  // HH
    Complex b{};  // HV
    Complex c{};  // VH
    Complex d{};  // VV

    static constexpr double kNormTol = 1e-10;

    double norm_sq() const noexcept {
        return std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d);
    }

    void validate() const {
        if (std::abs(norm_sq() - 1.0) > kNormTol) {
            throw std::invalid_argument("PureTwoQubitState: amplitudes must have unit norm");
        }
    }

    Eigen::Vector4cd vector() const { return Eigen::Vector4cd{a, b, c, d}; }

    // (|HH> + |VV>)/sqrt(2) and (|HH> - |VV>)/sqrt(2): the probe pair whose
    // distinguishability tracks the nonlocal decoherence factor directly.
    static PureTwoQubitState psi_plus() {
        const double s = 1.0 / std::sqrt(2.0);
        return {s, 0.0, 0.0, s};
    }
    static PureTwoQubitState psi_minus() {
        const double s = 1.0 / std::sqrt(2.0);
        return {s, 0.0, 0.0, -s};
    }

    static PureTwoQubitState normalized(Complex a, Complex b, Complex c, Complex d) {
        const double n = std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
        if (!(n > 0.0)) throw std::invalid_argument("PureTwoQubitState: zero vector");
        return {a / n, b / n, c / n, d / n};
    }
};

// ----------------------------- Density matrices ------------------------------

// Fixed-size density matrix with validation thresholds chosen to absorb
// quadrature round-off: Hermiticity and trace to 1e-10, eigenvalue floor
// at -1e-9.
template <int N>
struct DensityMatrix {
    static_assert(N == 2 || N == 4);

    Eigen::Matrix<Complex, N, N> m = Eigen::Matrix<Complex, N, N>::Zero();

    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kEigenvalueFloor = -1e-9;

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> es(m,
                                                                       Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    void validate() const {
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        }
        if (std::abs(m.trace() - Complex{1.0, 0.0}) > kTraceTol) {
            throw std::invalid_argument("DensityMatrix: trace must be 1");
        }
        if (min_eigenvalue() < kEigenvalueFloor) {
            throw std::invalid_argument("DensityMatrix: not positive semidefinite");
        }
    }
};

using DensityMatrix4 = DensityMatrix<4>;
using DensityMatrix2 = DensityMatrix<2>;

inline DensityMatrix4 pure_density(const PureTwoQubitState& psi) {
    psi.validate();
    const Eigen::Vector4cd v = psi.vector();
    DensityMatrix4 rho;
    rho.m = v * v.adjoint();
    return rho;
}

// ----------------------------- Dephasing map ---------------------------------

// The dephased state: populations |a|^2..|d|^2 on the diagonal, and each
// coherence damped by the factor that its frequency-mode overlap produces,
//
//   rho = [ |a|^2      a b* k2    a c* k1    a d* k12 ]
//         [ .          |b|^2      b c* L12   b d* k1  ]
//         [ .          .          |c|^2      c d* k2  ]
//         [ .          .          .          |d|^2    ]
//
// (lower triangle by Hermiticity). Positivity requires every modulus <= 1.
inline DensityMatrix4 apply_dephasing(const PureTwoQubitState& psi,
                                      const spectra::DecoherenceSet& dec) {
    psi.validate();
    if (dec.max_modulus() > 1.0 + 1e-9) {
        throw std::invalid_argument("apply_dephasing: decoherence modulus exceeds 1");
    }
    const Complex a = psi.a, b = psi.b, c = psi.c, d = psi.d;
    DensityMatrix4 rho;
    rho.m(0, 0) = std::norm(a);
    rho.m(1, 1) = std::norm(b);
    rho.m(2, 2) = std::norm(c);
    rho.m(3, 3) = std::norm(d);
    rho.m(0, 1) = a * std::conj(b) * dec.k2;
    rho.m(0, 2) = a * std::conj(c) * dec.k1;
    rho.m(0, 3) = a * std::conj(d) * dec.k12;
    rho.m(1, 2) = b * std::conj(c) * dec.l12;
    rho.m(1, 3) = b * std::conj(d) * dec.k1;
    rho.m(2, 3) = c * std::conj(d) * dec.k2;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < i; ++j) rho.m(i, j) = std::conj(rho.m(j, i));
    }
    return rho;
}

// Partial trace over the other arm. Arm 1's coherence carries k1 only and
// arm 2's carries k2 only: the marginals never see k12 or L12.
inline DensityMatrix2 reduce_to_arm(const DensityMatrix4& rho, int arm) {
    DensityMatrix2 out;
    if (arm == 1) {
        out.m(0, 0) = rho.m(0, 0) + rho.m(1, 1);
        out.m(0, 1) = rho.m(0, 2) + rho.m(1, 3);
        out.m(1, 1) = rho.m(2, 2) + rho.m(3, 3);
    } else if (arm == 2) {
        out.m(0, 0) = rho.m(0, 0) + rho.m(2, 2);
        out.m(0, 1) = rho.m(0, 1) + rho.m(2, 3);
        out.m(1, 1) = rho.m(1, 1) + rho.m(3, 3);
    } else {
        throw std::invalid_argument("reduce_to_arm: arm must be 1 or 2");
    }
    out.m(1, 0) = std::conj(out.m(0, 1));
    return out;
}

// True when the global map is the product of the two local maps, i.e. the
// nonlocal factors carry no information beyond the local ones.
inline bool is_factorized(const spectra::DecoherenceSet& dec, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("is_factorized: tol must be > 0");
    return std::abs(dec.k12 - dec.k1 * dec.k2) <= tol &&
           std::abs(dec.l12 - dec.k1 * std::conj(dec.k2)) <= tol;
}

// ----------------------------- Grid-level oracle -----------------------------

// Brute-force evolution of the joint polarization (x) frequency state. V in
// arm i picks up the relative phase exp(i w_i x_i) per grid frequency (the
// polarization-independent common phase cancels in every density matrix entry
// and is dropped). The frequency modes are then traced out cell by cell.
// Slow on purpose; exists to check apply_dephasing against first principles.
inline DensityMatrix4 unitary_grid_evolution(const PureTwoQubitState& psi,
                                             const spectra::AmplitudeGrid& grid, double x1,
                                             double x2) {
    psi.validate();
    const auto& ax1 = grid.axis1();
    const auto& ax2 = grid.axis2();
    const Eigen::Index n1 = ax1.size();
    const Eigen::Index n2 = ax2.size();

    Eigen::VectorXcd u2(n2);
    for (Eigen::Index j = 0; j < n2; ++j) {
        const double ph = ax2[j] * x2;
        u2[j] = Complex{std::cos(ph), std::sin(ph)};
    }

    const auto& g = grid.amplitudes();
    Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
    Eigen::Vector4cd v;
    for (Eigen::Index i = 0; i < n1; ++i) {
        const double ph = ax1[i] * x1;
        const Complex u1{std::cos(ph), std::sin(ph)};
        for (Eigen::Index j = 0; j < n2; ++j) {
            const Complex gij = g(i, j);
            v[0] = psi.a * gij;
            v[1] = psi.b * u2[j] * gij;
            v[2] = psi.c * u1 * gij;
            v[3] = psi.d * u1 * u2[j] * gij;
            acc.noalias() += v * v.adjoint();
        }
    }
    DensityMatrix4 rho;
    rho.m = acc * grid.cell_area();
    return rho;
}

}  // namespace twindeph::channel
