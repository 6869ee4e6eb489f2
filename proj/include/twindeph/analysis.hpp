// analysis.hpp — Distinguishability, memory-effect, and entanglement observables
//
// Everything here consumes density matrices or trace-distance trajectories and
// produces scalars. The memory-effect measure is the total accumulated rise of
// the trace distance along a trajectory: zero for monotone (Markovian) decay,
// positive whenever distinguishability flows back.

#pragma once

#include "twindeph/channel.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace twindeph::analysis {

using channel::DensityMatrix;
using channel::DensityMatrix2;
using channel::DensityMatrix4;

// ----------------------------- Trajectories ----------------------------------

// Ordered samples of the trace distance along a schedule. sigma < 0 means "no
// error bar"; noisy estimates may poke above 1 by up to three sigma.
struct TraceDistanceTrajectory {
    struct Point {
        double x{0.0};       // total effective path difference, lambda0 units
        double d{0.0};       // trace distance
        double sigma{-1.0};  // standard error of d, < 0 when absent
    };

    std::vector<Point> points;

    bool has_sigma() const noexcept {
        return !points.empty() && points.front().sigma >= 0.0;
    }

    void validate() const {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& p = points[i];
            if (i > 0 && !(p.x > points[i - 1].x)) {
                throw std::invalid_argument("TraceDistanceTrajectory: x must be strictly increasing");
            }
            const double slack = p.sigma > 0.0 ? 3.0 * p.sigma : 0.0;
            if (!(p.d >= 0.0 && p.d <= 1.0 + slack)) {
                throw std::invalid_argument("TraceDistanceTrajectory: d out of range");
            }
        }
    }
};

// ----------------------------- Trace distance --------------------------------

// D = (1/2) tr |rhoA - rhoB|: half the absolute eigenvalue sum of the
// Hermitian difference. 0 for identical states, 1 for orthogonal supports.
template <int N>
double trace_distance(const DensityMatrix<N>& rho_a, const DensityMatrix<N>& rho_b) {
    rho_a.validate();
    rho_b.validate();
    const Eigen::Matrix<channel::Complex, N, N> diff = rho_a.m - rho_b.m;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<channel::Complex, N, N>> es(diff,
                                                                            Eigen::EigenvaluesOnly);
    const double sum = es.eigenvalues().cwiseAbs().sum();
    return std::clamp(0.5 * sum, 0.0, 1.0);
}

// ----------------------------- Memory-effect measure -------------------------

// Total rise of D along the trajectory: sum of max(0, D_{k+1} - D_k).
// The continuum measure is approached as the sampling step shrinks.
inline double blp_measure(const TraceDistanceTrajectory& traj) {
    if (traj.points.size() < 2) {
        throw std::invalid_argument("blp_measure: need at least 2 points");
    }
    traj.validate();
    double n = 0.0;
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        n += std::max(0.0, traj.points[i].d - traj.points[i - 1].d);
    }
    return n;
}

// Closed form of the measure for the Bell probe pair on the consecutive
// schedule (arm 1 first, then arm 2), with u = b * 199^2: D falls to
// exp(-u) at the handover, rises to the interior maximum exp(-u(1-K^2))
// at x2 = |K|*199, and falls again. The measure is the single rise.
inline double predict_n_consecutive(double u, double k) {
    if (!(u >= 0.0)) throw std::invalid_argument("predict_n_consecutive: u must be >= 0");
    if (!(k >= -1.0 && k <= 0.0)) {
        throw std::invalid_argument("predict_n_consecutive: k must lie in [-1, 0]");
    }
    return std::exp(-u * (1.0 - k * k)) - std::exp(-u);
}

// ----------------------------- Concurrence -----------------------------------

// Wootters concurrence via the spin-flip construction. Computed on the
// Hermitian product sqrt(rho) rho~ sqrt(rho) for numerical stability; its
// eigenvalue square roots, sorted descending, give C = max(0, l1-l2-l3-l4).
inline double concurrence(const DensityMatrix4& rho) {
    rho.validate();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.m);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    const Eigen::Matrix4cd sqrt_rho =
        es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();

    // Y = sigma_y (x) sigma_y, real anti-diagonal (-1, 1, 1, -1)
    Eigen::Matrix4cd y = Eigen::Matrix4cd::Zero();
    y(0, 3) = -1.0;
    y(1, 2) = 1.0;
    y(2, 1) = 1.0;
    y(3, 0) = -1.0;

    const Eigen::Matrix4cd flipped = y * rho.m.conjugate() * y;
    const Eigen::Matrix4cd product = sqrt_rho * flipped * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es2(product, Eigen::EigenvaluesOnly);
    Eigen::Vector4d lambda = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(lambda.data(), lambda.data() + 4, std::greater<double>());
    return std::clamp(lambda[0] - lambda[1] - lambda[2] - lambda[3], 0.0, 1.0);
}

}  // namespace twindeph::analysis
