// fit.hpp — Model predictions and the two-stage trajectory fit
//
// The Gaussian model predicts D(x) = A exp(-b (x1^2 + x2^2 - 2|k| x1 x2)) for
// the Bell probe pair. Fitting inverts that: stage 1 pins (A, b) on the
// decay branch of the consecutive schedule (x <= 199, where x2 = 0), stage 2
// holds them fixed and reads |k| off the revival branch. The family fit adds
// the simultaneous curve, whose decay rate b(1-|k|)/2 closes the system.
//
// Least squares is damped Gauss-Newton with analytic Jacobians, bounds by
// projection, weights 1/sigma^2 when error bars are present. rss is reported
// unweighted (plain sum of squared residuals in D units).

#pragma once

#include "twindeph/analysis.hpp"
#include "twindeph/channel.hpp"
#include "twindeph/schedule.hpp"
#include "twindeph/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace twindeph::analysis {

// Closed-form trace distance between evolved psi+/psi- at total path
// difference x: exp(-b (x1^2 + x2^2 - 2|k| x1 x2)). Coincides with the full
// 4x4 computation whenever k <= 0.
inline double bell_pair_distance(const spectra::GaussianJointSpectrum& spec,
                                 const schedule::PlateSchedule& sched, double x) {
    spec.validate();
    const auto [x1, x2] = schedule::times_at(sched, x);
    const double quad = x1 * x1 + x2 * x2 - 2.0 * std::abs(spec.k) * x1 * x2;
    return std::exp(-spec.b * quad);
}

// ----------------------------- Fit results -----------------------------------

struct FitResult {
    double a{1.0};     // amplitude
    double b{0.0};     // decay coefficient, per lambda0^2
    double k{0.0};     // correlation coefficient, reported <= 0; NaN when undefined
    double rss{0.0};   // unweighted residual sum of squares
    int n_points{0};
    bool degenerate{false};  // a parameter ended pinned at a boundary (b = 0 or |k| = 1)
    double k_err{-1.0};      // 1-sigma on k from residual covariance, < 0 when unavailable

    void validate() const {
        if (!(a > 0.0 && a <= 1.1)) throw std::invalid_argument("FitResult: a must lie in (0, 1.1]");
        if (!(b >= 0.0)) throw std::invalid_argument("FitResult: b must be >= 0");
        if (!std::isnan(k) && !(k >= -1.0 && k <= 0.0)) {
            throw std::invalid_argument("FitResult: k must lie in [-1, 0]");
        }
    }
};

// Fit failure that still carries whatever was determined before the failure.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, FitResult partial_result)
        : std::runtime_error(what), partial(std::move(partial_result)) {}

    FitResult partial;
};

// Model surface implied by a fit: D(x1, x2) = a exp(-b (x1^2 + x2^2 - 2|k| x1 x2)).
inline double family_curve(const FitResult& fit, double x1, double x2) {
    const double q = std::isnan(fit.k) ? 0.0 : std::abs(fit.k);
    return fit.a * std::exp(-fit.b * (x1 * x1 + x2 * x2 - 2.0 * q * x1 * x2));
}

// ----------------------------- Least-squares engine --------------------------

namespace detail {

struct FitData {
    std::vector<double> x, y, w;  // w = 1/sigma^2, or 1 when unweighted
};

// Zero or negative error bars (e.g. the clamped D=1 point) get a floor of a
// third of the smallest positive sigma so they stay finite-weight instead of
// dominating the objective. All-absent sigmas mean unweighted.
inline void assign_weights(const TraceDistanceTrajectory& traj, FitData& lower, FitData& upper,
                           double split) {
    double min_pos = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& p : traj.points) {
        if (p.sigma > 0.0) {
            min_pos = std::min(min_pos, p.sigma);
            any = true;
        }
    }
    const double floor = any ? min_pos / 3.0 : 0.0;
    for (const auto& p : traj.points) {
        FitData& side = p.x <= split ? lower : upper;
        side.x.push_back(p.x);
        side.y.push_back(p.d);
        side.w.push_back(any ? 1.0 / (std::max(p.sigma, floor) * std::max(p.sigma, floor)) : 1.0);
    }
}

inline constexpr int kMaxIterations = 200;
inline constexpr double kRelStepTol = 1e-10;

template <int P>
struct GnOutcome {
    Eigen::Matrix<double, P, 1> p;
    Eigen::Matrix<double, P, P> jtj;  // at the solution, weighted
    double rss_weighted{0.0};
    double rss_plain{0.0};
    int iterations{0};
    bool converged{false};
};

// Damped Gauss-Newton over P parameters. model(x, p, f, jac) evaluates the
// model and its parameter gradient; project clamps into bounds.
template <int P, class ModelFn, class ProjectFn>
GnOutcome<P> gauss_newton(const FitData& data, Eigen::Matrix<double, P, 1> p0, ModelFn model,
                          ProjectFn project) {
    using Vec = Eigen::Matrix<double, P, 1>;
    using Mat = Eigen::Matrix<double, P, P>;
    const std::size_t n = data.x.size();

    const auto weighted_rss = [&](const Vec& q) {
        double s = 0.0;
        double f;
        Vec jac;
        for (std::size_t i = 0; i < n; ++i) {
            model(data.x[i], q, f, jac);
            const double r = data.y[i] - f;
            s += data.w[i] * r * r;
        }
        return s;
    };

    GnOutcome<P> out;
    Vec p = project(p0);
    double rss = weighted_rss(p);
    double lambda = 1e-3;
    bool converged = false;
    int it = 0;

    for (; it < kMaxIterations && !converged; ++it) {
        Mat jtj = Mat::Zero();
        Vec jtr = Vec::Zero();
        double f;
        Vec jac;
        for (std::size_t i = 0; i < n; ++i) {
            model(data.x[i], p, f, jac);
            const double r = data.y[i] - f;
            jtj.noalias() += data.w[i] * jac * jac.transpose();
            jtr.noalias() += data.w[i] * jac * r;
        }
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries) {
            Mat damped = jtj;
            for (int j = 0; j < P; ++j) {
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            }
            const Vec step = damped.ldlt().solve(jtr);
            const Vec cand = project(p + step);
            const double cand_rss = weighted_rss(cand);
            if (cand_rss <= rss * (1.0 + 1e-14)) {
                const double rel = (cand - p).norm() / (p.norm() + 1e-12);
                const double drop = rss - cand_rss;
                p = cand;
                rss = cand_rss;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (rel <= kRelStepTol || drop <= 1e-15 * (rss + 1e-30)) converged = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!accepted) {
            converged = true;  // no downhill step exists: at a (possibly bounded) optimum
        }
    }

    out.p = p;
    out.iterations = it;
    out.converged = converged;
    out.jtj.setZero();
    out.rss_weighted = 0.0;
    out.rss_plain = 0.0;
    double f;
    Vec jac;
    for (std::size_t i = 0; i < n; ++i) {
        model(data.x[i], p, f, jac);
        const double r = data.y[i] - f;
        out.jtj.noalias() += data.w[i] * jac * jac.transpose();
        out.rss_weighted += data.w[i] * r * r;
        out.rss_plain += r * r;
    }
    return out;
}

// pure decay A exp(-c x^2), parameters (A, c)
inline void decay_model(double x, const Eigen::Vector2d& p, double& f, Eigen::Vector2d& jac) {
    const double e = std::exp(-p[1] * x * x);
    f = p[0] * e;
    jac[0] = e;
    jac[1] = -p[0] * x * x * e;
}

inline Eigen::Vector2d project_decay(Eigen::Vector2d p) {
    p[0] = std::clamp(p[0], 1e-8, 1.5);
    p[1] = std::max(p[1], 0.0);
    return p;
}

// log-linear initializer for the decay model; points at or below zero are
// left to the nonlinear stage
inline Eigen::Vector2d decay_init(const FitData& data) {
    double s0 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        if (!(data.y[i] > 1e-12)) continue;
        const double t = data.x[i] * data.x[i];
        const double l = std::log(data.y[i]);
        s0 += 1.0;
        sx += t;
        sxx += t * t;
        sy += l;
        sxy += t * l;
    }
    Eigen::Vector2d p{1.0, 1e-6};
    const double det = s0 * sxx - sx * sx;
    if (s0 >= 2.0 && std::abs(det) > 1e-12 * std::max(1.0, sxx)) {
        const double slope = (s0 * sxy - sx * sy) / det;
        const double intercept = (sy * sxx - sx * sxy) / det;
        p[0] = std::exp(intercept);
        p[1] = -slope;
    }
    return project_decay(p);
}

inline constexpr double kDegenerateB = 1e-14;
inline constexpr double kDegenerateQ = 1.0 - 1e-12;

}  // namespace detail

// ----------------------------- Two-stage fit ---------------------------------

// Stage 1: A exp(-b x^2) on x <= split. Stage 2, with (A, b) frozen:
// A exp(-b (s^2 + (x-s)^2 - 2 q s (x-s))) on x > split, s = split, fitting
// q = |k| alone. k is reported with the negative sign of this source family.
// Flat stage-1 data pins b at 0 and leaves k undefined; that throws a
// FitError carrying the partial result. q pinned at 1 is returned but
// flagged degenerate.
inline FitResult fit_consecutive(const TraceDistanceTrajectory& data,
                                 double split_x = schedule::kArmMax) {
    data.validate();
    detail::FitData lower, upper;
    detail::assign_weights(data, lower, upper, split_x);
    if (lower.x.size() < 4 || upper.x.size() < 4) {
        throw std::invalid_argument("fit_consecutive: need at least 4 points on each side of the split");
    }
    const int n_total = static_cast<int>(lower.x.size() + upper.x.size());

    const auto stage1 =
        detail::gauss_newton<2>(lower, detail::decay_init(lower), detail::decay_model,
                                detail::project_decay);
    FitResult result;
    result.a = stage1.p[0];
    result.b = stage1.p[1];
    result.n_points = n_total;
    if (!stage1.converged) {
        result.k = std::numeric_limits<double>::quiet_NaN();
        throw FitError("fit_consecutive: stage 1 did not converge after " +
                           std::to_string(stage1.iterations) + " iterations",
                       result);
    }
    if (result.b <= detail::kDegenerateB) {
        result.b = 0.0;
        result.k = std::numeric_limits<double>::quiet_NaN();
        result.degenerate = true;
        result.rss = stage1.rss_plain;
        throw FitError("fit_consecutive: no decay on the first branch (b = 0), k is undefined",
                       result);
    }

    const double a = result.a, b = result.b, s = split_x;
    const auto rise_model = [a, b, s](double x, const Eigen::Matrix<double, 1, 1>& p, double& f,
                                      Eigen::Matrix<double, 1, 1>& jac) {
        const double t = x - s;
        f = a * std::exp(-b * (s * s + t * t - 2.0 * p[0] * s * t));
        jac[0] = 2.0 * b * s * t * f;
    };
    const auto project_q = [](Eigen::Matrix<double, 1, 1> p) {
        p[0] = std::clamp(p[0], 0.0, 1.0);
        return p;
    };
    // initialize from the revival peak: D_max = A exp(-b s^2 (1 - q^2))
    double q0 = 0.5;
    if (!upper.y.empty()) {
        const double peak = *std::max_element(upper.y.begin(), upper.y.end());
        if (peak > 1e-12) {
            const double q_sq = 1.0 + std::log(peak / a) / (b * s * s);
            if (q_sq > 0.0 && q_sq <= 1.0) q0 = std::sqrt(q_sq);
        }
    }
    const auto stage2 = detail::gauss_newton<1>(upper, Eigen::Matrix<double, 1, 1>{q0},
                                                rise_model, project_q);
    const double q = stage2.p[0];
    result.k = -q;
    result.degenerate = q >= detail::kDegenerateQ;
    result.rss = stage1.rss_plain + stage2.rss_plain;
    if (!stage2.converged) {
        throw FitError("fit_consecutive: stage 2 did not converge after " +
                           std::to_string(stage2.iterations) + " iterations",
                       result);
    }
    const int dof = static_cast<int>(upper.x.size()) - 1;
    if (dof > 0 && stage2.jtj(0, 0) > 0.0) {
        result.k_err = std::sqrt(stage2.rss_weighted / dof / stage2.jtj(0, 0));
    }
    try {
        result.validate();
    } catch (const std::invalid_argument& e) {
        throw FitError(std::string("fit_consecutive: result out of range: ") + e.what(), result);
    }
    return result;
}

// ----------------------------- Family fit ------------------------------------

struct FamilyFitResult {
    FitResult bottom;    // consecutive curve, offset 199
    FitResult top;       // simultaneous curve, offset 0
    FitResult combined;  // averaged (A0, b0, k0)
};

// Fits the two extreme offsets and averages. The simultaneous curve decays as
// A exp(-c x^2) with c = b (1 - |k|) / 2; c alone cannot split b from k, so
// the stage-1 b is carried over and |k| = 1 - 2c/b read off. datasets maps
// offset -> trajectory; offsets other than 0 and 199 are accepted but do not
// enter the averages.
inline FamilyFitResult fit_family(
    const std::vector<std::pair<double, TraceDistanceTrajectory>>& datasets) {
    const TraceDistanceTrajectory* bottom_traj = nullptr;
    const TraceDistanceTrajectory* top_traj = nullptr;
    for (const auto& [offset, traj] : datasets) {
        if (std::abs(offset - schedule::kArmMax) <= 1e-9) bottom_traj = &traj;
        if (std::abs(offset) <= 1e-9) top_traj = &traj;
    }
    if (bottom_traj == nullptr || top_traj == nullptr) {
        throw std::invalid_argument("fit_family: need both the offset-199 and offset-0 curves");
    }

    FamilyFitResult out;
    out.bottom = fit_consecutive(*bottom_traj);

    top_traj->validate();
    detail::FitData all, none;
    detail::assign_weights(*top_traj, all, none, schedule::kTotalMax + 1.0);
    if (all.x.size() < 4) {
        throw std::invalid_argument("fit_family: need at least 4 points on the offset-0 curve");
    }
    const auto top_fit = detail::gauss_newton<2>(all, detail::decay_init(all),
                                                 detail::decay_model, detail::project_decay);
    if (!top_fit.converged) {
        throw FitError("fit_family: simultaneous-curve fit did not converge", out.bottom);
    }
    const double c = top_fit.p[1];
    const double b1 = out.bottom.b;
    const double q2 = std::clamp(1.0 - 2.0 * c / b1, 0.0, 1.0);
    out.top.a = top_fit.p[0];
    out.top.b = b1;
    out.top.k = -q2;
    out.top.rss = top_fit.rss_plain;
    out.top.n_points = static_cast<int>(all.x.size());
    out.top.degenerate = q2 >= detail::kDegenerateQ;
    const int dof = static_cast<int>(all.x.size()) - 2;
    // var(q2) = (2/b1)^2 var(c), covariance from the (A, c) fit
    if (dof > 0) {
        const Eigen::Matrix2d cov = top_fit.jtj.inverse() * (top_fit.rss_weighted / dof);
        if (cov(1, 1) > 0.0) out.top.k_err = 2.0 / b1 * std::sqrt(cov(1, 1));
    }

    out.combined.a = 0.5 * (out.bottom.a + out.top.a);
    out.combined.b = 0.5 * (out.bottom.b + out.top.b);
    out.combined.k = 0.5 * (out.bottom.k + out.top.k);
    out.combined.rss = out.bottom.rss + out.top.rss;
    out.combined.n_points = out.bottom.n_points + out.top.n_points;
    out.combined.degenerate = out.bottom.degenerate || out.top.degenerate;
    if (out.bottom.k_err >= 0.0 && out.top.k_err >= 0.0) {
        out.combined.k_err = 0.5 * std::hypot(out.bottom.k_err, out.top.k_err);
    }
    return out;
}

// ----------------------------- Probe-pair search -----------------------------

struct BlpOptimum {
    double n{0.0};
    channel::PureTwoQubitState state_a;
    channel::PureTwoQubitState state_b;
    bool bell_pair{true};  // the psi+/psi- pair was at least as good as every sample
};

namespace detail {

inline channel::PureTwoQubitState haar_random_state(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    const auto draw = [&] { return channel::Complex{gauss(rng), gauss(rng)}; };
    return channel::PureTwoQubitState::normalized(draw(), draw(), draw(), draw());
}

template <int N>
double trace_distance_unchecked(const channel::DensityMatrix<N>& a,
                                const channel::DensityMatrix<N>& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<channel::Complex, N, N>> es(
        a.m - b.m, Eigen::EigenvaluesOnly);
    return std::clamp(0.5 * es.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

}  // namespace detail

// Searches initial state pairs for the largest accumulated trace-distance
// rise. The Bell pair psi+/psi- is always evaluated and wins ties; Haar
// samples exist to probe its optimality, not because a better pair is
// expected. Deterministic for fixed seed.
inline BlpOptimum blp_optimize(const spectra::GaussianJointSpectrum& spec,
                               const schedule::PlateSchedule& sched, int n_pairs,
                               std::uint64_t seed, double step = 1.0) {
    if (n_pairs < 1) throw std::invalid_argument("blp_optimize: n_pairs must be >= 1");
    spec.validate();
    sched.validate();
    if (!(step > 0.0)) throw std::invalid_argument("blp_optimize: step must be > 0");

    std::vector<spectra::DecoherenceSet> profile;
    for (double x = 0.0;; x += step) {
        const bool last = x >= schedule::kTotalMax - 1e-9;
        if (last) x = schedule::kTotalMax;
        const auto [x1, x2] = schedule::times_at(sched, x);
        profile.push_back(spectra::decoherence_set(spec, x1, x2));
        if (last) break;
    }

    const auto measure = [&profile](const channel::PureTwoQubitState& sa,
                                    const channel::PureTwoQubitState& sb) {
        double n = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < profile.size(); ++i) {
            const auto rho_a = channel::apply_dephasing(sa, profile[i]);
            const auto rho_b = channel::apply_dephasing(sb, profile[i]);
            const double d = detail::trace_distance_unchecked(rho_a, rho_b);
            if (i > 0) n += std::max(0.0, d - prev);
            prev = d;
        }
        return n;
    };

    BlpOptimum best;
    best.state_a = channel::PureTwoQubitState::psi_plus();
    best.state_b = channel::PureTwoQubitState::psi_minus();
    best.n = measure(best.state_a, best.state_b);

    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_pairs; ++i) {
        const auto sa = detail::haar_random_state(rng);
        const auto sb = detail::haar_random_state(rng);
        const double n = measure(sa, sb);
        if (n > best.n) {
            best = {n, sa, sb, false};
        }
    }
    return best;
}

}  // namespace twindeph::analysis
