// schedule.hpp — Quartz-plate insertion schedules
//
// The lab control variable is the total effective path difference x in
// lambda0 units, grown from 0 to 398 by inserting plates. A schedule maps x
// to the per-arm arguments (x1, x2). The one-parameter family used here is
// indexed by the offset o at which arm 2 starts growing: arm 1 alone up to o,
// both arms in equal steps until arm 1 saturates at 199, then arm 2 alone.
// Every schedule ends at (199, 199), so the final state is offset-independent.

#pragma once

#include "twindeph/analysis.hpp"
#include "twindeph/channel.hpp"
#include "twindeph/spectra.hpp"

#include <stdexcept>
#include <utility>

namespace twindeph::schedule {

inline constexpr double kArmMax = 199.0;    // per-arm maximum, lambda0 units
inline constexpr double kTotalMax = 398.0;  // x1 + x2 at the end of every schedule

// Spectrum from the dimensionless decay depth u = b * 199^2 (the exponent
// reached by one full arm) and the correlation coefficient.
inline spectra::GaussianJointSpectrum spectrum_from_u(double u, double k) {
    if (!(u >= 0.0)) throw std::invalid_argument("spectrum_from_u: u must be >= 0");
    spectra::GaussianJointSpectrum s;
    s.b = u / (kArmMax * kArmMax);
    s.k = k;
    s.validate();
    return s;
}

struct PlateSchedule {
    double offset{kArmMax};  // x at which arm 2 starts growing, in [0, 199]

    void validate() const {
        if (!(offset >= 0.0 && offset <= kArmMax)) {
            throw std::invalid_argument("PlateSchedule: offset must lie in [0, 199]");
        }
    }

    // arm 1 fully first, then arm 2
    static PlateSchedule consecutive() { return {kArmMax}; }
    // both arms from the start
    static PlateSchedule simultaneous() { return {0.0}; }
};

// Per-arm path differences at total x. Piecewise linear, continuous, and
// conserving: x1 + x2 = x everywhere, both coordinates non-decreasing.
inline std::pair<double, double> times_at(const PlateSchedule& sched, double x) {
    sched.validate();
    if (!(x >= 0.0 && x <= kTotalMax)) {
        throw std::invalid_argument("times_at: x must lie in [0, 398]");
    }
    const double o = sched.offset;
    if (x <= o) return {x, 0.0};
    if (x <= kTotalMax - o) return {o + (x - o) / 2.0, (x - o) / 2.0};
    return {kArmMax, x - kArmMax};
}

// Trace distance between two initial states evolved along the schedule,
// sampled at x = 0, step, 2*step, ... with the endpoint 398 always included.
// Model is anything decoherence_set accepts (Gaussian spectrum or grid).
template <class Model>
analysis::TraceDistanceTrajectory trajectory(const Model& model, const PlateSchedule& sched,
                                             double step,
                                             const channel::PureTwoQubitState& state_a,
                                             const channel::PureTwoQubitState& state_b) {
    if (!(step > 0.0)) throw std::invalid_argument("trajectory: step must be > 0");
    sched.validate();
    analysis::TraceDistanceTrajectory traj;
    for (double x = 0.0;; x += step) {
        const bool last = x >= kTotalMax - 1e-9;
        if (last) x = kTotalMax;
        const auto [x1, x2] = times_at(sched, x);
        const auto dec = spectra::decoherence_set(model, x1, x2);
        const auto rho_a = channel::apply_dephasing(state_a, dec);
        const auto rho_b = channel::apply_dephasing(state_b, dec);
        traj.points.push_back({x, analysis::trace_distance(rho_a, rho_b), -1.0});
        if (last) break;
    }
    return traj;
}

// Default probe pair: the Bell states psi+/psi-.
template <class Model>
analysis::TraceDistanceTrajectory trajectory(const Model& model, const PlateSchedule& sched,
                                             double step = 1.0) {
    return trajectory(model, sched, step, channel::PureTwoQubitState::psi_plus(),
                      channel::PureTwoQubitState::psi_minus());
}

}  // namespace twindeph::schedule
