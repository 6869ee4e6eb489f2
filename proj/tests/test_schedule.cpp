#include "test_helpers.hpp"
#include "twindeph/schedule.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace twindeph;
using namespace twindeph::schedule;
using Catch::Approx;

TEST_CASE("per-arm split examples", "[schedule]") {
    SECTION("consecutive: arm 1 first, then arm 2") {
        const auto sched = PlateSchedule::consecutive();
        REQUIRE(times_at(sched, 120.0) == std::pair{120.0, 0.0});
        REQUIRE(times_at(sched, 250.0) == std::pair{199.0, 51.0});
    }
    SECTION("simultaneous: both arms from the start") {
        const auto sched = PlateSchedule::simultaneous();
        REQUIRE(times_at(sched, 100.0) == std::pair{50.0, 50.0});
        REQUIRE(times_at(sched, 398.0) == std::pair{199.0, 199.0});
    }
    SECTION("intermediate offset") {
        const PlateSchedule sched{100.0};
        REQUIRE(times_at(sched, 60.0) == std::pair{60.0, 0.0});
        REQUIRE(times_at(sched, 150.0) == std::pair{125.0, 25.0});
        REQUIRE(times_at(sched, 350.0) == std::pair{199.0, 151.0});
    }
}

TEST_CASE("split is continuous, conserving, and monotone", "[schedule]") {
    for (const double o : {0.0, 40.0, 100.0, 160.0, 199.0}) {
        const PlateSchedule sched{o};
        SECTION("offset " + std::to_string(o)) {
            double prev1 = 0.0, prev2 = 0.0;
            for (double x = 0.0; x <= kTotalMax; x += 0.5) {
                const auto [x1, x2] = times_at(sched, x);
                REQUIRE(x1 + x2 == Approx(x).margin(1e-12));
                REQUIRE(x1 >= prev1 - 1e-12);
                REQUIRE(x2 >= prev2 - 1e-12);
                REQUIRE(x1 <= kArmMax + 1e-12);
                prev1 = x1;
                prev2 = x2;
            }
            // closing the gap across each breakpoint
            for (const double bp : {o, kTotalMax - o}) {
                const auto lo = times_at(sched, std::max(0.0, bp - 1e-9));
                const auto hi = times_at(sched, std::min(kTotalMax, bp + 1e-9));
                REQUIRE(std::abs(lo.first - hi.first) < 1e-8);
                REQUIRE(std::abs(lo.second - hi.second) < 1e-8);
            }
            const auto end = times_at(sched, kTotalMax);
            REQUIRE(end.first == kArmMax);
            REQUIRE(end.second == kArmMax);
        }
    }
}

TEST_CASE("split rejects out-of-range input", "[schedule]") {
    REQUIRE_THROWS_AS(times_at(PlateSchedule{}, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(times_at(PlateSchedule{}, 398.5), std::invalid_argument);
    REQUIRE_THROWS_AS(times_at(PlateSchedule{-5.0}, 10.0), std::invalid_argument);
    REQUIRE_THROWS_AS(times_at(PlateSchedule{200.0}, 10.0), std::invalid_argument);
}

TEST_CASE("spectrum from decay depth", "[schedule]") {
    const auto s = spectrum_from_u(4.33, -0.92);
    REQUIRE(s.b == Approx(4.33 / (199.0 * 199.0)).epsilon(1e-14));
    REQUIRE(s.k == -0.92);
    REQUIRE(spectra::gaussian_characteristic(spectrum_from_u(1.0, 0.0), 199.0, 0.0).real() ==
            Approx(std::exp(-1.0)).epsilon(1e-12));
    REQUIRE_NOTHROW(spectrum_from_u(1.0, 0.5));  // positive correlation is a valid model
    REQUIRE_THROWS_AS(spectrum_from_u(-0.1, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(spectrum_from_u(1.0, -1.5), std::invalid_argument);
}

TEST_CASE("Bell-pair trajectories along schedules", "[schedule]") {
    SECTION("uncorrelated spectrum decays monotonically") {
        const auto traj = trajectory(spectrum_from_u(3.0, 0.0), PlateSchedule::consecutive(), 2.0);
        REQUIRE(traj.points.front().x == 0.0);
        REQUIRE(traj.points.front().d == Approx(1.0).epsilon(1e-12));
        REQUIRE(traj.points.back().x == kTotalMax);
        for (std::size_t i = 1; i < traj.points.size(); ++i) {
            REQUIRE(traj.points[i].d <= traj.points[i - 1].d + 1e-12);
        }
    }
    SECTION("perfect anticorrelation with simultaneous insertion is decoherence-free") {
        const auto traj = trajectory(spectrum_from_u(5.0, -1.0), PlateSchedule::simultaneous(), 7.0);
        for (const auto& p : traj.points) REQUIRE(p.d == Approx(1.0).margin(1e-12));
    }
    SECTION("anticorrelated consecutive run dips and then revives") {
        const auto traj = trajectory(spectrum_from_u(4.33, -0.92), PlateSchedule::consecutive(), 1.0);
        const double mid = traj.points[199].d;  // x = 199, arm 1 saturated
        REQUIRE(mid < 0.05);
        REQUIRE(traj.points.back().d ==
                Approx(std::exp(-2.0 * 4.33 * (1.0 - 0.92))).margin(1e-12));
    }
    SECTION("the endpoint does not depend on the schedule") {
        const auto spec = spectrum_from_u(4.33, -0.92);
        const double ref = trajectory(spec, PlateSchedule{0.0}, 199.0).points.back().d;
        for (const double o : {75.0, 100.0, 150.0, 199.0}) {
            const auto traj = trajectory(spec, PlateSchedule{o}, 199.0);
            REQUIRE(traj.points.back().d == Approx(ref).margin(1e-12));
        }
    }
    SECTION("grid model reproduces the closed form along a schedule") {
        const auto spec = spectrum_from_u(2.0, -0.66);
        const auto grid = spectra::AmplitudeGrid::gaussian(spec, 128);
        const auto a = trajectory(spec, PlateSchedule{100.0}, 50.0);
        const auto b = trajectory(grid, PlateSchedule{100.0}, 50.0);
        REQUIRE(a.points.size() == b.points.size());
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            REQUIRE(b.points[i].d == Approx(a.points[i].d).margin(1e-6));
        }
    }
    SECTION("step must be positive") {
        REQUIRE_THROWS_AS(trajectory(spectrum_from_u(1.0, 0.0), PlateSchedule{}, 0.0),
                          std::invalid_argument);
    }
}
