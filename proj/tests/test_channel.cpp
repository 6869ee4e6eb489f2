#include "test_helpers.hpp"
#include "twindeph/channel.hpp"
#include "twindeph/spectra.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

using namespace twindeph;
using namespace twindeph::channel;
using Catch::Approx;

namespace {

spectra::GaussianJointSpectrum spec_from_u(double u, double k) {
    spectra::GaussianJointSpectrum s;
    s.b = u / (199.0 * 199.0);
    s.k = k;
    return s;
}

}  // namespace

TEST_CASE("pure state validation", "[channel]") {
    REQUIRE(PureTwoQubitState::psi_plus().norm_sq() == Approx(1.0).epsilon(1e-14));
    REQUIRE_NOTHROW(PureTwoQubitState::psi_minus().validate());
    PureTwoQubitState unnormalized{1.0, 1.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(unnormalized.validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(PureTwoQubitState::normalized(0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("dephasing map structure", "[channel]") {
    std::mt19937_64 rng(31);
    SECTION("identity decoherence reproduces the projector") {
        for (int i = 0; i < 20; ++i) {
            const auto psi = th::random_pure_state(rng);
            const auto rho = apply_dephasing(psi, spectra::DecoherenceSet{});
            REQUIRE((rho.m - pure_density(psi).m).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
    SECTION("Bell state with damped nonlocal factor keeps only corners") {
        spectra::DecoherenceSet dec;
        dec.k12 = 0.5;
        const auto rho = apply_dephasing(PureTwoQubitState::psi_plus(), dec);
        REQUIRE(rho.m(0, 0).real() == Approx(0.5).epsilon(1e-14));
        REQUIRE(rho.m(3, 3).real() == Approx(0.5).epsilon(1e-14));
        REQUIRE(rho.m(1, 1) == spectra::Complex{0.0, 0.0});
        REQUIRE(rho.m(2, 2) == spectra::Complex{0.0, 0.0});
        REQUIRE(rho.m(0, 3).real() == Approx(0.25).epsilon(1e-14));
        REQUIRE(rho.m(3, 0).real() == Approx(0.25).epsilon(1e-14));
    }
    SECTION("each factor lands on its own coherence") {
        const auto psi = PureTwoQubitState::normalized(0.8, 0.4, {0.2, 0.3}, {0.1, -0.2});
        spectra::DecoherenceSet dec;
        dec.k1 = {0.7, 0.1};
        dec.k2 = {0.6, -0.2};
        dec.k12 = {0.4, 0.3};
        dec.l12 = {0.5, 0.0};
        const auto rho = apply_dephasing(psi, dec);
        REQUIRE(std::abs(rho.m(0, 1) - psi.a * std::conj(psi.b) * dec.k2) < 1e-15);
        REQUIRE(std::abs(rho.m(0, 2) - psi.a * std::conj(psi.c) * dec.k1) < 1e-15);
        REQUIRE(std::abs(rho.m(0, 3) - psi.a * std::conj(psi.d) * dec.k12) < 1e-15);
        REQUIRE(std::abs(rho.m(1, 2) - psi.b * std::conj(psi.c) * dec.l12) < 1e-15);
        REQUIRE(std::abs(rho.m(1, 3) - psi.b * std::conj(psi.d) * dec.k1) < 1e-15);
        REQUIRE(std::abs(rho.m(2, 3) - psi.c * std::conj(psi.d) * dec.k2) < 1e-15);
        REQUIRE(std::abs(rho.m(2, 0) - std::conj(rho.m(0, 2))) == 0.0);
    }
    SECTION("populations never move") {
        for (int i = 0; i < 1000; ++i) {
            const auto psi = th::random_pure_state(rng);
            const auto dec = th::random_decoherence(rng);
            const auto rho = apply_dephasing(psi, dec);
            REQUIRE(rho.m(0, 0).real() == Approx(std::norm(psi.a)).margin(1e-15));
            REQUIRE(rho.m(1, 1).real() == Approx(std::norm(psi.b)).margin(1e-15));
            REQUIRE(rho.m(2, 2).real() == Approx(std::norm(psi.c)).margin(1e-15));
            REQUIRE(rho.m(3, 3).real() == Approx(std::norm(psi.d)).margin(1e-15));
        }
    }
    SECTION("physical decoherence always yields a valid state") {
        std::uniform_real_distribution<double> pos(0.0, 199.0);
        for (int i = 0; i < 200; ++i) {
            const auto spec = th::random_spectrum(rng, true);
            const auto dec = spectra::decoherence_set(spec, pos(rng), pos(rng));
            const auto rho = apply_dephasing(th::random_pure_state(rng), dec);
            REQUIRE_NOTHROW(rho.validate());
        }
    }
    SECTION("overdriven factor rejected") {
        spectra::DecoherenceSet dec;
        dec.k12 = 1.0 + 1e-6;
        REQUIRE_THROWS_AS(apply_dephasing(PureTwoQubitState::psi_plus(), dec),
                          std::invalid_argument);
    }
}

TEST_CASE("reduction to one arm", "[channel]") {
    std::mt19937_64 rng(32);
    SECTION("Bell marginal is maximally mixed") {
        const auto rho = apply_dephasing(PureTwoQubitState::psi_plus(), spectra::DecoherenceSet{});
        const auto arm1 = reduce_to_arm(rho, 1);
        REQUIRE(arm1.m(0, 0).real() == Approx(0.5).epsilon(1e-14));
        REQUIRE(arm1.m(1, 1).real() == Approx(0.5).epsilon(1e-14));
        REQUIRE(std::abs(arm1.m(0, 1)) < 1e-15);
    }
    SECTION("product state marginal is pure") {
        const PureTwoQubitState hv{0.0, 1.0, 0.0, 0.0};
        const auto rho = apply_dephasing(hv, th::random_decoherence(rng));
        const auto arm2 = reduce_to_arm(rho, 2);
        REQUIRE(arm2.m(1, 1).real() == Approx(1.0).epsilon(1e-14));
        REQUIRE(arm2.m(0, 0).real() == Approx(0.0).margin(1e-15));
    }
    SECTION("marginals are blind to the nonlocal factors") {
        const auto psi = PureTwoQubitState::psi_plus();
        auto dec = th::random_decoherence(rng);
        dec.k12 = 0.9;
        const auto a = reduce_to_arm(apply_dephasing(psi, dec), 1);
        dec.k12 = 0.1;
        dec.l12 = -dec.l12;
        const auto b = reduce_to_arm(apply_dephasing(psi, dec), 1);
        REQUIRE((a.m - b.m).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("marginal coherences carry the local factor only") {
        for (int i = 0; i < 50; ++i) {
            const auto psi = th::random_pure_state(rng);
            const auto spec = th::random_spectrum(rng);
            const auto dec = spectra::decoherence_set(spec, 130.0, 70.0);
            const auto rho = apply_dephasing(psi, dec);
            const auto arm1 = reduce_to_arm(rho, 1);
            const auto arm2 = reduce_to_arm(rho, 2);
            const auto expected1 =
                (psi.a * std::conj(psi.c) + psi.b * std::conj(psi.d)) * dec.k1;
            const auto expected2 =
                (psi.a * std::conj(psi.b) + psi.c * std::conj(psi.d)) * dec.k2;
            REQUIRE(std::abs(arm1.m(0, 1) - expected1) < 1e-14);
            REQUIRE(std::abs(arm2.m(0, 1) - expected2) < 1e-14);
        }
    }
    SECTION("invalid arm index rejected") {
        const auto rho = pure_density(PureTwoQubitState::psi_plus());
        REQUIRE_THROWS_AS(reduce_to_arm(rho, 0), std::invalid_argument);
        REQUIRE_THROWS_AS(reduce_to_arm(rho, 3), std::invalid_argument);
    }
}

TEST_CASE("local dephasing of the marginals is monotone", "[channel]") {
    std::mt19937_64 rng(33);
    const auto spec = spec_from_u(4.33, -0.92);
    const auto psi = th::random_pure_state(rng);
    double prev = 1.0;
    for (double x1 = 0.0; x1 <= 199.0; x1 += 10.0) {
        const auto dec = spectra::decoherence_set(spec, x1, 40.0);
        const auto arm1 = reduce_to_arm(apply_dephasing(psi, dec), 1);
        const double coh = std::abs(arm1.m(0, 1));
        REQUIRE(coh <= prev + 1e-12);
        prev = coh;
    }
}

TEST_CASE("factorization predicate", "[channel]") {
    REQUIRE(is_factorized(spectra::DecoherenceSet{}, 1e-12));
    SECTION("uncorrelated Gaussian factorizes everywhere") {
        const auto dec = spectra::decoherence_set(spec_from_u(3.0, 0.0), 120.0, 85.0);
        REQUIRE(is_factorized(dec, 1e-9));
    }
    SECTION("anticorrelated Gaussian does not") {
        const auto dec = spectra::decoherence_set(spec_from_u(4.33, -0.92), 100.0, 100.0);
        REQUIRE_FALSE(is_factorized(dec, 1e-3));
    }
    SECTION("tolerance must be positive") {
        REQUIRE_THROWS_AS(is_factorized(spectra::DecoherenceSet{}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("grid-level unitary oracle", "[channel]") {
    std::mt19937_64 rng(34);
    const auto spec = spec_from_u(4.33, -0.92);
    const auto grid = spectra::AmplitudeGrid::gaussian(spec, 96);
    SECTION("no interaction leaves the projector") {
        const auto psi = th::random_pure_state(rng);
        const auto rho = unitary_grid_evolution(psi, grid, 0.0, 0.0);
        REQUIRE((rho.m - pure_density(psi).m).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("agrees with the dephasing map over the same grid") {
        std::uniform_real_distribution<double> pos(0.0, 199.0);
        for (int i = 0; i < 5; ++i) {
            const auto psi = th::random_pure_state(rng);
            const double x1 = pos(rng), x2 = pos(rng);
            const auto direct = unitary_grid_evolution(psi, grid, x1, x2);
            const auto via_map =
                apply_dephasing(psi, spectra::decoherence_set(grid, x1, x2));
            REQUIRE((direct.m - via_map.m).cwiseAbs().maxCoeff() < 1e-9);
            REQUIRE_NOTHROW(direct.validate());
        }
    }
    SECTION("matches the closed form on a fine grid") {
        const auto fine = spectra::AmplitudeGrid::gaussian(spec, 256);
        const auto psi = PureTwoQubitState::psi_plus();
        const auto direct = unitary_grid_evolution(psi, fine, 199.0, 0.0);
        const auto closed = apply_dephasing(psi, spectra::decoherence_set(spec, 199.0, 0.0));
        REQUIRE((direct.m - closed.m).cwiseAbs().maxCoeff() < 1e-6);
    }
    SECTION("pump dispersion does not reach the polarization state") {
        const auto psi = th::random_pure_state(rng);
        const auto dispersed = spectra::apply_pump_dispersion(grid, 3.7);
        const auto a = unitary_grid_evolution(psi, grid, 199.0, 51.0);
        const auto b = unitary_grid_evolution(psi, dispersed, 199.0, 51.0);
        REQUIRE((a.m - b.m).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("density matrix validation", "[channel]") {
    DensityMatrix4 rho = pure_density(PureTwoQubitState::psi_plus());
    REQUIRE_NOTHROW(rho.validate());
    SECTION("non-hermitian rejected") {
        rho.m(0, 1) = {0.1, 0.0};
        REQUIRE_THROWS_AS(rho.validate(), std::invalid_argument);
    }
    SECTION("wrong trace rejected") {
        rho.m(1, 1) = {0.2, 0.0};
        REQUIRE_THROWS_AS(rho.validate(), std::invalid_argument);
    }
    SECTION("negative eigenvalue rejected") {
        rho.m(0, 3) = rho.m(3, 0) = {0.8, 0.0};
        REQUIRE_THROWS_AS(rho.validate(), std::invalid_argument);
    }
}
