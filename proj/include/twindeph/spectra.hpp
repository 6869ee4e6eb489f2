// spectra.hpp — Joint frequency spectra, characteristic functions, and decoherence factors
//
// The environment of each photon is its own frequency mode. Everything the
// polarization dynamics can see of that environment is the Fourier transform
// G(x1, x2) of the joint frequency distribution P(w1, w2), evaluated at the
// per-arm effective path differences (x1, x2). Two routes to G are provided:
// a Gaussian closed form and a brute-force quadrature over a sampled
// amplitude grid. They must agree; tests hold them to that.
//
// Units: path differences x are measured in multiples of lambda0 = 780 nm.
// Grid frequencies are pre-scaled so that a frequency w accumulates phase
// w * x radians over a path difference of x (the birefringence is folded in).
// The Gaussian decay coefficient b is then half the per-axis variance of the
// scaled frequencies, in units of 1/lambda0^2.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace twindeph::spectra {

using Complex = std::complex<double>;

inline constexpr double kLambda0Nm = 780.0;
inline constexpr double kSpeedOfLightNmPerS = 2.99792458e17;

// FWHM of a Gaussian -> standard deviation
inline double fwhm_to_sigma(double fwhm) {
    return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

// ----------------------------- Gaussian model --------------------------------

// Bivariate Gaussian joint frequency distribution, reduced to the three
// numbers the dynamics depends on: mean phase rates, decay coefficient,
// and the correlation coefficient between the two arms.
struct GaussianJointSpectrum {
    double m1{0.0};  // mean phase rate, arm 1 (rad per lambda0 of path difference)
    double m2{0.0};  // mean phase rate, arm 2
    double b{0.0};   // decay coefficient (per lambda0^2); half the per-axis variance
    double k{0.0};   // correlation coefficient in [-1, 1]

    bool valid() const noexcept { return b >= 0.0 && k >= -1.0 && k <= 1.0; }

    void validate() const {
        if (!(b >= 0.0)) throw std::invalid_argument("GaussianJointSpectrum: b must be >= 0");
        if (!(k >= -1.0 && k <= 1.0)) {
            throw std::invalid_argument("GaussianJointSpectrum: k must lie in [-1, 1]");
        }
    }
};

// Characteristic function of the Gaussian model:
//   G(x1, x2) = exp(-i (m1 x1 + m2 x2)) * exp(-b (x1^2 + x2^2 + 2 k x1 x2)).
// Total on valid spectra; |G| <= 1 always.
inline Complex gaussian_characteristic(const GaussianJointSpectrum& s, double x1, double x2) {
    s.validate();
    const double quad = s.b * (x1 * x1 + x2 * x2 + 2.0 * s.k * x1 * x2);
    const double phase = s.m1 * x1 + s.m2 * x2;
    return std::exp(-quad) * Complex{std::cos(phase), -std::sin(phase)};
}

// ----------------------------- Unit conversion -------------------------------

// Maps between lab x-units (path difference in multiples of lambda0) and the
// physical quantities behind them: plate length, interaction time, and the
// frequency variance C of the joint distribution. The birefringence delta_n
// is never reported by the fits; 0.009 is the nominal quartz value.
struct UnitConversion {
    double lambda0_nm{kLambda0Nm};
    double delta_n{0.009};

    void validate() const {
        if (!(lambda0_nm > 0.0)) throw std::invalid_argument("UnitConversion: lambda0 must be > 0");
        if (!(delta_n > 0.0)) throw std::invalid_argument("UnitConversion: delta_n must be > 0");
    }

    // effective path difference accumulated per nm of plate, in lambda0 units
    double x_from_length_nm(double plate_nm) const { return delta_n * plate_nm / lambda0_nm; }
    double length_nm_from_x(double x) const { return x * lambda0_nm / delta_n; }

    // traversal time that produces a path difference of x
    double time_s_from_x(double x) const {
        return x * lambda0_nm / (kSpeedOfLightNmPerS * delta_n);
    }
    double x_from_time_s(double t) const {
        return t * kSpeedOfLightNmPerS * delta_n / lambda0_nm;
    }

    // physical angular frequency (rad/s) -> scaled grid frequency (rad per x-unit)
    double scaled_omega(double omega_rad_per_s) const {
        return omega_rad_per_s * lambda0_nm / kSpeedOfLightNmPerS;
    }
    double omega_rad_per_s(double scaled) const {
        return scaled * kSpeedOfLightNmPerS / lambda0_nm;
    }

    // decay coefficient b = (1/2) delta_n^2 C expressed per lambda0^2,
    // for C the per-axis variance of the physical angular frequencies
    double b_from_variance(double c_rad2_per_s2) const {
        const double t_per_x = lambda0_nm / (kSpeedOfLightNmPerS * delta_n);
        return 0.5 * delta_n * delta_n * c_rad2_per_s2 * t_per_x * t_per_x;
    }
    double variance_from_b(double b) const {
        const double t_per_x = lambda0_nm / (kSpeedOfLightNmPerS * delta_n);
        return 2.0 * b / (delta_n * delta_n * t_per_x * t_per_x);
    }
};

// ----------------------------- Amplitude grid --------------------------------

// Discretized two-photon amplitude g(w1, w2) on a uniform rectangular grid of
// scaled frequencies. Cell-midpoint samples; the squared modulus P is cached
// and normalized so that sum(P) * dw1 * dw2 = 1. This is the brute-force
// environment model that the Gaussian closed form is checked against.
class AmplitudeGrid {
public:
    static constexpr int kMinPointsPerAxis = 16;

    static AmplitudeGrid from_amplitudes(Eigen::VectorXd axis1, Eigen::VectorXd axis2,
                                         Eigen::MatrixXcd g) {
        AmplitudeGrid grid;
        grid.axis1_ = std::move(axis1);
        grid.axis2_ = std::move(axis2);
        grid.g_ = std::move(g);
        grid.check_axes();
        if (grid.g_.rows() != grid.axis1_.size() || grid.g_.cols() != grid.axis2_.size()) {
            throw std::invalid_argument("AmplitudeGrid: amplitude shape does not match axes");
        }
        grid.normalize();
        return grid;
    }

    // Sample the Gaussian model on a (+/- span_sigmas) box, n points per axis.
    // Degenerate correlation (|k| = 1) concentrates all mass on a line and has
    // no density to sample; the closed form covers that limit instead.
    static AmplitudeGrid gaussian(const GaussianJointSpectrum& s, int n = 512,
                                  double span_sigmas = 6.0) {
        s.validate();
        if (!(s.b > 0.0)) throw std::invalid_argument("AmplitudeGrid::gaussian: requires b > 0");
        if (std::abs(s.k) >= 1.0) {
            throw std::invalid_argument("AmplitudeGrid::gaussian: requires |k| < 1");
        }
        if (n < kMinPointsPerAxis) {
            throw std::invalid_argument("AmplitudeGrid::gaussian: need at least 16 points per axis");
        }
        const double sigma = std::sqrt(2.0 * s.b);
        const double span = span_sigmas * sigma;
        const double step = 2.0 * span / n;
        Eigen::VectorXd ax1(n), ax2(n);
        for (int i = 0; i < n; ++i) {
            const double offset = -span + (i + 0.5) * step;
            ax1[i] = s.m1 + offset;
            ax2[i] = s.m2 + offset;
        }
        const double det = 1.0 - s.k * s.k;
        Eigen::MatrixXcd g(n, n);
        for (int i = 0; i < n; ++i) {
            const double z1 = (ax1[i] - s.m1) / sigma;
            for (int j = 0; j < n; ++j) {
                const double z2 = (ax2[j] - s.m2) / sigma;
                const double q = (z1 * z1 - 2.0 * s.k * z1 * z2 + z2 * z2) / (2.0 * det);
                g(i, j) = std::exp(-0.5 * q);  // sqrt of the density, up to normalization
            }
        }
        return from_amplitudes(std::move(ax1), std::move(ax2), std::move(g));
    }

    const Eigen::VectorXd& axis1() const noexcept { return axis1_; }
    const Eigen::VectorXd& axis2() const noexcept { return axis2_; }
    const Eigen::MatrixXcd& amplitudes() const noexcept { return g_; }
    const Eigen::MatrixXd& probability() const noexcept { return p_; }
    double step1() const noexcept { return d1_; }
    double step2() const noexcept { return d2_; }
    double cell_area() const noexcept { return d1_ * d2_; }

    double total_probability() const { return p_.sum() * cell_area(); }

    friend AmplitudeGrid apply_pump_dispersion(const AmplitudeGrid& grid, double beta);

private:
    AmplitudeGrid() = default;

    void check_axes() const {
        check_axis(axis1_, "axis1");
        check_axis(axis2_, "axis2");
    }

    static void check_axis(const Eigen::VectorXd& ax, const char* name) {
        if (ax.size() < kMinPointsPerAxis) {
            throw std::invalid_argument(std::string("AmplitudeGrid: ") + name +
                                        " needs at least 16 points");
        }
        const double step = ax[1] - ax[0];
        if (!(step > 0.0)) {
            throw std::invalid_argument(std::string("AmplitudeGrid: ") + name +
                                        " must be strictly increasing");
        }
        for (Eigen::Index i = 1; i < ax.size(); ++i) {
            const double d = ax[i] - ax[i - 1];
            if (!(d > 0.0) || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step))) {
                throw std::invalid_argument(std::string("AmplitudeGrid: ") + name +
                                            " must be uniformly spaced");
            }
        }
    }

    void normalize() {
        d1_ = axis1_[1] - axis1_[0];
        d2_ = axis2_[1] - axis2_[0];
        p_ = g_.cwiseAbs2();
        const double total = p_.sum() * d1_ * d2_;
        if (!(total > 0.0)) throw std::invalid_argument("AmplitudeGrid: zero total probability");
        g_ /= std::sqrt(total);
        p_ /= total;
    }

    Eigen::VectorXd axis1_, axis2_;
    Eigen::MatrixXcd g_;
    Eigen::MatrixXd p_;
    double d1_{0.0}, d2_{0.0};
};

// True when the phase w*x advances by more than pi per grid step on either
// axis, i.e. the quadrature undersamples the oscillation and aliases. Callers
// that accept user grids should check this before trusting the result.
inline bool aliasing_risk(const AmplitudeGrid& grid, double x1, double x2) {
    return grid.step1() * std::abs(x1) > std::numbers::pi ||
           grid.step2() * std::abs(x2) > std::numbers::pi;
}

// Midpoint-rule quadrature of the characteristic function,
//   G(x1, x2) = sum P(w1, w2) exp(-i (w1 x1 + w2 x2)) dw1 dw2.
// Depends on P = |g|^2 only, never on the phase of g.
inline Complex numeric_characteristic(const AmplitudeGrid& grid, double x1, double x2) {
    const auto& ax1 = grid.axis1();
    const auto& ax2 = grid.axis2();
    const Eigen::Index n1 = ax1.size();
    const Eigen::Index n2 = ax2.size();

    Eigen::VectorXd c2(n2), s2(n2);
    for (Eigen::Index j = 0; j < n2; ++j) {
        const double ph = ax2[j] * x2;
        c2[j] = std::cos(ph);
        s2[j] = std::sin(ph);
    }
    // row sums against the arm-2 phase factor, then the arm-1 phase on top
    const Eigen::VectorXd re_rows = grid.probability() * c2;
    const Eigen::VectorXd im_rows = grid.probability() * s2;
    double re = 0.0, im = 0.0;
    for (Eigen::Index i = 0; i < n1; ++i) {
        const double ph = ax1[i] * x1;
        const double c1 = std::cos(ph);
        const double s1 = std::sin(ph);
        // exp(-i w1 x1) * (re_rows - i im_rows)
        re += c1 * re_rows[i] - s1 * im_rows[i];
        im += -(c1 * im_rows[i] + s1 * re_rows[i]);
    }
    return Complex{re, im} * grid.cell_area();
}

// ----------------------------- Decoherence set -------------------------------

// The four decoherence factors at one point of the schedule. k1 and k2 damp
// the single-arm coherences, k12 and l12 the two nonlocal ones; each is a
// value of G and so has modulus <= 1 (up to quadrature round-off).
struct DecoherenceSet {
    Complex k1{1.0, 0.0};
    Complex k2{1.0, 0.0};
    Complex k12{1.0, 0.0};
    Complex l12{1.0, 0.0};

    double max_modulus() const {
        return std::max(std::max(std::abs(k1), std::abs(k2)),
                        std::max(std::abs(k12), std::abs(l12)));
    }
};

// k1 = G(x1, 0), k2 = G(0, x2), k12 = G(x1, x2), l12 = G(x1, -x2).
template <class Provider>
    requires std::invocable<Provider&, double, double>
DecoherenceSet decoherence_set(Provider&& g, double x1, double x2) {
    DecoherenceSet d;
    d.k1 = g(x1, 0.0);
    d.k2 = g(0.0, x2);
    d.k12 = g(x1, x2);
    d.l12 = g(x1, -x2);
    return d;
}

inline DecoherenceSet decoherence_set(const GaussianJointSpectrum& s, double x1, double x2) {
    return decoherence_set([&s](double a, double b) { return gaussian_characteristic(s, a, b); },
                           x1, x2);
}

inline DecoherenceSet decoherence_set(const AmplitudeGrid& grid, double x1, double x2) {
    return decoherence_set([&grid](double a, double b) { return numeric_characteristic(grid, a, b); },
                           x1, x2);
}

// Adapters for code that wants a single callable regardless of the model.
// The grid overload captures by reference; the grid must outlive the callable.
inline auto characteristic_of(const GaussianJointSpectrum& s) {
    return [s](double x1, double x2) { return gaussian_characteristic(s, x1, x2); };
}
inline auto characteristic_of(const AmplitudeGrid& grid) {
    return [&grid](double x1, double x2) { return numeric_characteristic(grid, x1, x2); };
}

// ----------------------------- Pump toy model --------------------------------

// Scaled standard deviation of the frequency sum, set by the pump spectral
// width. The pump runs at lambda0/2, so a wavelength width there is worth
// four times the frequency spread of the same width at lambda0.
inline double pump_sum_sigma(double pump_fwhm_nm, const UnitConversion& units) {
    units.validate();
    if (!(pump_fwhm_nm > 0.0)) throw std::invalid_argument("pump_sum_sigma: width must be > 0");
    const double lambda_pump = units.lambda0_nm / 2.0;
    const double sigma_lambda = fwhm_to_sigma(pump_fwhm_nm);
    const double sigma_omega = 2.0 * std::numbers::pi * kSpeedOfLightNmPerS * sigma_lambda /
                               (lambda_pump * lambda_pump);
    return units.scaled_omega(sigma_omega);
}

// Scaled standard deviation of the frequency difference, set by the
// phase-matching bandwidth at lambda0.
inline double phasematch_diff_sigma(double phasematch_fwhm_nm, const UnitConversion& units) {
    units.validate();
    if (!(phasematch_fwhm_nm > 0.0)) {
        throw std::invalid_argument("phasematch_diff_sigma: width must be > 0");
    }
    const double sigma_lambda = fwhm_to_sigma(phasematch_fwhm_nm);
    const double sigma_omega = 2.0 * std::numbers::pi * kSpeedOfLightNmPerS * sigma_lambda /
                               (units.lambda0_nm * units.lambda0_nm);
    return units.scaled_omega(sigma_omega);
}

// Energy-conservation toy model of down-conversion: the pump width bounds the
// spread of the frequency sum, the phase-matching bandwidth the spread of the
// difference. A narrow pump therefore anticorrelates the frequencies. The
// model is a calibration aid, good for signs and monotonic trends only; it is
// not a fit to any measured correlation coefficient. When the pump is broader
// than the phase-matching bandwidth the model floor is k = 0 (it has nothing
// to say about positively correlated sources).
inline GaussianJointSpectrum pump_to_spectrum(double pump_fwhm_nm, double phasematch_fwhm_nm,
                                              const UnitConversion& units) {
    const double s_plus = pump_sum_sigma(pump_fwhm_nm, units);
    const double s_minus = phasematch_diff_sigma(phasematch_fwhm_nm, units);
    const double v_plus = s_plus * s_plus;
    const double v_minus = s_minus * s_minus;
    GaussianJointSpectrum out;
    out.k = -std::max(0.0, (v_minus - v_plus) / (v_minus + v_plus));
    const double variance = (v_plus + v_minus) / 4.0;  // per-axis, scaled units
    out.b = variance / 2.0;
    return out;
}

// ----------------------------- Pump dispersion -------------------------------

// Multiply the amplitude by the quadratic pump phase exp(i beta (w1 + w2)^2).
// |g| is untouched pointwise, so the cached P (and everything downstream of
// it) is carried over bit-identically rather than recomputed.
inline AmplitudeGrid apply_pump_dispersion(const AmplitudeGrid& grid, double beta) {
    AmplitudeGrid out = grid;
    for (Eigen::Index i = 0; i < out.axis1_.size(); ++i) {
        for (Eigen::Index j = 0; j < out.axis2_.size(); ++j) {
            const double s = out.axis1_[i] + out.axis2_[j];
            const double ph = beta * s * s;
            out.g_(i, j) *= Complex{std::cos(ph), std::sin(ph)};
        }
    }
    return out;
}

}  // namespace twindeph::spectra
