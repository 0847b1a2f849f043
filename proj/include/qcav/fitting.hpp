#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "qcav/cavity.hpp"
#include "qcav/photon_stats.hpp"

namespace qcav {

struct FitOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-10;     // infinity norm of J^T r
    double chi2_rel_tol = 1e-12;     // relative chi^2 change on an accepted step
    double initial_damping = 1e-3;
    // Set when the weights are true 1/sigma values: the covariance is then
    // reported as-is instead of being rescaled by reduced chi^2.
    bool absolute_weights = false;
};

struct FitResult {
    std::vector<double> params;
    std::vector<double> sigma;        // 1-sigma parameter uncertainties
    std::vector<double> covariance;   // row-major n x n
    double chi2 = 0.0;
    std::size_t dof = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> chi2_history; // chi^2 after each accepted step
};

// Per-parameter box constraint enforced through a smooth reparameterization
// (log map for one-sided, logistic for two-sided bounds).
struct Bound {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

inline Bound positive() { return Bound{0.0, std::numeric_limits<double>::infinity()}; }
inline Bound unbounded() { return Bound{}; }

using ModelFunc = std::function<double(double, const std::vector<double>&)>;
using ModelJac = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Damped least squares with Nielsen lambda control.  Weights multiply the
// residuals (use 1/sigma); pass an empty vector for unit weights.
FitResult levenberg_marquardt(const ModelFunc& f, const ModelJac& jac,
                              const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& weights,
                              std::vector<double> init,
                              const std::vector<Bound>& bounds = {},
                              const FitOptions& opts = {});

struct ExponentialFit {
    double amplitude = 0.0;
    double tau_ns = 0.0;
    double baseline = 0.0;
    double tau_sigma = 0.0;
    FitResult detail;
};

// A exp(-t/tau) + c with Poisson weights; init derived from the data.
ExponentialFit fit_exponential_decay(const std::vector<double>& t_ns,
                                     const std::vector<double>& counts);
ExponentialFit fit_exponential_decay(const DecayHistogram& h, double fit_start_ns = 0.0);

struct LorentzianFit {
    double peak = 0.0;        // height above baseline
    double width_nm = 0.0;    // FWHM
    double center_nm = 0.0;
    double baseline = 0.0;
    double center_sigma = 0.0;
    FitResult detail;

    double contrast() const { return (peak + baseline) / baseline; }
};

LorentzianFit fit_lorentzian_peak(const std::vector<double>& detuning_nm,
                                  const std::vector<double>& intensity);
LorentzianFit fit_lorentzian_peak(const std::vector<double>& detuning_nm,
                                  const std::vector<double>& intensity,
                                  const std::vector<double>& sigma);

struct FanoFit {
    FanoParams params;
    double center_sigma = 0.0;
    double width_sigma = 0.0;
    FitResult detail;
};

FanoFit fit_fano(const std::vector<double>& x, const std::vector<double>& y,
                 const FanoParams& init);

struct PolarizationFit {
    double i0 = 0.0;
    double visibility = 0.0;
    double theta0_deg = 0.0;       // reported in [0, 180)
    double theta0_sigma = 0.0;
    FitResult detail;
};

PolarizationFit fit_polarization(const std::vector<double>& theta_deg,
                                 const std::vector<double>& intensity);

}
