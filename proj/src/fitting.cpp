#include "qcav/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcav/errors.hpp"
#include "qcav/linalg.hpp"

namespace qcav {

namespace {

enum class MapKind { identity, shift_log_lo, shift_log_hi, logistic };

struct ParamMap {
    std::vector<MapKind> kind;
    std::vector<double> lo, hi;

    explicit ParamMap(const std::vector<Bound>& bounds, std::size_t n) {
        kind.assign(n, MapKind::identity);
        lo.assign(n, 0.0);
        hi.assign(n, 0.0);
        for (std::size_t i = 0; i < bounds.size() && i < n; ++i) {
            const bool has_lo = std::isfinite(bounds[i].lo);
            const bool has_hi = std::isfinite(bounds[i].hi);
            lo[i] = bounds[i].lo;
            hi[i] = bounds[i].hi;
            if (has_lo && has_hi) {
                if (!(bounds[i].lo < bounds[i].hi))
                    throw std::invalid_argument("fit bounds: lo must be < hi");
                kind[i] = MapKind::logistic;
            } else if (has_lo) {
                kind[i] = MapKind::shift_log_lo;
            } else if (has_hi) {
                kind[i] = MapKind::shift_log_hi;
            }
        }
    }

    double clamp_u(double u) const { return std::clamp(u, -200.0, 200.0); }

    double to_internal(std::size_t i, double p) const {
        switch (kind[i]) {
            case MapKind::identity: return p;
            case MapKind::shift_log_lo:
                return clamp_u(std::log(std::max(p - lo[i], 1e-300)));
            case MapKind::shift_log_hi:
                return clamp_u(std::log(std::max(hi[i] - p, 1e-300)));
            case MapKind::logistic: {
                const double f = std::clamp((p - lo[i]) / (hi[i] - lo[i]), 1e-12, 1.0 - 1e-12);
                return std::log(f / (1.0 - f));
            }
        }
        return p;
    }

    double to_external(std::size_t i, double u) const {
        switch (kind[i]) {
            case MapKind::identity: return u;
            case MapKind::shift_log_lo: return lo[i] + std::exp(clamp_u(u));
            case MapKind::shift_log_hi: return hi[i] - std::exp(clamp_u(u));
            case MapKind::logistic: {
                const double s = 1.0 / (1.0 + std::exp(-clamp_u(u)));
                return lo[i] + (hi[i] - lo[i]) * s;
            }
        }
        return u;
    }

    // d external / d internal at the given internal coordinate.
    double jacobian(std::size_t i, double u) const {
        switch (kind[i]) {
            case MapKind::identity: return 1.0;
            case MapKind::shift_log_lo: return std::exp(clamp_u(u));
            case MapKind::shift_log_hi: return -std::exp(clamp_u(u));
            case MapKind::logistic: {
                const double s = 1.0 / (1.0 + std::exp(-clamp_u(u)));
                return (hi[i] - lo[i]) * s * (1.0 - s);
            }
        }
        return 1.0;
    }
};

}

FitResult levenberg_marquardt(const ModelFunc& f, const ModelJac& jac,
                              const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& weights,
                              std::vector<double> init,
                              const std::vector<Bound>& bounds,
                              const FitOptions& opts) {
    const std::size_t n_data = x.size();
    const std::size_t n_par = init.size();
    if (n_data == 0 || y.size() != n_data)
        throw insufficient_data_error("levenberg_marquardt: empty or mismatched data");
    if (n_par == 0) throw std::invalid_argument("levenberg_marquardt: no parameters");
    if (!weights.empty() && weights.size() != n_data)
        throw std::invalid_argument("levenberg_marquardt: weight length mismatch");

    const ParamMap map(bounds, n_par);
    std::vector<double> u(n_par);
    for (std::size_t i = 0; i < n_par; ++i) u[i] = map.to_internal(i, init[i]);

    std::vector<double> p(n_par), dext(n_par), grad_ext(n_par);
    auto externalize = [&](const std::vector<double>& ui) {
        std::vector<double> pe(n_par);
        for (std::size_t i = 0; i < n_par; ++i) pe[i] = map.to_external(i, ui[i]);
        return pe;
    };

    auto chi2_at = [&](const std::vector<double>& pe) {
        double c = 0.0;
        for (std::size_t i = 0; i < n_data; ++i) {
            const double w = weights.empty() ? 1.0 : weights[i];
            const double r = w * (y[i] - f(x[i], pe));
            c += r * r;
        }
        return c;
    };

    p = externalize(u);
    double chi2 = chi2_at(p);
    if (!std::isfinite(chi2))
        throw std::invalid_argument("levenberg_marquardt: model is not finite at the initial parameters");

    FitResult res;
    res.dof = n_data > n_par ? n_data - n_par : 1;

    std::vector<double> a(n_par * n_par), g(n_par), diag(n_par);
    auto build_normal = [&](const std::vector<double>& ui, const std::vector<double>& pe) {
        std::fill(a.begin(), a.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < n_par; ++i) dext[i] = map.jacobian(i, ui[i]);
        std::vector<double> row(n_par);
        for (std::size_t i = 0; i < n_data; ++i) {
            const double w = weights.empty() ? 1.0 : weights[i];
            jac(x[i], pe, row);
            for (std::size_t j = 0; j < n_par; ++j) row[j] *= w * dext[j];
            const double r = w * (y[i] - f(x[i], pe));
            for (std::size_t j = 0; j < n_par; ++j) {
                g[j] += row[j] * r;
                for (std::size_t k = j; k < n_par; ++k) a[j * n_par + k] += row[j] * row[k];
            }
        }
        for (std::size_t j = 0; j < n_par; ++j)
            for (std::size_t k = 0; k < j; ++k) a[j * n_par + k] = a[k * n_par + j];
    };

    build_normal(u, p);
    double max_diag = 0.0;
    for (std::size_t j = 0; j < n_par; ++j) max_diag = std::max(max_diag, a[j * n_par + j]);
    double lambda = opts.initial_damping * std::max(max_diag, 1e-30);
    double nu = 2.0;

    std::vector<double> m(n_par * n_par), delta(n_par), u_try(n_par);
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        double gmax = 0.0;
        for (std::size_t j = 0; j < n_par; ++j) gmax = std::max(gmax, std::fabs(g[j]));
        if (gmax < opts.gradient_tol) {
            res.converged = true;
            break;
        }

        for (std::size_t j = 0; j < n_par; ++j) diag[j] = std::max(a[j * n_par + j], 1e-12 * std::max(max_diag, 1e-30));
        m = a;
        for (std::size_t j = 0; j < n_par; ++j) m[j * n_par + j] += lambda * diag[j] / std::max(max_diag, 1e-30) * max_diag;
        delta = g;
        if (!solve_linear(m.data(), delta.data(), static_cast<int>(n_par))) {
            // Singular normal equations: escalate damping and retry.
            lambda *= nu;
            nu *= 2.0;
            if (lambda > 1e120) break;
            continue;
        }

        for (std::size_t j = 0; j < n_par; ++j) u_try[j] = u[j] + delta[j];
        const auto p_try = externalize(u_try);
        const double chi2_try = chi2_at(p_try);

        double pred = 0.0;
        for (std::size_t j = 0; j < n_par; ++j)
            pred += delta[j] * (lambda * diag[j] / std::max(max_diag, 1e-30) * max_diag * delta[j] + g[j]);

        if (std::isfinite(chi2_try) && chi2_try < chi2) {
            const double rho = pred > 0.0 ? (chi2 - chi2_try) / pred : 1.0;
            const double rel = chi2 > 0.0 ? (chi2 - chi2_try) / chi2 : 0.0;
            u = u_try;
            p = p_try;
            chi2 = chi2_try;
            res.chi2_history.push_back(chi2);
            build_normal(u, p);
            max_diag = 0.0;
            for (std::size_t j = 0; j < n_par; ++j) max_diag = std::max(max_diag, a[j * n_par + j]);
            const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3);
            lambda *= std::max(1.0 / 3.0, std::min(shrink, 1.0));
            nu = 2.0;
            if (rel < opts.chi2_rel_tol) {
                res.converged = true;
                ++iter;
                break;
            }
        } else {
            // A rejected step whose model-predicted decrease is already
            // negligible means the optimum is reached; larger damping can
            // only shorten the step further.
            if (pred <= opts.chi2_rel_tol * std::max(chi2, 1e-300)) {
                res.converged = true;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
            if (lambda > 1e120) break;
        }
    }

    res.iterations = iter;
    res.params = p;
    res.chi2 = chi2;

    // Covariance in external coordinates: pull (J^T J)^-1 through the
    // reparameterization and scale by reduced chi^2.
    std::vector<double> ainv = a;
    if (!invert_spd(ainv.data(), static_cast<int>(n_par))) {
        ainv = a;
        const double ridge = std::max(max_diag, 1e-30) * 1e-12;
        for (std::size_t j = 0; j < n_par; ++j) ainv[j * n_par + j] += ridge;
        if (!invert_matrix(ainv.data(), static_cast<int>(n_par)))
            ainv.assign(n_par * n_par, std::numeric_limits<double>::infinity());
    }
    const double scale = opts.absolute_weights ? 1.0 : chi2 / static_cast<double>(res.dof);
    res.covariance.resize(n_par * n_par);
    for (std::size_t i = 0; i < n_par; ++i) dext[i] = map.jacobian(i, u[i]);
    for (std::size_t i = 0; i < n_par; ++i)
        for (std::size_t j = 0; j < n_par; ++j)
            res.covariance[i * n_par + j] = ainv[i * n_par + j] * dext[i] * dext[j] * scale;
    res.sigma.resize(n_par);
    for (std::size_t i = 0; i < n_par; ++i)
        res.sigma[i] = std::sqrt(std::max(res.covariance[i * n_par + i], 0.0));
    return res;
}

namespace {

std::vector<double> poisson_weights(const std::vector<double>& counts) {
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        w[i] = 1.0 / std::sqrt(std::max(counts[i], 1.0));
    return w;
}

}

ExponentialFit fit_exponential_decay(const std::vector<double>& t_ns,
                                     const std::vector<double>& counts) {
    if (t_ns.size() != counts.size())
        throw std::invalid_argument("fit_exponential_decay: length mismatch");
    if (t_ns.size() < 4)
        throw insufficient_data_error("fit_exponential_decay: need at least 4 bins");
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0)
        throw insufficient_data_error("fit_exponential_decay: histogram is empty");

    const std::size_t n = t_ns.size();
    double c0 = 0.0;
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    for (std::size_t i = n - tail; i < n; ++i) c0 += counts[i];
    c0 /= static_cast<double>(tail);
    const double peak = *std::max_element(counts.begin(), counts.end());
    double a0 = std::max(peak - c0, 1.0);
    double tau0 = (t_ns.back() - t_ns.front()) / 3.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i] - c0 < a0 / 2.718281828459045 && counts[i] >= peak * 0.01) {
            if (t_ns[i] > t_ns.front()) tau0 = t_ns[i] - t_ns.front();
            break;
        }
    }
    if (!(tau0 > 0.0)) tau0 = (t_ns.back() - t_ns.front()) / 3.0;

    auto model = [](double t, const std::vector<double>& p) {
        return p[0] * std::exp(-t / p[1]) + p[2];
    };
    auto jac = [](double t, const std::vector<double>& p, std::vector<double>& j) {
        const double e = std::exp(-t / p[1]);
        j[0] = e;
        j[1] = p[0] * e * t / (p[1] * p[1]);
        j[2] = 1.0;
    };
    const std::vector<Bound> bounds = {positive(), positive(), positive()};
    FitOptions opts;
    opts.absolute_weights = true;
    auto res = levenberg_marquardt(model, jac, t_ns, counts, poisson_weights(counts),
                                   {a0, tau0, std::max(c0, 1e-6 * a0)}, bounds, opts);
    // Reweight with the fitted model: weights taken from the observed counts
    // favour downward fluctuations and bias tau low.
    if (res.converged) {
        std::vector<double> expected(n);
        for (std::size_t i = 0; i < n; ++i) expected[i] = model(t_ns[i], res.params);
        auto res2 = levenberg_marquardt(model, jac, t_ns, counts, poisson_weights(expected),
                                        res.params, bounds, opts);
        if (res2.converged) res = std::move(res2);
    }

    ExponentialFit fit;
    fit.amplitude = res.params[0];
    fit.tau_ns = res.params[1];
    fit.baseline = res.params[2];
    fit.tau_sigma = res.sigma[1];
    // A lifetime with an uncertainty of its own size is not identified
    // (flat histograms end up here); report that as non-convergence.
    if (!(fit.tau_sigma < fit.tau_ns) || fit.amplitude < 1e-6 * (fit.baseline + 1.0))
        res.converged = false;
    fit.detail = std::move(res);
    return fit;
}

ExponentialFit fit_exponential_decay(const DecayHistogram& h, double fit_start_ns) {
    std::vector<double> t, c;
    for (std::size_t i = 0; i < h.t_ns.size(); ++i) {
        if (h.t_ns[i] < fit_start_ns) continue;
        t.push_back(h.t_ns[i]);
        c.push_back(static_cast<double>(h.counts[i]));
    }
    return fit_exponential_decay(t, c);
}

LorentzianFit fit_lorentzian_peak(const std::vector<double>& detuning_nm,
                                  const std::vector<double>& intensity) {
    return fit_lorentzian_peak(detuning_nm, intensity, {});
}

LorentzianFit fit_lorentzian_peak(const std::vector<double>& detuning_nm,
                                  const std::vector<double>& intensity,
                                  const std::vector<double>& sigma) {
    if (detuning_nm.size() != intensity.size())
        throw std::invalid_argument("fit_lorentzian_peak: length mismatch");
    if (detuning_nm.size() < 5)
        throw insufficient_data_error("fit_lorentzian_peak: need at least 5 points");
    std::vector<double> weights;
    if (!sigma.empty()) {
        if (sigma.size() != intensity.size())
            throw std::invalid_argument("fit_lorentzian_peak: sigma length mismatch");
        weights.reserve(sigma.size());
        for (const double s : sigma) {
            if (!(s > 0.0)) throw std::invalid_argument("fit_lorentzian_peak: sigma must be > 0");
            weights.push_back(1.0 / s);
        }
    }

    const auto it_max = std::max_element(intensity.begin(), intensity.end());
    const double ymin = *std::min_element(intensity.begin(), intensity.end());
    const double span = std::fabs(*std::max_element(detuning_nm.begin(), detuning_nm.end())
                                  - *std::min_element(detuning_nm.begin(), detuning_nm.end()));
    const double a0 = std::max(*it_max - ymin, 1e-12);
    const double x0 = detuning_nm[static_cast<std::size_t>(it_max - intensity.begin())];

    auto model = [](double d, const std::vector<double>& p) {
        const double z = 2.0 * (d - p[2]) / p[1];
        return p[0] / (1.0 + z * z) + p[3];
    };
    auto jac = [](double d, const std::vector<double>& p, std::vector<double>& j) {
        const double z = 2.0 * (d - p[2]) / p[1];
        const double den = 1.0 + z * z;
        j[0] = 1.0 / den;
        j[1] = p[0] * 2.0 * z * z / (p[1] * den * den);
        j[2] = p[0] * 4.0 * z / (p[1] * den * den);
        j[3] = 1.0;
    };
    const std::vector<Bound> bounds = {positive(), positive(), unbounded(), positive()};
    FitOptions opts;
    opts.absolute_weights = !weights.empty();
    auto res = levenberg_marquardt(model, jac, detuning_nm, intensity, weights,
                                   {a0, std::max(span / 4.0, 1e-6), x0,
                                    std::max(ymin, 1e-9 * a0)}, bounds, opts);

    LorentzianFit fit;
    fit.peak = res.params[0];
    fit.width_nm = res.params[1];
    fit.center_nm = res.params[2];
    fit.baseline = res.params[3];
    fit.center_sigma = res.sigma[2];
    fit.detail = std::move(res);
    return fit;
}

FanoFit fit_fano(const std::vector<double>& x, const std::vector<double>& y,
                 const FanoParams& init) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_fano: length mismatch");
    if (x.size() < 6) throw insufficient_data_error("fit_fano: need at least 6 points");

    auto model = [](double xv, const std::vector<double>& p) {
        const double om = 2.0 * (xv - p[0]) / p[1];
        const double num = p[2] + om;
        return p[4] + p[3] * num * num / (1.0 + om * om);
    };
    auto jac = [](double xv, const std::vector<double>& p, std::vector<double>& j) {
        const double om = 2.0 * (xv - p[0]) / p[1];
        const double num = p[2] + om;
        const double den = 1.0 + om * om;
        const double dr_dom = p[3] * (2.0 * num * den - num * num * 2.0 * om) / (den * den);
        j[0] = dr_dom * (-2.0 / p[1]);
        j[1] = dr_dom * (-om / p[1]);
        j[2] = p[3] * 2.0 * num / den;
        j[3] = num * num / den;
        j[4] = 1.0;
    };
    const std::vector<Bound> bounds = {unbounded(), positive(), unbounded(), positive(), unbounded()};
    auto res = levenberg_marquardt(model, jac, x, y, {},
                                   {init.center, init.width, init.asymmetry,
                                    init.amplitude, init.baseline}, bounds);

    FanoFit fit;
    fit.params = init;
    fit.params.center = res.params[0];
    fit.params.width = res.params[1];
    fit.params.asymmetry = res.params[2];
    fit.params.amplitude = res.params[3];
    fit.params.baseline = res.params[4];
    fit.center_sigma = res.sigma[0];
    fit.width_sigma = res.sigma[1];
    fit.detail = std::move(res);
    return fit;
}

PolarizationFit fit_polarization(const std::vector<double>& theta_deg,
                                 const std::vector<double>& intensity) {
    if (theta_deg.size() != intensity.size())
        throw std::invalid_argument("fit_polarization: length mismatch");
    if (theta_deg.size() < 4)
        throw insufficient_data_error("fit_polarization: need at least 4 points");

    const auto it_max = std::max_element(intensity.begin(), intensity.end());
    const double ymax = *it_max;
    const double ymin = *std::min_element(intensity.begin(), intensity.end());
    if (!(ymax > 0.0))
        throw insufficient_data_error("fit_polarization: all intensities are zero");
    const double v0 = std::clamp((ymax - ymin) / ymax, 1e-3, 1.0 - 1e-3);
    const double th0 = theta_deg[static_cast<std::size_t>(it_max - intensity.begin())];

    constexpr double deg = 3.14159265358979323846 / 180.0;
    auto model = [](double th, const std::vector<double>& p) {
        const double c = std::cos((th - p[2]) * deg);
        return p[0] * (1.0 - p[1] + p[1] * c * c);
    };
    auto jac = [](double th, const std::vector<double>& p, std::vector<double>& j) {
        const double arg = (th - p[2]) * deg;
        const double c = std::cos(arg);
        j[0] = 1.0 - p[1] + p[1] * c * c;
        j[1] = p[0] * (c * c - 1.0);
        j[2] = p[0] * p[1] * 2.0 * c * std::sin(arg) * deg;
    };
    const std::vector<Bound> bounds = {positive(), Bound{0.0, 1.0}, unbounded()};
    auto res = levenberg_marquardt(model, jac, theta_deg, intensity, {},
                                   {ymax, v0, th0}, bounds);

    PolarizationFit fit;
    fit.i0 = res.params[0];
    fit.visibility = res.params[1];
    fit.theta0_deg = std::fmod(std::fmod(res.params[2], 180.0) + 180.0, 180.0);
    fit.theta0_sigma = res.sigma[2];
    fit.detail = std::move(res);
    return fit;
}

}
