#include "qcav/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qcav/errors.hpp"
#include "qcav/linalg.hpp"
#include "qcav/rng.hpp"

namespace qcav {

void EmitterParams::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::domain_error(std::string("EmitterParams: ") + name + " must be >= 0 and finite");
    };
    nonneg(pump_rate, "pump_rate");
    nonneg(nonradiative_rate, "nonradiative_rate");
    nonneg(isc_rate, "isc_rate");
    nonneg(triplet_decay_rate, "triplet_decay_rate");
    if (!(radiative_rate > 0.0))
        throw std::domain_error("EmitterParams: radiative_rate must be > 0");
    if (!(debye_waller > 0.0 && debye_waller <= 1.0))
        throw std::domain_error("EmitterParams: debye_waller must be in (0, 1]");
    if (!std::isfinite(dipole_angle_deg))
        throw std::domain_error("EmitterParams: dipole_angle_deg must be finite");
}

double EmitterParams::total_decay_rate(double enhancement) const {
    return radiative_rate * (enhancement * debye_waller + 1.0 - debye_waller)
         + nonradiative_rate + isc_rate;
}

double EmitterParams::zpl_fraction(double enhancement) const {
    const double zpl = enhancement * debye_waller;
    return zpl / (zpl + 1.0 - debye_waller);
}

SteadyState steady_state_populations(const EmitterParams& p, double enhancement) {
    const double a = p.total_decay_rate(enhancement);
    const double back_rate = p.radiative_rate * (enhancement * p.debye_waller + 1.0 - p.debye_waller)
                           + p.nonradiative_rate;
    if (p.isc_rate == 0.0) {
        const double denom = p.pump_rate + a;
        if (denom <= 0.0)
            throw degenerate_model_error("steady_state_populations: all rates vanish");
        const double ps = p.pump_rate / denom;
        return {1.0 - ps, ps, 0.0};
    }
    // Balance rows for G and S plus the normalization row.
    double m[9] = {-p.pump_rate, back_rate, p.triplet_decay_rate,
                   p.pump_rate,  -a,        0.0,
                   1.0,          1.0,       1.0};
    double rhs[3] = {0.0, 0.0, 1.0};
    if (!solve_linear(m, rhs, 3))
        throw degenerate_model_error("steady_state_populations: singular rate matrix");
    return {rhs[0], rhs[1], rhs[2]};
}

namespace {

struct G2System {
    double pump, total, shelf_in, shelf_out, ps_inf;
};

G2System g2_system(const EmitterParams& p, double enhancement) {
    p.validate();
    if (!(p.pump_rate > 0.0))
        throw degenerate_model_error("analytic_g2: pump_rate must be > 0 for a cw correlation");
    if (p.isc_rate > 0.0 && p.triplet_decay_rate == 0.0)
        throw degenerate_model_error("analytic_g2: triplet shelf is absorbing (isc_rate > 0, triplet_decay_rate = 0)");
    G2System s;
    s.pump = p.pump_rate;
    s.total = p.total_decay_rate(enhancement);
    s.shelf_in = p.isc_rate;
    s.shelf_out = p.triplet_decay_rate;
    const double shelf_ratio = s.shelf_in > 0.0 ? s.shelf_in / s.shelf_out : 0.0;
    s.ps_inf = 1.0 / (1.0 + s.total / s.pump + shelf_ratio);
    return s;
}

}

G2Law analytic_g2_law(const EmitterParams& p, double enhancement) {
    const G2System sys = g2_system(p, enhancement);
    // Nontrivial eigenvalues of the rate matrix solve
    // mu^2 + s1 mu + s2 = 0 with the invariants below.
    const double s1 = sys.pump + sys.total + sys.shelf_out;
    const double s2 = sys.pump * sys.shelf_in + sys.pump * sys.shelf_out + sys.total * sys.shelf_out;
    const double disc = s1 * s1 - 4.0 * s2;

    G2Law law;
    if (disc > 1e-12 * s1 * s1) {
        const double root = std::sqrt(disc);
        const double mu1 = -0.5 * (s1 + root);      // fast
        const double mu2 = -2.0 * s2 / (s1 + root); // slow, cancellation-free
        const double c1 = (sys.pump + mu2 * sys.ps_inf) / (mu1 - mu2);
        const double c2 = -(sys.pump + mu1 * sys.ps_inf) / (mu1 - mu2);
        law.fast_rate = -mu1;
        law.slow_rate = -mu2;
        law.fast_coeff = c1 / sys.ps_inf;
        law.slow_coeff = c2 / sys.ps_inf;
    } else if (disc < -1e-12 * s1 * s1) {
        law.oscillatory = true;
        law.sigma = 0.5 * s1;
        law.osc_freq = 0.5 * std::sqrt(-disc);
        law.fast_coeff = -1.0;
        law.slow_coeff = (sys.pump - law.sigma * sys.ps_inf) / (law.osc_freq * sys.ps_inf);
    } else {
        const double mu = -0.5 * s1;
        law.linear_term = true;
        law.fast_rate = -mu;
        law.fast_coeff = -1.0;
        law.lin_coeff = (sys.pump + mu * sys.ps_inf) / sys.ps_inf;
    }
    return law;
}

double G2Law::operator()(double tau_ns) const {
    const double tau = std::fabs(tau_ns);
    if (tau == 0.0) return 0.0;
    if (oscillatory) {
        return 1.0 + std::exp(-sigma * tau)
                   * (fast_coeff * std::cos(osc_freq * tau) + slow_coeff * std::sin(osc_freq * tau));
    }
    if (linear_term) {
        return 1.0 + (fast_coeff + lin_coeff * tau) * std::exp(-fast_rate * tau);
    }
    return 1.0 + fast_coeff * std::exp(-fast_rate * tau) + slow_coeff * std::exp(-slow_rate * tau);
}

double analytic_g2(const EmitterParams& p, double tau_ns, double enhancement) {
    return analytic_g2_law(p, enhancement)(tau_ns);
}

void PhotonStream::validate() const {
    if (tags_ps.size() != channels.size())
        throw std::invalid_argument("PhotonStream: tag/channel length mismatch");
    for (std::size_t i = 0; i < tags_ps.size(); ++i) {
        if (i > 0 && tags_ps[i] <= tags_ps[i - 1])
            throw std::invalid_argument("PhotonStream: tags must be strictly increasing");
        if (tags_ps[i] >= duration_ps)
            throw std::invalid_argument("PhotonStream: tag beyond stream duration");
    }
}

std::size_t count_channel(const PhotonStream& s, Channel c) {
    return static_cast<std::size_t>(std::count(s.channels.begin(), s.channels.end(), c));
}

namespace {

void push_tag(std::vector<std::uint64_t>& tags, std::vector<Channel>& chans,
              double t_ps, std::uint64_t limit_ps, Channel c) {
    auto tag = static_cast<std::uint64_t>(t_ps);
    if (!tags.empty() && tag <= tags.back()) tag = tags.back() + 1;
    if (tag >= limit_ps) return;
    tags.push_back(tag);
    chans.push_back(c);
}

// One continuous-wave segment starting in the ground state at local time zero.
void run_cw_segment(const EmitterParams& p, double enhancement,
                    std::uint64_t duration_ps, std::uint64_t seed,
                    std::vector<std::uint64_t>& tags, std::vector<Channel>& chans) {
    Rng rng(seed);
    const double emit_rate = p.radiative_rate * (enhancement * p.debye_waller + 1.0 - p.debye_waller);
    const double total = emit_rate + p.nonradiative_rate + p.isc_rate;
    const double zpl_prob = p.zpl_fraction(enhancement);
    const double branch[3] = {emit_rate, p.nonradiative_rate, p.isc_rate};

    int state = 0;  // 0 = ground, 1 = excited, 2 = triplet
    double t_ps = 0.0;
    while (true) {
        double rate;
        if (state == 0) rate = p.pump_rate;
        else if (state == 1) rate = total;
        else rate = p.triplet_decay_rate;
        if (rate <= 0.0) break;  // absorbing state, nothing more happens

        t_ps += rng.exponential(rate) * 1000.0;
        if (t_ps >= static_cast<double>(duration_ps)) break;

        if (state == 0) {
            state = 1;
        } else if (state == 2) {
            state = 0;
        } else {
            const int k = rng.choose(branch, 3, total);
            if (k == 0) {
                push_tag(tags, chans, t_ps, duration_ps,
                         rng.bernoulli(zpl_prob) ? Channel::zpl : Channel::sideband);
                state = 0;
            } else if (k == 1) {
                state = 0;
            } else {
                state = 2;
            }
        }
    }
}

}

PhotonStream simulate_cw(const EmitterParams& p, double enhancement,
                         std::uint64_t duration_ps, std::uint64_t seed, int shards) {
    p.validate();
    if (shards < 1) throw std::invalid_argument("simulate_cw: shards must be >= 1");
    if (!(enhancement >= 0.0)) throw std::domain_error("simulate_cw: enhancement must be >= 0");

    PhotonStream out;
    out.duration_ps = duration_ps;
    out.seed = seed;
    if (duration_ps == 0) return out;

    const auto n = static_cast<std::uint64_t>(shards);
    if (n > duration_ps) throw std::invalid_argument("simulate_cw: more shards than picoseconds");
    const std::uint64_t seg = duration_ps / n;

    std::vector<std::vector<std::uint64_t>> tag_parts(shards);
    std::vector<std::vector<Channel>> chan_parts(shards);

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < shards; ++i) {
        const std::uint64_t begin = seg * static_cast<std::uint64_t>(i);
        const std::uint64_t end = (i + 1 == shards) ? duration_ps : begin + seg;
        run_cw_segment(p, enhancement, end - begin, mix_seed(seed, static_cast<std::uint64_t>(i)),
                       tag_parts[i], chan_parts[i]);
        for (auto& t : tag_parts[i]) t += begin;
    }

    for (int i = 0; i < shards; ++i) {
        for (std::size_t j = 0; j < tag_parts[i].size(); ++j) {
            auto tag = tag_parts[i][j];
            if (!out.tags_ps.empty() && tag <= out.tags_ps.back()) tag = out.tags_ps.back() + 1;
            if (tag >= duration_ps) continue;
            out.tags_ps.push_back(tag);
            out.channels.push_back(chan_parts[i][j]);
        }
    }
    return out;
}

PhotonStream simulate_pulsed(const EmitterParams& p, double enhancement,
                             double rep_period_ns, std::uint64_t n_pulses,
                             double excitation_prob, std::uint64_t seed) {
    p.validate();
    if (!(rep_period_ns > 0.0)) throw std::domain_error("simulate_pulsed: rep_period_ns must be > 0");
    if (!(excitation_prob >= 0.0 && excitation_prob <= 1.0))
        throw std::domain_error("simulate_pulsed: excitation_prob must be in [0, 1]");
    if (!(enhancement >= 0.0)) throw std::domain_error("simulate_pulsed: enhancement must be >= 0");

    Rng rng(seed);
    const double emit_rate = p.radiative_rate * (enhancement * p.debye_waller + 1.0 - p.debye_waller);
    const double total = emit_rate + p.nonradiative_rate + p.isc_rate;
    const double zpl_prob = p.zpl_fraction(enhancement);
    const double branch[3] = {emit_rate, p.nonradiative_rate, p.isc_rate};
    const auto period_ps = static_cast<std::uint64_t>(std::llround(rep_period_ns * 1000.0));

    PhotonStream out;
    out.duration_ps = n_pulses * period_ps;
    out.seed = seed;

    double busy_until_ns = 0.0;  // time at which the current decay chain reaches G
    for (std::uint64_t k = 0; k < n_pulses; ++k) {
        const double t0 = static_cast<double>(k) * rep_period_ns;
        if (t0 < busy_until_ns) continue;
        if (!rng.bernoulli(excitation_prob)) continue;

        double t = t0;
        int state = 1;
        while (state != 0) {
            if (state == 1) {
                t += rng.exponential(total);
                const int b = rng.choose(branch, 3, total);
                if (b == 0) {
                    push_tag(out.tags_ps, out.channels, t * 1000.0, out.duration_ps,
                             rng.bernoulli(zpl_prob) ? Channel::zpl : Channel::sideband);
                    state = 0;
                } else if (b == 1) {
                    state = 0;
                } else {
                    state = 2;
                }
            } else {
                if (p.triplet_decay_rate <= 0.0) {
                    t = std::numeric_limits<double>::infinity();
                    break;
                }
                t += rng.exponential(p.triplet_decay_rate);
                state = 0;
            }
        }
        busy_until_ns = t;
    }
    return out;
}

PhotonStream add_background(const PhotonStream& s, double rate_per_s, std::uint64_t seed) {
    if (!(rate_per_s >= 0.0)) throw std::domain_error("add_background: rate must be >= 0");
    s.validate();
    if (rate_per_s == 0.0) return s;

    Rng rng(seed);
    const double rate_ps = rate_per_s * 1e-12;
    std::vector<std::uint64_t> bg;
    for (double t = rng.exponential(rate_ps); t < static_cast<double>(s.duration_ps);
         t += rng.exponential(rate_ps)) {
        bg.push_back(static_cast<std::uint64_t>(t));
    }

    PhotonStream out;
    out.duration_ps = s.duration_ps;
    out.seed = s.seed;
    out.tags_ps.reserve(s.size() + bg.size());
    out.channels.reserve(s.size() + bg.size());

    std::size_t i = 0, j = 0;
    auto append = [&out](std::uint64_t tag, Channel c) {
        if (!out.tags_ps.empty() && tag <= out.tags_ps.back()) tag = out.tags_ps.back() + 1;
        if (tag >= out.duration_ps) return;
        out.tags_ps.push_back(tag);
        out.channels.push_back(c);
    };
    while (i < s.size() || j < bg.size()) {
        if (j >= bg.size() || (i < s.size() && s.tags_ps[i] <= bg[j])) {
            append(s.tags_ps[i], s.channels[i]);
            ++i;
        } else {
            append(bg[j], Channel::background);
            ++j;
        }
    }
    return out;
}

}
