#pragma once

#include <cstdint>
#include <vector>

namespace qcav {

// Photon labels carried per time tag.
enum class Channel : std::uint8_t { zpl = 0, sideband = 1, background = 2 };

// Three-level emitter: ground G, radiative excited state S, metastable shelf T.
// All rates in 1/ns.  Cavity coupling multiplies the ZPL part of the radiative
// rate by an enhancement factor F, so the total S decay is
//   Gamma_tot(F) = Gamma_r * (F*eta + 1 - eta) + Gamma_nr + Gamma_isc.
struct EmitterParams {
    double pump_rate = 0.01;                       // G -> S
    double radiative_rate = 1.0 / 53.6 - 2e-4;     // S -> G, photon emitted
    double nonradiative_rate = 0.0;                // S -> G, dark
    double isc_rate = 2e-4;                        // S -> T shelving
    double triplet_decay_rate = 1e-2;              // T -> G
    double debye_waller = 0.15;                    // ZPL fraction eta of radiative decay
    double dipole_angle_deg = 90.0;                // emission dipole axis

    void validate() const;

    double total_decay_rate(double enhancement = 1.0) const;
    // Probability that an emitted photon is on the ZPL given enhancement F.
    double zpl_fraction(double enhancement = 1.0) const;
};

struct SteadyState {
    double ground = 0.0;
    double excited = 0.0;
    double triplet = 0.0;
};

SteadyState steady_state_populations(const EmitterParams& p, double enhancement = 1.0);

// Closed-form normalized intensity autocorrelation of the three-level system,
// g2(tau) = 1 - (1+a) exp(-gamma_fast tau) + a exp(-gamma_slow tau)
// in the common overdamped case; underdamped rate pairs are handled too.
struct G2Law {
    double fast_rate = 0.0;     // 1/ns
    double slow_rate = 0.0;     // 1/ns
    double fast_coeff = 0.0;    // coefficient of exp(-fast_rate tau)
    double slow_coeff = 0.0;    // bunching shoulder amplitude
    bool oscillatory = false;   // complex eigenvalue pair
    double osc_freq = 0.0;      // rad/ns when oscillatory
    double sigma = 0.0;         // shared damping rate when oscillatory
    bool linear_term = false;   // degenerate (repeated) eigenvalue
    double lin_coeff = 0.0;

    double operator()(double tau_ns) const;
};

G2Law analytic_g2_law(const EmitterParams& p, double enhancement = 1.0);
double analytic_g2(const EmitterParams& p, double tau_ns, double enhancement = 1.0);

// Time-tagged photon record.  Tags are integer picoseconds, strictly increasing.
struct PhotonStream {
    std::vector<std::uint64_t> tags_ps;
    std::vector<Channel> channels;
    std::uint64_t duration_ps = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return tags_ps.size(); }
    void validate() const;
};

std::size_t count_channel(const PhotonStream& s, Channel c);

// Continuous-wave Gillespie run.  With shards > 1 the duration is cut into
// that many independently seeded segments; the result depends on the shard
// count but never on how many threads executed them.
PhotonStream simulate_cw(const EmitterParams& p, double enhancement,
                         std::uint64_t duration_ps, std::uint64_t seed,
                         int shards = 1);

// Pulsed excitation: at each pulse instant an emitter found in G is promoted
// to S with probability excitation_prob; decay chains then run freely.
PhotonStream simulate_pulsed(const EmitterParams& p, double enhancement,
                             double rep_period_ns, std::uint64_t n_pulses,
                             double excitation_prob, std::uint64_t seed);

// Poisson background merged into the stream, tagged Channel::background.
PhotonStream add_background(const PhotonStream& s, double rate_per_s,
                            std::uint64_t seed);

}
