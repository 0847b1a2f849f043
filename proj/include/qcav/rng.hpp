#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qcav {

// splitmix64 step, used to derive independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled variate mappings.  The engine's output sequence is
// fixed by the standard; std::*_distribution is not, so none of it is used here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in (0, 1]; never returns 0, safe under log().
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // exponential waiting time with the given rate (mean 1/rate).
    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

    bool bernoulli(double p) {
        return uniform() <= p;
    }

    // selects index i with probability rates[i]/total over n entries.
    int choose(const double* rates, int n, double total) {
        const double u = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            acc += rates[i];
            if (u <= acc) return i;
        }
        return n - 1;
    }

    // standard normal via Box-Muller, pairwise cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}
