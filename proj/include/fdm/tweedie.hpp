#ifndef FDM_TWEEDIE_HPP
#define FDM_TWEEDIE_HPP

#include <cstdint>
#include <random>

namespace fdm {

using Rng = std::mt19937_64;

// Tw_p(mu, gamma): mean mu, variance gamma * mu^p.
struct TweedieParams {
    double p = 2.0;
    double mu = 1.0;
    double gamma = 1.0;
};

// d(y; mu) = 2 int_mu^y (y - z) / z^p dz
double unit_deviance(double y, double mu, double p);

struct TiltedStableStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    double acceptance_rate() const
    {
        return proposals == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
    }
};

// Draws from Tw_p(mu, gamma), p >= 1.
//   p = 1      gamma * Po(mu / gamma)
//   1 < p < 2  compound Poisson-gamma
//   p = 2      gamma
//   p = 3      inverse Gaussian
//   p > 2      exponentially tilted positive stable, by rejection
// The tilted-stable branch keeps running acceptance counts.
class TweedieSampler {
public:
    explicit TweedieSampler(TweedieParams params, bool allow_tilted_stable = true);

    double operator()(Rng &rng);

    const TweedieParams &params() const noexcept { return params_; }
    const TiltedStableStats &stats() const noexcept { return stats_; }

private:
    double positive_stable(Rng &rng, double delta);

    TweedieParams params_;
    TiltedStableStats stats_;
    // compound Poisson-gamma
    double rate_ = 0.0, shape_ = 0.0, scale_ = 0.0;
    // tilted stable: Y = beta * W, W with Laplace exponent delta u^alpha, tilted by e^{-W}
    double alpha_ = 0.0, beta_ = 0.0, delta_ = 0.0;
    int pieces_ = 1;
};

double sample_tweedie(const TweedieParams &params, Rng &rng);

} // namespace fdm

#endif
