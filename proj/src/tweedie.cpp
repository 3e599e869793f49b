#include "fdm/tweedie.hpp"

#include <cmath>
#include <numbers>

#include "fdm/error.hpp"

namespace fdm {

double unit_deviance(double y, double mu, double p)
{
    if (p > 0.0 && p < 1.0)
        fail(ErrorKind::domain, "deviance: no Tweedie model for 0 < p < 1");
    if (p == 0.0)
        return (y - mu) * (y - mu);
    if (!(mu > 0.0))
        fail(ErrorKind::domain, "deviance: mu must be positive");
    if (!(y >= 0.0) || (p >= 2.0 && y == 0.0))
        fail(ErrorKind::domain, "deviance: y outside the support");
    if (p == 1.0)
        return y == 0.0 ? 2.0 * mu : 2.0 * (y * std::log(y / mu) - (y - mu));
    if (p == 2.0)
        return 2.0 * (y / mu - 1.0 - std::log(y / mu));
    double d = std::pow(y, 2.0 - p) / ((1.0 - p) * (2.0 - p)) - y * std::pow(mu, 1.0 - p) / (1.0 - p) +
               std::pow(mu, 2.0 - p) / (2.0 - p);
    return std::max(0.0, 2.0 * d);
}

TweedieSampler::TweedieSampler(TweedieParams params, bool allow_tilted_stable) : params_(params)
{
    const double p = params_.p, mu = params_.mu, g = params_.gamma;
    if (!(p >= 1.0) || !std::isfinite(p))
        fail(ErrorKind::parameter, "tweedie sampler: need p >= 1");
    if (!(mu > 0.0) || !(g > 0.0))
        fail(ErrorKind::parameter, "tweedie sampler: mu and gamma must be positive");
    if (p > 1.0 && p < 2.0) {
        rate_ = std::pow(mu, 2.0 - p) / (g * (2.0 - p));
        shape_ = (2.0 - p) / (p - 1.0);
        scale_ = g * (p - 1.0) * std::pow(mu, p - 1.0);
    } else if (p > 2.0 && p != 3.0) {
        if (!allow_tilted_stable)
            fail(ErrorKind::unsupported, "tweedie sampler: tilted-stable branch disabled");
        alpha_ = (p - 2.0) / (p - 1.0);
        beta_ = g * (p - 1.0) * std::pow(mu, p - 1.0);
        delta_ = mu / (alpha_ * beta_);
        // Acceptance of each piece is exp(-delta / pieces) >= e^{-1}.
        pieces_ = std::max(1, static_cast<int>(std::ceil(delta_)));
    }
}

// Kanter's representation of the positive stable law with Laplace transform
// exp(-delta u^alpha).
double TweedieSampler::positive_stable(Rng &rng, double delta)
{
    std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);
    std::exponential_distribution<double> expo(1.0);
    const double a = alpha_;
    double u = unif(rng);
    while (u == 0.0)
        u = unif(rng);
    double e = expo(rng);
    double s1 = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
                std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
    return std::pow(delta, 1.0 / a) * s1;
}

double TweedieSampler::operator()(Rng &rng)
{
    const double p = params_.p, mu = params_.mu, g = params_.gamma;
    if (p == 1.0) {
        std::poisson_distribution<long long> po(mu / g);
        return g * static_cast<double>(po(rng));
    }
    if (p < 2.0) {
        std::poisson_distribution<long long> po(rate_);
        long long n = po(rng);
        if (n == 0)
            return 0.0;
        std::gamma_distribution<double> ga(static_cast<double>(n) * shape_, scale_);
        return ga(rng);
    }
    if (p == 2.0) {
        std::gamma_distribution<double> ga(1.0 / g, g * mu);
        return ga(rng);
    }
    if (p == 3.0) {
        // Michael, Schucany and Haas.
        const double lam = 1.0 / g;
        std::normal_distribution<double> norm(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double v = norm(rng);
        double y = v * v;
        double x = mu + mu * mu * y / (2.0 * lam) -
                   mu / (2.0 * lam) * std::sqrt(4.0 * mu * lam * y + mu * mu * y * y);
        if (unif(rng) <= mu / (mu + x))
            return x;
        return mu * mu / x;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double piece = delta_ / pieces_;
    double w = 0.0;
    for (int i = 0; i < pieces_; ++i) {
        for (;;) {
            double s = positive_stable(rng, piece);
            ++stats_.proposals;
            if (unif(rng) <= std::exp(-s)) {
                ++stats_.accepted;
                w += s;
                break;
            }
        }
    }
    return beta_ * w;
}

double sample_tweedie(const TweedieParams &params, Rng &rng)
{
    TweedieSampler s(params);
    return s(rng);
}

} // namespace fdm
