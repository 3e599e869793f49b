#include "fdm/poisson_tweedie.hpp"

#include <algorithm>
#include <cmath>

#include "fdm/error.hpp"
#include "fdm/families.hpp"
#include "fdm/series.hpp"

namespace fdm {

void validate(const PtParams &params)
{
    const double p = params.p, mu = params.mu, g = params.gamma;
    if (!std::isfinite(p) || !std::isfinite(mu) || !std::isfinite(g))
        fail(ErrorKind::parameter, "pt: non-finite parameter");
    if (p < 0.0 || (p > 0.0 && p < 1.0))
        fail(ErrorKind::parameter, "pt: p must be 0 or at least 1 (p = " + format_double(p) + ")");
    if (!(mu > 0.0) || !(g > 0.0))
        fail(ErrorKind::parameter, "pt: mu and gamma must be positive");
    if (p == 0.0 && g > mu)
        fail(ErrorKind::parameter, "pt: the Hermite case needs gamma <= mu");
}

AnalyticFcgf pt_fcgf(const PtParams &params)
{
    validate(params);
    const double p = params.p, mu = params.mu, g = params.gamma;
    if (p == 0.0)
        return blocks::polynomial({0.0, mu, 0.5 * g}, {true, false});
    constexpr FcgfFlags mixture{true, true};
    if (p == 1.0)
        return blocks::exponential(mu / g, g, mixture);
    if (p == 2.0)
        return blocks::log_sum({{-1.0 / g, -g * mu}}, 0.0, mixture);
    // (mu / (-alpha beta)) [(1 - beta t)^alpha - 1]
    const double alpha = alpha_from_p(p);
    const double beta = g * (p - 1.0) * std::pow(mu, p - 1.0);
    return blocks::power(mu / (-alpha * beta), -beta, alpha, mixture);
}

PtParams pt_dilate(const PtParams &params, double c)
{
    validate(params);
    if (!(c > 0.0) || !std::isfinite(c))
        fail(ErrorKind::parameter, "pt_dilate: c must be positive");
    if (params.p == 0.0 && c > 1.0)
        fail(ErrorKind::parameter, "pt_dilate: the Hermite case only dilates with c < 1");
    return {params.p, c * params.mu, std::pow(c, 2.0 - params.p) * params.gamma};
}

Reproductive to_reproductive(const Additive &a)
{
    if (!(a.lambda > 0.0))
        fail(ErrorKind::parameter, "duality: lambda must be positive");
    return {a.mu, 1.0 / a.lambda};
}

Additive to_additive(const Reproductive &r)
{
    if (!(r.gamma > 0.0))
        fail(ErrorKind::parameter, "duality: gamma must be positive");
    return {r.mu, 1.0 / r.gamma};
}

AnalyticFcgf reproductive_from_additive(const AnalyticFcgf &additive, double lambda)
{
    return dilate(additive, to_reproductive({0.0, lambda}).gamma);
}

std::vector<std::int64_t> sample_pt(const PtParams &params, std::size_t n, Rng &rng)
{
    validate(params);
    std::vector<std::int64_t> out;
    out.reserve(n);
    if (params.p == 0.0) {
        // No mixture representation; invert the exact PMF.
        std::size_t max_k = default_truncation;
        auto f = pt_fcgf(params);
        PmfTable t = pmf_from_fcgf(f, max_k);
        while (!t.complete() && max_k < (1u << 16)) {
            max_k *= 2;
            t = pmf_from_fcgf(f, max_k);
        }
        std::vector<double> cdf(t.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k)
            cdf[k] = (acc += t[k]);
        std::uniform_real_distribution<double> unif(0.0, acc);
        for (std::size_t i = 0; i < n; ++i) {
            auto it = std::upper_bound(cdf.begin(), cdf.end(), unif(rng));
            out.push_back(std::min<std::int64_t>(it - cdf.begin(), static_cast<std::int64_t>(t.max_k())));
        }
        return out;
    }
    TweedieSampler tw({params.p, params.mu, params.gamma});
    for (std::size_t i = 0; i < n; ++i) {
        double y = tw(rng);
        if (y <= 0.0) {
            out.push_back(0);
            continue;
        }
        std::poisson_distribution<std::int64_t> po(y);
        out.push_back(po(rng));
    }
    return out;
}

} // namespace fdm
