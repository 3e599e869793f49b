#ifndef FDM_POISSON_TWEEDIE_HPP
#define FDM_POISSON_TWEEDIE_HPP

#include <cstdint>
#include <vector>

#include "fdm/fcgf.hpp"
#include "fdm/tweedie.hpp"

namespace fdm {

// PT_p(mu, gamma): p = 0 is the Hermite case, p >= 1 the Poisson-Tweedie mixtures.
struct PtParams {
    double p = 2.0;
    double mu = 1.0;
    double gamma = 1.0;
};

void validate(const PtParams &params);

AnalyticFcgf pt_fcgf(const PtParams &params);

// c . PT_p(mu, gamma) = PT_p(c mu, c^{2-p} gamma)
PtParams pt_dilate(const PtParams &params, double c);

// Duality between additive (mu, lambda) and reproductive (mu, gamma = 1/lambda).
struct Additive {
    double mu;
    double lambda;
};
struct Reproductive {
    double mu;
    double gamma;
};
Reproductive to_reproductive(const Additive &a);
Additive to_additive(const Reproductive &r);

// FD(mu, gamma) = gamma . FD*(mu, 1/gamma) on the FCGF level.
AnalyticFcgf reproductive_from_additive(const AnalyticFcgf &additive, double lambda);

// Y ~ Tw_p(mu, gamma), X | Y ~ Po(Y). For p = 0, inversion of the exact PMF.
std::vector<std::int64_t> sample_pt(const PtParams &params, std::size_t n, Rng &rng);

} // namespace fdm

#endif
