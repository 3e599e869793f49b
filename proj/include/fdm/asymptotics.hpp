#ifndef FDM_ASYMPTOTICS_HPP
#define FDM_ASYMPTOTICS_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fdm/families.hpp"
#include "fdm/fcgf.hpp"
#include "fdm/series.hpp"
#include "fdm/tweedie.hpp"

namespace fdm {

// TV distances of a sequence of exact laws to a fixed target.
struct ConvergenceRun {
    std::string experiment;
    std::string target;
    std::vector<double> control;
    std::vector<double> tv;
    // Worst-case slack in each tv value coming from truncated tails.
    std::vector<double> bound;
    // Grid points that could not be evaluated, with the reason.
    std::vector<std::string> skipped;

    // Least-squares slope of log tv against log control.
    double slope() const;
    bool strictly_decreasing() const;
};

void write_csv(std::ostream &os, const ConvergenceRun &run);
std::string to_json(const ConvergenceRun &run);

// Reproductive member FD(m, gamma): t -> C_theta(gamma t) / gamma with
// C'_theta(0) = m. Needs dilatability when gamma > 1 and divisibility when
// 1/gamma is not an integer.
AnalyticFcgf reproductive_member(const FamilySpec &family, double m, double gamma);
// Additive member FD*(m, lambda): t -> lambda C_theta(t).
AnalyticFcgf additive_member(const FamilySpec &family, double m, double lambda);

// Dilation average n^{-1} . (X_1 + ... + X_n) against Po(mu), by exact
// convolution and thinning of the base table.
ConvergenceRun thin_numbers(const PmfTable &base, double mu, const std::vector<std::size_t> &n_grid,
                            std::size_t max_k = 0);

// n^{-1/2} . [S_n (-) (n m - n^{1/2} mu)] against the Hermite law PT_0(mu, gamma),
// where m and gamma are the mean and dispersion of `base`. The composite FCGF
// n C(t / n^{1/2}) - (n^{1/2} m - mu) t must have a non-negative PMF; grid
// points where it does not are skipped.
ConvergenceRun hermite_clt(const AnalyticFcgf &base, double mu, const std::vector<std::size_t> &n_grid,
                           std::size_t max_k = default_truncation);

enum class Direction { down, up };

// c^{-1} . FD(c mu, c^{2-p} gamma) against PT_p(mu, gamma c0), where the
// family's dispersion function behaves as c0 mu^p at zero (down) or
// infinity (up).
ConvergenceRun pt_converge(const FamilySpec &family, double p, double c0, double mu, double gamma,
                           const std::vector<double> &c_grid, Direction direction,
                           std::size_t max_k = default_truncation);

// n^{1/2} . [FD(mu0 + n^{-1/2} mu, gamma / n) (-) mu0] against
// PT_0(mu, gamma v(mu0)).
ConvergenceRun hermite_revisited(const FamilySpec &family, double mu0, double mu, double gamma,
                                 const std::vector<std::size_t> &n_grid,
                                 std::size_t max_k = default_truncation);

// X_t = c . X_{t-1} (+) Po(lambda (1 - c)), started from Po(lambda).
struct Inar1Config {
    double lambda = 1.0;
    double c = 0.5;
    std::size_t length = 1000;
};
std::vector<std::int64_t> inar1_simulate(const Inar1Config &cfg, Rng &rng);

struct Inar1Summary {
    double mean;
    // Standard error of the mean, inflated by (1 + c)/(1 - c) for the
    // autocorrelation of the chain.
    double se_mean;
    double variance;
    double lag1_acf;
};
Inar1Summary summarize_inar1(const std::vector<std::int64_t> &path, double c);

enum class Boundary { zero, infinity };

// Log-log regression of |v| against mu.
struct DispersionFit {
    double slope;
    // v / mu^p at the grid point nearest the boundary; carries the sign of v.
    double c0;
    double expected_p;
    double max_residual;
};
DispersionFit dispersion_limit_check(const FamilySpec &family, double p, Boundary boundary,
                                     const std::vector<double> &grid);

} // namespace fdm

#endif
