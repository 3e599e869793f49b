#ifndef FDM_SERIES_HPP
#define FDM_SERIES_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fdm {

inline constexpr std::size_t default_truncation = 512;
inline constexpr double default_tail_tol = 1e-9;

// Truncated power series c_0 + c_1 x + ... + c_N x^N.
class PowerSeries {
public:
    PowerSeries() : coeffs_(1, 0.0) {}
    explicit PowerSeries(std::size_t order) : coeffs_(order + 1, 0.0) {}
    explicit PowerSeries(std::vector<double> coeffs);

    std::size_t order() const noexcept { return coeffs_.size() - 1; }
    std::size_t size() const noexcept { return coeffs_.size(); }

    double operator[](std::size_t k) const { return coeffs_[k]; }
    double &operator[](std::size_t k) { return coeffs_[k]; }

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::vector<double> &data() noexcept { return coeffs_; }

    bool finite() const noexcept;

private:
    std::vector<double> coeffs_;
};

// exp of a truncated series: n g_n = sum_k k h_k g_{n-k}, with compensated
// summation and internal rescaling so g_0 may under- or overflow harmlessly.
PowerSeries exp_series(const PowerSeries &h);

// Inverse of exp_series; requires h_0 > 0.
PowerSeries log_series(const PowerSeries &g);

// Truncated product.
PowerSeries multiply(const PowerSeries &a, const PowerSeries &b, std::size_t order);

// f(g(x)) for a series g with g_0 == 0 (the constant term is ignored).
PowerSeries compose(const PowerSeries &outer, const PowerSeries &inner);

// Probabilities p_0..p_N with an upper bound on P(X > N).
class PmfTable {
public:
    PmfTable() = default;
    // tail_bound is taken as max(0, 1 - sum(probs)).
    explicit PmfTable(std::vector<double> probs, double tail_tol = default_tail_tol);
    PmfTable(std::vector<double> probs, double tail_bound, double tail_tol);

    std::size_t max_k() const noexcept { return probs_.size() - 1; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t k) const { return k < probs_.size() ? probs_[k] : 0.0; }
    std::span<const double> probs() const noexcept { return probs_; }
    double tail_bound() const noexcept { return tail_bound_; }
    double total() const;

    double tail_tol() const noexcept { return tail_tol_; }
    // False when the table was truncated with more than tail_tol mass missing.
    bool complete() const noexcept { return tail_bound_ <= tail_tol_; }

    double mean() const;
    double variance() const;

    static PmfTable degenerate(std::size_t at, std::size_t max_k);

private:
    std::vector<double> probs_{1.0};
    double tail_bound_ = 0.0;
    double tail_tol_ = default_tail_tol;
};

class AnalyticFcgf;

// p_n is the u^n coefficient of exp(C(u - 1)).
PmfTable pmf_from_fcgf(const AnalyticFcgf &f, std::size_t max_k = default_truncation,
                       double tail_tol = default_tail_tol);

// Same as pmf_from_fcgf but with no non-negativity enforcement; returns the raw
// coefficients so callers can inspect an invalid FCGF.
std::vector<double> raw_pmf_coefficients(const AnalyticFcgf &f, std::size_t max_k);

// Binomial thinning by c in (0, 1].
PmfTable thin_pmf(const PmfTable &f, double c, double tail_tol = default_tail_tol);

// Convolution, truncated at max(f.max_k, g.max_k) unless max_k is given.
PmfTable convolve_pmf(const PmfTable &f, const PmfTable &g, std::size_t max_k = 0,
                      double tail_tol = default_tail_tol);

// n-fold convolution by repeated squaring.
PmfTable convolve_power(const PmfTable &f, std::size_t n, std::size_t max_k = 0,
                        double tail_tol = default_tail_tol);

// Upper bound on the total variation distance (half L1 norm), counting both
// tail bounds as worst-case disagreement.
double tv_distance(const PmfTable &a, const PmfTable &b);

PmfTable poisson_table(double mean, std::size_t max_k);
PmfTable binomial_table(std::size_t n, double q, std::size_t max_k);

void write_csv(std::ostream &os, const PmfTable &table);
std::string to_json(const PmfTable &table);
PmfTable pmf_from_json(const std::string &text);

// Locale-independent shortest round-trip (or fixed significant digits) formatting.
std::string format_double(double x, int significant_digits = 17);

} // namespace fdm

#endif
