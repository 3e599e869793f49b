#ifndef FDM_FCGF_HPP
#define FDM_FCGF_HPP

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdm/series.hpp"

namespace fdm {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// Open interval (lo, hi); endpoints may be infinite.
struct Interval {
    double lo = -infinity;
    double hi = infinity;

    bool contains(double t) const noexcept { return t > lo && t < hi; }
    bool empty() const noexcept { return !(lo < hi); }
    Interval intersect(const Interval &o) const noexcept;
    Interval shifted(double by) const noexcept { return {lo + by, hi + by}; }
};

struct FcgfFlags {
    bool infinitely_divisible = false;
    bool infinitely_dilatable = false;
};

namespace detail {
class FcgfImpl;
}

class AnalyticFcgf;

// C(t) = shift * log(1 + t) + regular(t), regular analytic at t = -1.
struct LatticeShift {
    std::size_t shift = 0;
    std::shared_ptr<const detail::FcgfImpl> regular;
};

// A factorial cumulant generating function C(t) = log E[(1+t)^X] together with
// closed-form Taylor expansions. Values are immutable and cheap to copy.
//
// analytic_interval() is the interval around 0 on which the closed form is
// real analytic; it may extend below -1, which is what makes PMF extraction
// at t = -1 possible. domain() is that interval clipped to t > -1.
class AnalyticFcgf {
public:
    explicit AnalyticFcgf(std::shared_ptr<const detail::FcgfImpl> impl, FcgfFlags flags = {});

    double eval(double t) const;
    PowerSeries taylor_at(double t0, std::size_t order) const;
    double derivative(double t, std::size_t n) const;

    Interval analytic_interval() const;
    Interval domain() const;

    bool infinitely_divisible() const noexcept { return flags_.infinitely_divisible; }
    bool infinitely_dilatable() const noexcept { return flags_.infinitely_dilatable; }
    FcgfFlags flags() const noexcept { return flags_; }
    AnalyticFcgf with_flags(FcgfFlags flags) const { return AnalyticFcgf(impl_, flags); }

    std::string describe() const;
    std::optional<LatticeShift> lattice_shift() const;

    const std::shared_ptr<const detail::FcgfImpl> &impl() const noexcept { return impl_; }

private:
    std::shared_ptr<const detail::FcgfImpl> impl_;
    FcgfFlags flags_;
};

// Closed-form building blocks.
namespace blocks {

struct LogTerm {
    double a; // weight
    double b; // slope: a * log(1 + b t)
};

// sum_i a_i log(1 + b_i t) + linear * t
AnalyticFcgf log_sum(std::vector<LogTerm> terms, double linear = 0.0, FcgfFlags flags = {});
// linear * t
AnalyticFcgf linear(double mu, FcgfFlags flags = {true, true});
// A [(1 + B t)^alpha - 1]
AnalyticFcgf power(double A, double B, double alpha, FcgfFlags flags = {});
// A (e^{B t} - 1)
AnalyticFcgf exponential(double A, double B, FcgfFlags flags = {});
// c_1 t + c_2 t^2 + ... (coeffs[0] must be zero)
AnalyticFcgf polynomial(std::vector<double> coeffs, FcgfFlags flags = {});
// -b log(1 + s (-t)^alpha), analytic for t < 0
AnalyticFcgf linnik(double b, double scale, double alpha, FcgfFlags flags = {});
// log Z(lambda (1+t), nu) - log Z(lambda, nu), Z(z, nu) = sum_x z^x / (x!)^nu
AnalyticFcgf com_poisson(double lambda, double nu, FcgfFlags flags = {});
// f + g
AnalyticFcgf sum(const AnalyticFcgf &f, const AnalyticFcgf &g, FcgfFlags flags = {});

// log Z(z, nu) computed by direct summation.
double com_log_normalizer(double z, double nu);

} // namespace blocks

// Unchecked structural operations. These never validate that the result is an
// FCGF; the checked operators below and the asymptotics pipelines build on them.
namespace raw {

// t -> C(alpha t / (1 + beta t))
AnalyticFcgf compose_mobius(const AnalyticFcgf &f, double alpha, double beta, FcgfFlags flags);
// t -> C(theta + t) - C(theta)
AnalyticFcgf shift(const AnalyticFcgf &f, double theta, FcgfFlags flags);
// t -> scale * C(t) + linear * t
AnalyticFcgf affine(const AnalyticFcgf &f, double scale, double linear, FcgfFlags flags);

} // namespace raw

// (C'(0), C''(0), ..., C^(n)(0))
std::vector<double> cumulants(const AnalyticFcgf &f, std::size_t n);

AnalyticFcgf dilate(const AnalyticFcgf &f, double c);
AnalyticFcgf geometric_thin(const AnalyticFcgf &f, double c);
AnalyticFcgf translate(const AnalyticFcgf &f, double mu);

// C(t) - mu t; certified by non-negativity of the PMF up to `order`.
AnalyticFcgf subtract(const AnalyticFcgf &f, double mu, std::size_t order = default_truncation);

AnalyticFcgf tilt(const AnalyticFcgf &f, double theta);

// C(t / (1 + a t)); when validate is set, the PMF up to `order` must be non-negative.
AnalyticFcgf m_transform(const AnalyticFcgf &f, double a, bool validate = false,
                         std::size_t order = default_truncation);

// FCGF of -X: C(-t / (1 + t)).
AnalyticFcgf reflect(const AnalyticFcgf &f);

// Is the PMF extracted from f non-negative (to -1e-10) up to `order`?
bool pmf_nonnegative(const AnalyticFcgf &f, std::size_t order);

struct DispersionReport {
    double mean = 0.0;
    double dispersion = 0.0;
    double fisher_index = 0.0;
    double zero_inflation = 0.0;
};

DispersionReport report(const AnalyticFcgf &f);
std::string to_json(const DispersionReport &r);

// Second derivative >= -1e-10 at every grid point.
bool convexity_check(const AnalyticFcgf &f, std::span<const double> grid);

// Central-difference derivative of f.eval; test-only cross check.
double finite_difference(const AnalyticFcgf &f, double t, int order);

} // namespace fdm

#endif
