#include "fdm/fcgf.hpp"

#include <algorithm>
#include <cmath>

#include "fdm/error.hpp"
#include "fdm/fcgf_impl.hpp"
#include "json.hpp"

namespace fdm {

namespace detail {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Preimage of J under s(t) = a t / (1 + b t), restricted to the branch of
// 1 + b t != 0 that contains t = 0.
Interval mobius_preimage(const Interval &J, double a, double b)
{
    if (b == 0.0) {
        double x = J.lo / a, y = J.hi / a;
        return {std::min(x, y), std::max(x, y)};
    }
    const double pole = -1.0 / b;
    const double lim = a / b;
    Interval img = ((b > 0) == (a > 0)) ? Interval{-infinity, lim} : Interval{lim, infinity};
    Interval K = J.intersect(img);
    auto inv = [&](double y) {
        if (std::isinf(y))
            return pole;
        if (y == lim)
            return b > 0 ? infinity : -infinity;
        return y / (a - b * y);
    };
    double x = inv(K.lo), y = inv(K.hi);
    return {std::min(x, y), std::max(x, y)};
}

class MobiusImpl final : public FcgfImpl {
public:
    MobiusImpl(ImplPtr inner, double alpha, double beta)
        : inner_(std::move(inner)), alpha_(alpha), beta_(beta)
    {
        analytic_ = mobius_preimage(inner_->analytic(), alpha_, beta_);
    }

    double eval(double t) const override
    {
        if (t == 0.0)
            return 0.0;
        if (!analytic_.contains(t))
            return nan;
        return inner_->eval(map(t));
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        const double w = 1.0 + beta_ * t0;
        auto c = inner_->taylor(map(t0), order);
        return compose_mobius_series(c, alpha_ / (w * w), beta_ / w);
    }

    Interval analytic() const override { return analytic_; }

    std::string describe() const override
    {
        return inner_->describe() + " o mobius(" + format_double(alpha_, 6) + ", " +
               format_double(beta_, 6) + ")";
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        // C(s_old(s_new(t)))
        return make_mobius(inner_, alpha_ * alpha, beta + beta_ * alpha);
    }

private:
    double map(double t) const { return alpha_ * t / (1.0 + beta_ * t); }

    ImplPtr inner_;
    double alpha_, beta_;
    Interval analytic_;
};

class ShiftImpl final : public FcgfImpl {
public:
    ShiftImpl(ImplPtr inner, double theta)
        : inner_(std::move(inner)), theta_(theta), base_(inner_->eval(theta))
    {
    }

    double eval(double t) const override
    {
        if (t == 0.0)
            return 0.0;
        return inner_->eval(theta_ + t) - base_;
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        auto c = inner_->taylor(theta_ + t0, order);
        c[0] = eval(t0);
        return c;
    }

    Interval analytic() const override { return inner_->analytic().shifted(-theta_); }

    std::string describe() const override
    {
        return inner_->describe() + " tilted by " + format_double(theta_, 6);
    }

    ImplPtr shifted(double theta) const override { return make_shift(inner_, theta_ + theta); }

    // Pushing dilations and scalings inside keeps the expansion point away
    // from the inner singularities.
    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0 || alpha == 0.0)
            return nullptr;
        return make_shift(make_mobius(inner_, alpha, 0.0), theta_ / alpha);
    }

    ImplPtr affine(double scale, double linear) const override
    {
        return make_shift(make_affine(inner_, scale, linear), theta_);
    }

private:
    ImplPtr inner_;
    double theta_;
    double base_;
};

class AffineImpl final : public FcgfImpl {
public:
    AffineImpl(ImplPtr inner, double scale, double linear)
        : inner_(std::move(inner)), scale_(scale), linear_(linear)
    {
    }

    double eval(double t) const override { return scale_ * inner_->eval(t) + linear_ * t; }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        auto c = inner_->taylor(t0, order);
        for (auto &x : c.data())
            x *= scale_;
        c[0] += linear_ * t0;
        if (order >= 1)
            c[1] += linear_;
        return c;
    }

    Interval analytic() const override { return inner_->analytic(); }

    std::string describe() const override
    {
        return format_double(scale_, 6) + "*" + inner_->describe() + " + " +
               format_double(linear_, 6) + "t";
    }

    ImplPtr affine(double scale, double linear) const override
    {
        return make_affine(inner_, scale_ * scale, linear_ * scale + linear);
    }

private:
    ImplPtr inner_;
    double scale_, linear_;
};

} // namespace

ImplPtr make_mobius(const ImplPtr &inner, double alpha, double beta)
{
    if (alpha == 1.0 && beta == 0.0)
        return inner;
    if (auto r = inner->mobius(alpha, beta))
        return r;
    return std::make_shared<MobiusImpl>(inner, alpha, beta);
}

ImplPtr make_shift(const ImplPtr &inner, double theta)
{
    if (theta == 0.0)
        return inner;
    if (auto r = inner->shifted(theta))
        return r;
    return std::make_shared<ShiftImpl>(inner, theta);
}

ImplPtr make_affine(const ImplPtr &inner, double scale, double linear)
{
    if (scale == 1.0 && linear == 0.0)
        return inner;
    if (auto r = inner->affine(scale, linear))
        return r;
    return std::make_shared<AffineImpl>(inner, scale, linear);
}

PowerSeries compose_mobius_series(const PowerSeries &c, double a, double b)
{
    // [tau^n] sum_k c_k (a tau / (1 + b tau))^k
    //   = sum_{k=1..n} c_k a^k C(n-1, k-1) (-b)^(n-k)
    const std::size_t n = c.order();
    PowerSeries out(n);
    out[0] = c[0];
    if (b == 0.0) {
        double ak = 1.0;
        for (std::size_t k = 1; k <= n; ++k) {
            ak *= a;
            out[k] = c[k] * ak;
        }
        return out;
    }
    std::vector<double> lf(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i)
        lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
    const double la = std::log(std::fabs(a));
    const double lb = std::log(std::fabs(b));
    for (std::size_t m = 1; m <= n; ++m) {
        double acc = 0.0, comp = 0.0;
        for (std::size_t k = 1; k <= m; ++k) {
            if (c[k] == 0.0)
                continue;
            int sign = c[k] > 0 ? 1 : -1;
            if (a < 0 && k % 2 == 1)
                sign = -sign;
            if (b > 0 && (m - k) % 2 == 1)
                sign = -sign;
            double l = std::log(std::fabs(c[k])) + static_cast<double>(k) * la +
                       static_cast<double>(m - k) * lb + lf[m - 1] - lf[k - 1] - lf[m - k];
            double v = sign * std::exp(l);
            double t = acc + v;
            comp += std::fabs(acc) >= std::fabs(v) ? (acc - t) + v : (v - t) + acc;
            acc = t;
        }
        out[m] = acc + comp;
    }
    return out;
}

} // namespace detail

Interval Interval::intersect(const Interval &o) const noexcept
{
    return {std::max(lo, o.lo), std::min(hi, o.hi)};
}

AnalyticFcgf::AnalyticFcgf(std::shared_ptr<const detail::FcgfImpl> impl, FcgfFlags flags)
    : impl_(std::move(impl)), flags_(flags)
{
    if (!impl_)
        fail(ErrorKind::parameter, "null FCGF implementation");
}

double AnalyticFcgf::eval(double t) const
{
    return impl_->eval(t);
}

PowerSeries AnalyticFcgf::taylor_at(double t0, std::size_t order) const
{
    if (!impl_->analytic().contains(t0))
        fail(ErrorKind::domain, "taylor_at: t0 = " + format_double(t0) + " outside the domain of " +
                                    describe());
    return impl_->taylor(t0, order);
}

double AnalyticFcgf::derivative(double t, std::size_t n) const
{
    auto c = taylor_at(t, n);
    double f = 1.0;
    for (std::size_t k = 2; k <= n; ++k)
        f *= static_cast<double>(k);
    return c[n] * f;
}

Interval AnalyticFcgf::analytic_interval() const
{
    return impl_->analytic();
}

Interval AnalyticFcgf::domain() const
{
    return impl_->analytic().intersect({-1.0, infinity});
}

std::string AnalyticFcgf::describe() const
{
    return impl_->describe();
}

std::optional<LatticeShift> AnalyticFcgf::lattice_shift() const
{
    return impl_->lattice_shift();
}

namespace raw {

AnalyticFcgf compose_mobius(const AnalyticFcgf &f, double alpha, double beta, FcgfFlags flags)
{
    if (alpha == 0.0 || !std::isfinite(alpha) || !std::isfinite(beta))
        fail(ErrorKind::parameter, "mobius: alpha must be finite and non-zero");
    return AnalyticFcgf(detail::make_mobius(f.impl(), alpha, beta), flags);
}

AnalyticFcgf shift(const AnalyticFcgf &f, double theta, FcgfFlags flags)
{
    if (!f.analytic_interval().contains(theta) && theta != 0.0)
        fail(ErrorKind::domain, "tilt: theta = " + format_double(theta) + " outside the domain");
    return AnalyticFcgf(detail::make_shift(f.impl(), theta), flags);
}

AnalyticFcgf affine(const AnalyticFcgf &f, double scale, double linear, FcgfFlags flags)
{
    return AnalyticFcgf(detail::make_affine(f.impl(), scale, linear), flags);
}

} // namespace raw

std::vector<double> cumulants(const AnalyticFcgf &f, std::size_t n)
{
    if (n < 1)
        fail(ErrorKind::parameter, "cumulants: n must be at least 1");
    if (!f.analytic_interval().contains(0.0))
        fail(ErrorKind::domain, "cumulants: 0 is not interior to the domain of " + f.describe());
    auto c = f.taylor_at(0.0, n);
    std::vector<double> out(n);
    double fact = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        fact *= static_cast<double>(k);
        out[k - 1] = c[k] * fact;
    }
    return out;
}

AnalyticFcgf dilate(const AnalyticFcgf &f, double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        fail(ErrorKind::parameter, "dilate: c must be positive");
    if (c > 1.0 && !f.infinitely_dilatable())
        fail(ErrorKind::dilation_unavailable,
             "dilate: c = " + format_double(c) + " > 1 needs an infinitely dilatable FCGF");
    if (c == 1.0)
        return f;
    return raw::compose_mobius(f, c, 0.0, f.flags());
}

AnalyticFcgf geometric_thin(const AnalyticFcgf &f, double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        fail(ErrorKind::parameter, "geometric_thin: c must be positive");
    return raw::compose_mobius(f, c, -c, {f.infinitely_divisible(), true});
}

AnalyticFcgf translate(const AnalyticFcgf &f, double mu)
{
    if (!(mu >= 0.0) || !std::isfinite(mu))
        fail(ErrorKind::parameter, "translate: mu must be non-negative");
    return raw::affine(f, 1.0, mu, f.flags());
}

AnalyticFcgf subtract(const AnalyticFcgf &f, double mu, std::size_t order)
{
    if (!(mu >= 0.0) || !std::isfinite(mu))
        fail(ErrorKind::parameter, "subtract: mu must be non-negative");
    auto g = raw::affine(f, 1.0, -mu, {});
    if (!pmf_nonnegative(g, order))
        fail(ErrorKind::not_an_fcgf, "subtract: C(t) - " + format_double(mu) +
                                         "t has a negative PMF coefficient");
    return g;
}

AnalyticFcgf tilt(const AnalyticFcgf &f, double theta)
{
    if (theta == 0.0)
        return f;
    // Poisson mixtures tilt over the whole analytic interval, which may reach
    // below -1; anything else stays inside dom(C).
    bool ok = f.infinitely_dilatable() ? f.analytic_interval().contains(theta)
                                       : f.domain().contains(theta);
    if (!ok)
        fail(ErrorKind::domain, "tilt: theta = " + format_double(theta) + " outside dom(C)");
    return raw::shift(f, theta, f.flags());
}

AnalyticFcgf m_transform(const AnalyticFcgf &f, double a, bool validate, std::size_t order)
{
    if (!(a > -1.0) || !std::isfinite(a))
        fail(ErrorKind::parameter, "m_transform: a must exceed -1");
    if (a == 0.0)
        return f;
    auto g = raw::compose_mobius(f, 1.0, a, {});
    if (validate && !pmf_nonnegative(g, order))
        fail(ErrorKind::not_an_fcgf, "m_transform: negative PMF coefficient for a = " +
                                         format_double(a));
    return g;
}

AnalyticFcgf reflect(const AnalyticFcgf &f)
{
    return raw::compose_mobius(f, -1.0, 1.0, {});
}

bool pmf_nonnegative(const AnalyticFcgf &f, std::size_t order)
{
    auto probs = raw_pmf_coefficients(f, order);
    return std::all_of(probs.begin(), probs.end(),
                       [](double p) { return std::isfinite(p) && p >= -1e-10; });
}

DispersionReport report(const AnalyticFcgf &f)
{
    auto k = cumulants(f, 2);
    DispersionReport r;
    r.mean = k[0];
    r.dispersion = k[1];
    r.fisher_index = r.mean > 0 ? 1.0 + r.dispersion / r.mean : std::nan("");
    const Interval iv = f.analytic_interval();
    double c_minus_one;
    if (iv.contains(-1.0))
        c_minus_one = f.eval(-1.0);
    else if (iv.lo == -1.0)
        c_minus_one = f.lattice_shift() ? -infinity : f.eval(std::nextafter(-1.0, 0.0));
    else
        fail(ErrorKind::domain, "report: zero-inflation needs -1 in the closure of dom(C)");
    r.zero_inflation = r.mean > 0 ? 1.0 + c_minus_one / r.mean : std::nan("");
    return r;
}

std::string to_json(const DispersionReport &r)
{
    nlohmann::ordered_json j;
    j["mean"] = r.mean;
    j["dispersion"] = r.dispersion;
    j["fisher_index"] = r.fisher_index;
    j["zero_inflation"] = r.zero_inflation;
    return j.dump();
}

bool convexity_check(const AnalyticFcgf &f, std::span<const double> grid)
{
    for (double t : grid) {
        if (f.derivative(t, 2) < -1e-10)
            return false;
    }
    return true;
}

double finite_difference(const AnalyticFcgf &f, double t, int order)
{
    if (order == 1) {
        const double h = 1e-5 * (1.0 + std::fabs(t));
        return (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
    }
    if (order == 2) {
        const double h = 1e-4 * (1.0 + std::fabs(t));
        return (f.eval(t + h) - 2.0 * f.eval(t) + f.eval(t - h)) / (h * h);
    }
    fail(ErrorKind::parameter, "finite_difference: order must be 1 or 2");
}

} // namespace fdm
