// Closed-form FCGF blocks with exact Taylor expansions at any interior point.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdm/error.hpp"
#include "fdm/fcgf.hpp"
#include "fdm/fcgf_impl.hpp"

namespace fdm {

namespace {

using detail::FcgfImpl;
using detail::ImplPtr;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string num(double x)
{
    return format_double(x, 6);
}

bool is_nonneg_integer(double a)
{
    return a >= 0.0 && a == std::floor(a) && a < 1e9;
}

// sign * exp(log_mag)
double signed_exp(int sign, double log_mag)
{
    return sign == 0 ? 0.0 : sign * std::exp(log_mag);
}

// Generalized binomial coefficients C(alpha, k), k = 0..n, as (sign, log|.|).
void log_binomials(double alpha, std::size_t n, std::vector<int> &sign, std::vector<double> &lmag)
{
    sign.assign(n + 1, 0);
    lmag.assign(n + 1, 0.0);
    sign[0] = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        double f = alpha - static_cast<double>(k) + 1.0;
        if (sign[k - 1] == 0 || f == 0.0) {
            sign[k] = 0;
            continue;
        }
        sign[k] = sign[k - 1] * (f > 0 ? 1 : -1);
        lmag[k] = lmag[k - 1] + std::log(std::fabs(f)) - std::log(static_cast<double>(k));
    }
}

// ---------------------------------------------------------------------------

class LogSumImpl final : public FcgfImpl {
public:
    LogSumImpl(std::vector<blocks::LogTerm> terms, double linear) : linear_(linear)
    {
        // Merge equal slopes, snap slopes that are 1 up to rounding so the
        // lattice shift is detected after Mobius rewrites.
        std::sort(terms.begin(), terms.end(),
                  [](const auto &x, const auto &y) { return x.b < y.b; });
        for (auto t : terms) {
            if (std::fabs(t.b - 1.0) < 1e-12)
                t.b = 1.0;
            if (std::fabs(t.b) < 1e-15 || t.a == 0.0)
                continue;
            if (!terms_.empty() &&
                std::fabs(terms_.back().b - t.b) <= 1e-14 * std::max(1.0, std::fabs(t.b)))
                terms_.back().a += t.a;
            else
                terms_.push_back(t);
        }
        std::erase_if(terms_, [](const auto &t) { return std::fabs(t.a) < 1e-14; });
    }

    double eval(double t) const override
    {
        if (!analytic().contains(t) && t != 0.0)
            return nan;
        double s = linear_ * t;
        for (const auto &term : terms_)
            s += term.a * std::log1p(term.b * t);
        return s;
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        PowerSeries out(order);
        out[0] = eval(t0);
        if (order >= 1)
            out[1] = linear_;
        for (const auto &term : terms_) {
            double r = term.b / (1.0 + term.b * t0);
            double lr = std::log(std::fabs(r));
            for (std::size_t k = 1; k <= order; ++k) {
                int sign = (k % 2 == 1 ? 1 : -1) * ((r < 0 && k % 2 == 1) ? -1 : 1);
                out[k] += term.a * signed_exp(sign, static_cast<double>(k) * lr -
                                                        std::log(static_cast<double>(k)));
            }
        }
        return out;
    }

    Interval analytic() const override
    {
        Interval iv;
        for (const auto &term : terms_) {
            if (term.b > 0)
                iv.lo = std::max(iv.lo, -1.0 / term.b);
            else
                iv.hi = std::min(iv.hi, -1.0 / term.b);
        }
        return iv;
    }

    std::string describe() const override
    {
        std::ostringstream os;
        os << "logsum(";
        for (const auto &t : terms_)
            os << num(t.a) << "*log(1+" << num(t.b) << "t) ";
        os << "+ " << num(linear_) << "t)";
        return os.str();
    }

    // n log(1 + q t) is binomial; its log series at -1 grows like (q/(1-q))^k,
    // so the series route loses accuracy once q > 1/2.
    std::optional<std::vector<double>> pmf(std::size_t max_k) const override
    {
        if (linear_ != 0.0 || terms_.size() != 1)
            return std::nullopt;
        const auto &t = terms_.front();
        if (!(t.b > 0.0 && t.b < 1.0) || t.a != std::floor(t.a) || t.a < 1.0 || t.a > 1e6)
            return std::nullopt;
        auto table = binomial_table(static_cast<std::size_t>(t.a), t.b, max_k);
        return std::vector<double>(table.probs().begin(), table.probs().end());
    }

    std::optional<LatticeShift> lattice_shift() const override
    {
        double k = 0.0;
        bool any = false;
        std::vector<blocks::LogTerm> rest;
        for (const auto &t : terms_) {
            if (t.b == 1.0) {
                k += t.a;
                any = true;
            } else {
                rest.push_back(t);
            }
        }
        double rk = std::round(k);
        if (!any || rk < 0.0 || std::fabs(k - rk) > 1e-9)
            return std::nullopt;
        return LatticeShift{static_cast<std::size_t>(rk),
                            std::make_shared<LogSumImpl>(std::move(rest), linear_)};
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0 && linear_ != 0.0)
            return nullptr;
        // a log(1 + b s), s = alpha t / (1 + beta t)
        //   = a log(1 + (beta + b alpha) t) - a log(1 + beta t)
        std::vector<blocks::LogTerm> out;
        for (const auto &t : terms_) {
            out.push_back({t.a, beta + t.b * alpha});
            if (beta != 0.0)
                out.push_back({-t.a, beta});
        }
        return std::make_shared<LogSumImpl>(std::move(out), linear_ * alpha);
    }

    ImplPtr shifted(double theta) const override
    {
        std::vector<blocks::LogTerm> out;
        for (const auto &t : terms_) {
            double w = 1.0 + t.b * theta;
            if (!(w > 0.0))
                return nullptr;
            out.push_back({t.a, t.b / w});
        }
        return std::make_shared<LogSumImpl>(std::move(out), linear_);
    }

    ImplPtr affine(double scale, double linear) const override
    {
        std::vector<blocks::LogTerm> out;
        for (const auto &t : terms_)
            out.push_back({t.a * scale, t.b});
        return std::make_shared<LogSumImpl>(std::move(out), linear_ * scale + linear);
    }

private:
    std::vector<blocks::LogTerm> terms_;
    double linear_;
};

// ---------------------------------------------------------------------------

// A [(1 + B t)^alpha - 1]
class PowerImpl final : public FcgfImpl {
public:
    PowerImpl(double A, double B, double alpha) : A_(A), B_(B), alpha_(alpha) {}

    double eval(double t) const override
    {
        double w = 1.0 + B_ * t;
        if (is_nonneg_integer(alpha_))
            return A_ * (std::pow(w, alpha_) - 1.0);
        if (!(w > 0.0))
            return nan;
        return A_ * std::expm1(alpha_ * std::log1p(B_ * t));
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        PowerSeries out(order);
        out[0] = eval(t0);
        double w = 1.0 + B_ * t0;
        if (B_ == 0.0)
            return out;
        if (!(w > 0.0) && !is_nonneg_integer(alpha_))
            fail(ErrorKind::domain, "power: expansion point outside the analytic interval");
        if (w == 0.0) {
            // Integer alpha at the root: only the top coefficient survives.
            auto k = static_cast<std::size_t>(alpha_);
            if (k >= 1 && k <= order)
                out[k] = A_ * std::pow(B_, alpha_);
            return out;
        }
        std::vector<int> bs;
        std::vector<double> bl;
        log_binomials(alpha_, order, bs, bl);
        const double lw = std::log(std::fabs(w));
        const double lB = std::log(std::fabs(B_));
        const double lA = std::log(std::fabs(A_));
        for (std::size_t k = 1; k <= order; ++k) {
            if (bs[k] == 0)
                continue;
            int sign = bs[k] * (A_ < 0 ? -1 : 1);
            if (B_ < 0 && k % 2 == 1)
                sign = -sign;
            double ex = alpha_ - static_cast<double>(k);
            if (w < 0 && std::fmod(std::fabs(ex), 2.0) == 1.0)
                sign = -sign;
            out[k] = signed_exp(sign, lA + bl[k] + static_cast<double>(k) * lB + ex * lw);
        }
        return out;
    }

    Interval analytic() const override
    {
        if (is_nonneg_integer(alpha_) || B_ == 0.0)
            return {};
        if (B_ > 0)
            return {-1.0 / B_, infinity};
        return {-infinity, -1.0 / B_};
    }

    std::string describe() const override
    {
        return "power(" + num(A_) + "*((1+" + num(B_) + "t)^" + num(alpha_) + "-1))";
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0)
            return nullptr;
        return std::make_shared<PowerImpl>(A_, B_ * alpha, alpha_);
    }

    ImplPtr shifted(double theta) const override
    {
        double w = 1.0 + B_ * theta;
        if (!(w > 0.0))
            return nullptr;
        return std::make_shared<PowerImpl>(A_ * std::pow(w, alpha_), B_ / w, alpha_);
    }

    ImplPtr affine(double scale, double linear) const override
    {
        if (linear != 0.0)
            return nullptr;
        return std::make_shared<PowerImpl>(A_ * scale, B_, alpha_);
    }

private:
    double A_, B_, alpha_;
};

// ---------------------------------------------------------------------------

// A (e^{B t} - 1)
class ExpImpl final : public FcgfImpl {
public:
    ExpImpl(double A, double B) : A_(A), B_(B) {}

    double eval(double t) const override { return A_ * std::expm1(B_ * t); }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        PowerSeries out(order);
        out[0] = eval(t0);
        if (A_ == 0.0 || B_ == 0.0)
            return out;
        const double base = std::log(std::fabs(A_)) + B_ * t0;
        const double lB = std::log(std::fabs(B_));
        double lfact = 0.0;
        for (std::size_t k = 1; k <= order; ++k) {
            lfact += std::log(static_cast<double>(k));
            int sign = A_ < 0 ? -1 : 1;
            if (B_ < 0 && k % 2 == 1)
                sign = -sign;
            out[k] = signed_exp(sign, base + static_cast<double>(k) * lB - lfact);
        }
        return out;
    }

    Interval analytic() const override { return {}; }

    std::string describe() const override
    {
        return "exp(" + num(A_) + "*(e^(" + num(B_) + "t)-1))";
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0)
            return nullptr;
        return std::make_shared<ExpImpl>(A_, B_ * alpha);
    }

    ImplPtr shifted(double theta) const override
    {
        return std::make_shared<ExpImpl>(A_ * std::exp(B_ * theta), B_);
    }

    ImplPtr affine(double scale, double linear) const override
    {
        if (linear != 0.0)
            return nullptr;
        return std::make_shared<ExpImpl>(A_ * scale, B_);
    }

private:
    double A_, B_;
};

// ---------------------------------------------------------------------------

class PolynomialImpl final : public FcgfImpl {
public:
    explicit PolynomialImpl(std::vector<double> c) : c_(std::move(c))
    {
        if (c_.empty())
            c_.push_back(0.0);
        c_[0] = 0.0;
    }

    double eval(double t) const override
    {
        double s = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;)
            s = s * t + c_[k];
        return s;
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        PowerSeries out(order);
        out[0] = eval(t0);
        for (std::size_t k = 1; k <= order && k < c_.size(); ++k) {
            double s = 0.0;
            double binom = 1.0;
            double pw = 1.0;
            for (std::size_t j = k; j < c_.size(); ++j) {
                s += c_[j] * binom * pw;
                binom = binom * static_cast<double>(j + 1) / static_cast<double>(j + 1 - k);
                pw *= t0;
            }
            out[k] = s;
        }
        return out;
    }

    Interval analytic() const override { return {}; }

    std::string describe() const override
    {
        std::ostringstream os;
        os << "poly(";
        for (std::size_t k = 1; k < c_.size(); ++k)
            os << (k > 1 ? " + " : "") << num(c_[k]) << "t^" << k;
        os << ")";
        return os.str();
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0)
            return nullptr;
        auto c = c_;
        double a = 1.0;
        for (auto &x : c) {
            x *= a;
            a *= alpha;
        }
        return std::make_shared<PolynomialImpl>(std::move(c));
    }

    ImplPtr shifted(double theta) const override
    {
        auto series = taylor(theta, c_.size() - 1);
        auto c = series.data();
        c[0] = 0.0;
        return std::make_shared<PolynomialImpl>(std::move(c));
    }

    ImplPtr affine(double scale, double linear) const override
    {
        auto c = c_;
        for (auto &x : c)
            x *= scale;
        if (c.size() < 2)
            c.resize(2, 0.0);
        c[1] += linear;
        return std::make_shared<PolynomialImpl>(std::move(c));
    }

private:
    std::vector<double> c_;
};

// ---------------------------------------------------------------------------

// -b log(1 + s (-t)^alpha)
class LinnikImpl final : public FcgfImpl {
public:
    LinnikImpl(double b, double s, double alpha) : b_(b), s_(s), alpha_(alpha) {}

    double eval(double t) const override
    {
        if (t == 0.0)
            return 0.0;
        if (!(t < 0.0))
            return nan;
        return -b_ * std::log1p(s_ * std::pow(-t, alpha_));
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        if (!(t0 < 0.0))
            fail(ErrorKind::domain, "linnik: Taylor expansion needs t0 < 0");
        const double x0 = -t0;
        const double g0 = s_ * std::pow(x0, alpha_);
        std::vector<int> bs;
        std::vector<double> bl;
        log_binomials(alpha_, order, bs, bl);
        // 1 + g0 (1 - tau/x0)^alpha
        PowerSeries inner(order);
        inner[0] = 1.0 + g0;
        const double lg = std::log(g0);
        const double lx = std::log(x0);
        for (std::size_t k = 1; k <= order; ++k) {
            int sign = bs[k] * (k % 2 == 1 ? -1 : 1);
            inner[k] = signed_exp(sign, lg + bl[k] - static_cast<double>(k) * lx);
        }
        auto h = log_series(inner);
        for (auto &c : h.data())
            c *= -b_;
        h[0] = eval(t0);
        return h;
    }

    Interval analytic() const override { return {-infinity, 0.0}; }

    std::string describe() const override
    {
        return "linnik(b=" + num(b_) + ", scale=" + num(s_) + ", alpha=" + num(alpha_) + ")";
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0 || !(alpha > 0.0))
            return nullptr;
        return std::make_shared<LinnikImpl>(b_, s_ * std::pow(alpha, alpha_), alpha_);
    }

    ImplPtr affine(double scale, double linear) const override
    {
        if (linear != 0.0)
            return nullptr;
        return std::make_shared<LinnikImpl>(b_ * scale, s_, alpha_);
    }

private:
    double b_, s_, alpha_;
};

// ---------------------------------------------------------------------------

// Sum of l_x-weighted terms, l_x given in log space with sign, x = start...
// Terms must be unimodal in x; stops once past the peak and negligible.
template <class Term>
double signed_log_sum(std::size_t start, Term term, int &sign_out)
{
    std::vector<std::pair<int, double>> terms;
    double peak = -infinity;
    double prev = -infinity;
    for (std::size_t x = start; x < start + 20000000; ++x) {
        auto [s, l] = term(x);
        terms.emplace_back(s, l);
        peak = std::max(peak, l);
        if (l < prev && l < peak - 40.0)
            break;
        prev = l;
    }
    double acc = 0.0, comp = 0.0;
    for (auto [s, l] : terms) {
        double v = s * std::exp(l - peak);
        double t = acc + v;
        comp += std::fabs(acc) >= std::fabs(v) ? (acc - t) + v : (v - t) + acc;
        acc = t;
    }
    double total = acc + comp;
    sign_out = total > 0 ? 1 : (total < 0 ? -1 : 0);
    return std::log(std::fabs(total)) + peak;
}

class ComPoissonImpl final : public FcgfImpl {
public:
    // C(t) = log Z(lambda (1 + s t)) - log Z(lambda); s = 1 is the plain law,
    // other s arise from dilation and tilting.
    ComPoissonImpl(double lambda, double nu, double s = 1.0) : lambda_(lambda), nu_(nu), s_(s)
    {
        log_z_ = blocks::com_log_normalizer(lambda_, nu_);
        // Z stays positive a little below z = 0; find a safe margin.
        double zlo = 0.0;
        for (double z = -0.05; z >= -1.0; z -= 0.05) {
            int sign = 0;
            double lz = log_z_signed(z, sign);
            if (sign <= 0 || lz < std::log(0.2))
                break;
            zlo = z;
        }
        lo_ = (zlo / lambda_ - 1.0) / s_;
    }

    double eval(double t) const override
    {
        if (!analytic().contains(t))
            return nan;
        double z = lambda_ * (1.0 + s_ * t);
        if (z >= 0.0)
            return blocks::com_log_normalizer(z, nu_) - log_z_;
        int sign = 0;
        return log_z_signed(z, sign) - log_z_;
    }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        const double z0 = lambda_ * (1.0 + s_ * t0);
        int zsign = 0;
        const double lz0 = log_z_signed(z0, zsign);
        if (zsign <= 0)
            fail(ErrorKind::domain, "com-poisson: normalizer not positive at t0");
        // Coefficients of Z(z0 + lambda s tau) / Z(z0).
        PowerSeries g(order);
        g[0] = 1.0;
        const double ll = std::log(lambda_ * s_);
        for (std::size_t k = 1; k <= order; ++k) {
            int sign = 1;
            double lk;
            if (z0 == 0.0) {
                lk = -nu_ * std::lgamma(static_cast<double>(k) + 1.0);
            } else {
                const double lz = std::log(std::fabs(z0));
                const double lkf = std::lgamma(static_cast<double>(k) + 1.0);
                lk = signed_log_sum(k, [&](std::size_t x) {
                    double xd = static_cast<double>(x);
                    double l = std::lgamma(xd + 1.0) - lkf - std::lgamma(xd - k + 1.0) +
                               (xd - k) * lz - nu_ * std::lgamma(xd + 1.0);
                    int s = (z0 < 0 && (x - k) % 2 == 1) ? -1 : 1;
                    return std::pair<int, double>(s, l);
                }, sign);
            }
            g[k] = signed_exp(sign, lk + static_cast<double>(k) * ll - lz0);
        }
        auto h = log_series(g);
        h[0] = lz0 - log_z_;
        return h;
    }

    Interval analytic() const override { return {lo_, infinity}; }

    std::string describe() const override
    {
        std::string d = "com_poisson(lambda=" + num(lambda_) + ", nu=" + num(nu_);
        if (s_ != 1.0)
            d += ", dilation=" + num(s_);
        return d + ")";
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        if (beta != 0.0 || !(alpha > 0.0))
            return nullptr;
        return std::make_shared<ComPoissonImpl>(lambda_, nu_, s_ * alpha);
    }

    ImplPtr shifted(double theta) const override
    {
        const double w = 1.0 + s_ * theta;
        if (!(w > 0.0))
            return nullptr;
        return std::make_shared<ComPoissonImpl>(lambda_ * w, nu_, s_ / w);
    }

    // lambda^x / (x!)^nu / Z, binomially thinned when s < 1. For s > 1 the
    // thinning expansion alternates, so the generic series route is used.
    std::optional<std::vector<double>> pmf(std::size_t max_k) const override
    {
        if (s_ > 1.0)
            return std::nullopt;
        const double ll = std::log(lambda_);
        std::vector<double> base;
        double mass = 0.0;
        for (std::size_t x = 0;; ++x) {
            double xd = static_cast<double>(x);
            double p = std::exp(xd * ll - nu_ * std::lgamma(xd + 1.0) - log_z_);
            if (x <= max_k || s_ < 1.0)
                base.push_back(p);
            mass += p;
            bool past_mode = ll < nu_ * std::log(xd + 1.0);
            if (x >= max_k && (s_ == 1.0 || (past_mode && p < 1e-18 * mass)))
                break;
        }
        if (s_ == 1.0)
            return base;
        auto thinned = thin_pmf(PmfTable(base, 1.0), s_);
        std::vector<double> out(max_k + 1, 0.0);
        for (std::size_t k = 0; k <= max_k; ++k)
            out[k] = thinned[k];
        return out;
    }

private:
    double log_z_signed(double z, int &sign) const
    {
        if (z >= 0.0) {
            sign = 1;
            return blocks::com_log_normalizer(z, nu_);
        }
        const double lz = std::log(-z);
        return signed_log_sum(0, [&](std::size_t x) {
            double xd = static_cast<double>(x);
            return std::pair<int, double>(x % 2 == 1 ? -1 : 1, xd * lz - nu_ * std::lgamma(xd + 1.0));
        }, sign);
    }

    double lambda_, nu_, s_;
    double log_z_ = 0.0;
    double lo_ = -1.0;
};

// ---------------------------------------------------------------------------

class SumImpl final : public FcgfImpl {
public:
    SumImpl(ImplPtr f, ImplPtr g) : f_(std::move(f)), g_(std::move(g)) {}

    double eval(double t) const override { return f_->eval(t) + g_->eval(t); }

    PowerSeries taylor(double t0, std::size_t order) const override
    {
        auto a = f_->taylor(t0, order);
        auto b = g_->taylor(t0, order);
        for (std::size_t k = 0; k <= order; ++k)
            a[k] += b[k];
        return a;
    }

    Interval analytic() const override { return f_->analytic().intersect(g_->analytic()); }

    std::string describe() const override
    {
        return "sum(" + f_->describe() + ", " + g_->describe() + ")";
    }

    ImplPtr mobius(double alpha, double beta) const override
    {
        return std::make_shared<SumImpl>(detail::make_mobius(f_, alpha, beta),
                                         detail::make_mobius(g_, alpha, beta));
    }

    ImplPtr shifted(double theta) const override
    {
        return std::make_shared<SumImpl>(detail::make_shift(f_, theta),
                                         detail::make_shift(g_, theta));
    }

    ImplPtr affine(double scale, double linear) const override
    {
        return std::make_shared<SumImpl>(detail::make_affine(f_, scale, linear),
                                         detail::make_affine(g_, scale, 0.0));
    }

private:
    ImplPtr f_, g_;
};

void require_finite(std::initializer_list<double> xs, const char *what)
{
    for (double x : xs)
        if (!std::isfinite(x))
            fail(ErrorKind::parameter, std::string(what) + ": non-finite parameter");
}

} // namespace

namespace blocks {

AnalyticFcgf log_sum(std::vector<LogTerm> terms, double linear, FcgfFlags flags)
{
    for (const auto &t : terms)
        require_finite({t.a, t.b}, "log_sum");
    require_finite({linear}, "log_sum");
    return AnalyticFcgf(std::make_shared<LogSumImpl>(std::move(terms), linear), flags);
}

AnalyticFcgf linear(double mu, FcgfFlags flags)
{
    return log_sum({}, mu, flags);
}

AnalyticFcgf power(double A, double B, double alpha, FcgfFlags flags)
{
    require_finite({A, B, alpha}, "power");
    return AnalyticFcgf(std::make_shared<PowerImpl>(A, B, alpha), flags);
}

AnalyticFcgf exponential(double A, double B, FcgfFlags flags)
{
    require_finite({A, B}, "exponential");
    return AnalyticFcgf(std::make_shared<ExpImpl>(A, B), flags);
}

AnalyticFcgf polynomial(std::vector<double> coeffs, FcgfFlags flags)
{
    if (!coeffs.empty() && coeffs[0] != 0.0)
        fail(ErrorKind::parameter, "polynomial FCGF must vanish at 0");
    return AnalyticFcgf(std::make_shared<PolynomialImpl>(std::move(coeffs)), flags);
}

AnalyticFcgf linnik(double b, double scale, double alpha, FcgfFlags flags)
{
    if (!(b > 0.0) || !(scale > 0.0) || !(alpha > 0.0 && alpha <= 1.0))
        fail(ErrorKind::parameter, "linnik: need b > 0, scale > 0, 0 < alpha <= 1");
    return AnalyticFcgf(std::make_shared<LinnikImpl>(b, scale, alpha), flags);
}

AnalyticFcgf com_poisson(double lambda, double nu, FcgfFlags flags)
{
    if (!(lambda > 0.0) || !(nu > 0.0) || !std::isfinite(lambda) || !std::isfinite(nu))
        fail(ErrorKind::parameter, "com_poisson: need lambda > 0, nu > 0");
    return AnalyticFcgf(std::make_shared<ComPoissonImpl>(lambda, nu), flags);
}

AnalyticFcgf sum(const AnalyticFcgf &f, const AnalyticFcgf &g, FcgfFlags flags)
{
    return AnalyticFcgf(std::make_shared<SumImpl>(f.impl(), g.impl()), flags);
}

double com_log_normalizer(double z, double nu)
{
    if (z == 0.0)
        return 0.0;
    if (z < 0.0)
        fail(ErrorKind::domain, "com_log_normalizer: z must be non-negative");
    // Stop once terms fall below 1e-15 of the partial sum past the mode.
    const double lz = std::log(z);
    double acc = 0.0;  // sum of exp(l - peak)
    double peak = 0.0; // l_0 = 0
    double prev = 0.0;
    acc = 1.0;
    for (std::size_t x = 1; x < 50000000; ++x) {
        double xd = static_cast<double>(x);
        double l = xd * lz - nu * std::lgamma(xd + 1.0);
        if (l > peak) {
            acc = acc * std::exp(peak - l) + 1.0;
            peak = l;
        } else {
            acc += std::exp(l - peak);
        }
        if (l < prev && std::exp(l - peak) < 1e-15 * acc)
            break;
        prev = l;
    }
    return peak + std::log(acc);
}

} // namespace blocks

} // namespace fdm
