#include "fdm/series.hpp"

#include <algorithm>
#include <charconv>
#include <cfloat>
#include <cmath>
#include <ostream>

#include "fdm/error.hpp"
#include "fdm/fcgf.hpp"
#include "fdm/fcgf_impl.hpp"
#include "json.hpp"

namespace fdm {

namespace {

// Neumaier compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x)
    {
        double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

constexpr double negative_tolerance = 1e-10;
constexpr double rescale_threshold = 1e200;

std::vector<double> log_factorials(std::size_t n)
{
    std::vector<double> lf(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i)
        lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
    return lf;
}

PmfTable finish_table(std::vector<double> probs, double tail_from_input, double tail_tol)
{
    Accumulator acc;
    for (double p : probs)
        acc.add(p);
    double tail = std::max(tail_from_input, 1.0 - acc.value());
    return PmfTable(std::move(probs), std::max(0.0, tail), tail_tol);
}

} // namespace

PowerSeries::PowerSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs))
{
    if (coeffs_.empty())
        coeffs_.push_back(0.0);
}

bool PowerSeries::finite() const noexcept
{
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); });
}

PowerSeries exp_series(const PowerSeries &h)
{
    if (!h.finite())
        fail(ErrorKind::domain, "exp_series: non-finite coefficient");
    if (h[0] > std::log(DBL_MAX))
        fail(ErrorKind::overflow, "exp_series: constant term exceeds log(DBL_MAX)");

    const std::size_t n = h.order();
    // Run the recursion on exp(h - h_0), then rescale. The recursion is linear
    // in g, so blocks that grow too large are scaled down wholesale and the
    // factor is carried in log_scale.
    std::vector<double> g(n + 1, 0.0);
    g[0] = 1.0;
    double log_scale = 0.0;
    for (std::size_t m = 1; m <= n; ++m) {
        Accumulator acc;
        for (std::size_t k = 1; k <= m; ++k)
            acc.add(static_cast<double>(k) * h[k] * g[m - k]);
        g[m] = acc.value() / static_cast<double>(m);
        if (std::fabs(g[m]) > rescale_threshold) {
            for (std::size_t j = 0; j <= m; ++j)
                g[j] /= rescale_threshold;
            log_scale += std::log(rescale_threshold);
        }
    }

    PowerSeries out(n);
    const double shift = h[0] + log_scale;
    for (std::size_t m = 0; m <= n; ++m) {
        if (g[m] == 0.0)
            continue;
        double mag = std::log(std::fabs(g[m])) + shift;
        if (mag > std::log(DBL_MAX))
            fail(ErrorKind::overflow, "exp_series: coefficient overflow");
        out[m] = std::copysign(std::exp(mag), g[m]);
    }
    return out;
}

PowerSeries log_series(const PowerSeries &g)
{
    if (!(g[0] > 0.0))
        fail(ErrorKind::domain, "log_series: constant term must be positive");
    const std::size_t n = g.order();
    PowerSeries h(n);
    h[0] = std::log(g[0]);
    for (std::size_t m = 1; m <= n; ++m) {
        Accumulator acc;
        acc.add(static_cast<double>(m) * g[m]);
        for (std::size_t k = 1; k < m; ++k)
            acc.add(-static_cast<double>(k) * h[k] * g[m - k]);
        h[m] = acc.value() / (static_cast<double>(m) * g[0]);
    }
    return h;
}

PowerSeries multiply(const PowerSeries &a, const PowerSeries &b, std::size_t order)
{
    PowerSeries out(order);
    for (std::size_t m = 0; m <= order; ++m) {
        Accumulator acc;
        for (std::size_t i = 0; i <= m && i <= a.order(); ++i) {
            if (m - i <= b.order())
                acc.add(a[i] * b[m - i]);
        }
        out[m] = acc.value();
    }
    return out;
}

PowerSeries compose(const PowerSeries &outer, const PowerSeries &inner)
{
    const std::size_t n = inner.order();
    PowerSeries x = inner;
    x[0] = 0.0;
    PowerSeries acc(n);
    for (std::size_t k = outer.order() + 1; k-- > 0;) {
        acc = multiply(acc, x, n);
        acc[0] += outer[k];
    }
    return acc;
}

PmfTable::PmfTable(std::vector<double> probs, double tail_tol)
    : probs_(std::move(probs)), tail_tol_(tail_tol)
{
    if (probs_.empty())
        probs_.push_back(0.0);
    tail_bound_ = std::max(0.0, 1.0 - total());
}

PmfTable::PmfTable(std::vector<double> probs, double tail_bound, double tail_tol)
    : probs_(std::move(probs)), tail_bound_(tail_bound), tail_tol_(tail_tol)
{
    if (probs_.empty())
        probs_.push_back(0.0);
    if (!(tail_bound_ >= 0.0))
        fail(ErrorKind::parameter, "PmfTable: tail bound must be non-negative");
}

double PmfTable::total() const
{
    Accumulator acc;
    for (double p : probs_)
        acc.add(p);
    return acc.value();
}

double PmfTable::mean() const
{
    Accumulator acc;
    for (std::size_t k = 0; k < probs_.size(); ++k)
        acc.add(static_cast<double>(k) * probs_[k]);
    return acc.value();
}

double PmfTable::variance() const
{
    const double m = mean();
    Accumulator acc;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        double d = static_cast<double>(k) - m;
        acc.add(d * d * probs_[k]);
    }
    return acc.value();
}

PmfTable PmfTable::degenerate(std::size_t at, std::size_t max_k)
{
    std::vector<double> probs(max_k + 1, 0.0);
    if (at > max_k)
        return PmfTable(std::move(probs), 1.0, default_tail_tol);
    probs[at] = 1.0;
    return PmfTable(std::move(probs), 0.0, default_tail_tol);
}

std::vector<double> raw_pmf_coefficients(const AnalyticFcgf &f, std::size_t max_k)
{
    if (auto direct = f.impl()->pmf(max_k)) {
        direct->resize(max_k + 1, 0.0);
        return *direct;
    }
    if (f.analytic_interval().contains(-1.0))
        return exp_series(f.taylor_at(-1.0, max_k)).data();

    auto lattice = f.lattice_shift();
    if (!lattice)
        fail(ErrorKind::domain, "pmf: -1 is outside the analytic domain of " + f.describe());

    std::vector<double> out(max_k + 1, 0.0);
    if (lattice->shift > max_k)
        return out;
    const auto &reg = *lattice->regular;
    if (!reg.analytic().contains(-1.0))
        fail(ErrorKind::domain, "pmf: regular part is not analytic at -1");
    auto body = exp_series(reg.taylor(-1.0, max_k - lattice->shift));
    for (std::size_t k = 0; k + lattice->shift <= max_k; ++k)
        out[k + lattice->shift] = body[k];
    return out;
}

PmfTable pmf_from_fcgf(const AnalyticFcgf &f, std::size_t max_k, double tail_tol)
{
    auto probs = raw_pmf_coefficients(f, max_k);
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (!std::isfinite(probs[k]))
            fail(ErrorKind::overflow, "pmf: non-finite coefficient at k=" + std::to_string(k));
        if (probs[k] < -negative_tolerance)
            fail(ErrorKind::negative_probability,
                 "pmf: p_" + std::to_string(k) + " = " + format_double(probs[k]) + " for " +
                     f.describe());
        if (probs[k] < 0.0)
            probs[k] = 0.0;
    }
    return finish_table(std::move(probs), 0.0, tail_tol);
}

PmfTable thin_pmf(const PmfTable &f, double c, double tail_tol)
{
    if (!(c > 0.0) || c > 1.0)
        fail(ErrorKind::parameter, "thin: c must lie in (0, 1]");
    if (c == 1.0)
        return PmfTable(std::vector<double>(f.probs().begin(), f.probs().end()), f.tail_bound(),
                        tail_tol);

    const std::size_t n = f.max_k();
    const auto lf = log_factorials(n);
    const double lc = std::log(c);
    const double l1c = std::log1p(-c);
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t x = 0; x <= n; ++x) {
        Accumulator acc;
        for (std::size_t i = x; i <= n; ++i) {
            double p = f[i];
            if (p <= 0.0)
                continue;
            double lt = std::log(p) + lf[i] - lf[x] - lf[i - x] + static_cast<double>(x) * lc +
                        static_cast<double>(i - x) * l1c;
            acc.add(std::exp(lt));
        }
        out[x] = acc.value();
    }
    // Mass beyond N can land anywhere, so the input bound carries over unchanged.
    return finish_table(std::move(out), f.tail_bound(), tail_tol);
}

PmfTable convolve_pmf(const PmfTable &f, const PmfTable &g, std::size_t max_k, double tail_tol)
{
    if (max_k == 0)
        max_k = std::max(f.max_k(), g.max_k());
    std::vector<double> out(max_k + 1, 0.0);
    for (std::size_t m = 0; m <= max_k; ++m) {
        Accumulator acc;
        const std::size_t lo = m > g.max_k() ? m - g.max_k() : 0;
        for (std::size_t i = lo; i <= m && i <= f.max_k(); ++i)
            acc.add(f[i] * g[m - i]);
        out[m] = acc.value();
    }
    double kept = 0.0;
    for (double p : out)
        kept += p;
    double dropped = std::max(0.0, f.total() * g.total() - kept);
    return finish_table(std::move(out), f.tail_bound() + g.tail_bound() + dropped, tail_tol);
}

PmfTable convolve_power(const PmfTable &f, std::size_t n, std::size_t max_k, double tail_tol)
{
    if (max_k == 0)
        max_k = f.max_k();
    PmfTable result = PmfTable::degenerate(0, max_k);
    if (n == 0)
        return result;
    PmfTable base = f;
    bool first = true;
    while (n > 0) {
        if (n & 1u) {
            result = first ? convolve_pmf(base, PmfTable::degenerate(0, 0), max_k, tail_tol)
                           : convolve_pmf(result, base, max_k, tail_tol);
            first = false;
        }
        n >>= 1u;
        if (n > 0)
            base = convolve_pmf(base, base, max_k, tail_tol);
    }
    return result;
}

double tv_distance(const PmfTable &a, const PmfTable &b)
{
    const std::size_t n = std::max(a.max_k(), b.max_k());
    Accumulator acc;
    for (std::size_t k = 0; k <= n; ++k)
        acc.add(std::fabs(a[k] - b[k]));
    double tv = 0.5 * acc.value() + 0.5 * (a.tail_bound() + b.tail_bound());
    return std::clamp(tv, 0.0, 1.0);
}

PmfTable poisson_table(double mean, std::size_t max_k)
{
    if (!(mean >= 0.0))
        fail(ErrorKind::parameter, "poisson: mean must be non-negative");
    if (mean == 0.0)
        return PmfTable::degenerate(0, max_k);
    std::vector<double> probs(max_k + 1);
    const double lm = std::log(mean);
    for (std::size_t k = 0; k <= max_k; ++k)
        probs[k] = std::exp(static_cast<double>(k) * lm - mean - std::lgamma(static_cast<double>(k) + 1.0));
    return finish_table(std::move(probs), 0.0, default_tail_tol);
}

PmfTable binomial_table(std::size_t n, double q, std::size_t max_k)
{
    if (!(q >= 0.0 && q <= 1.0))
        fail(ErrorKind::parameter, "binomial: q must lie in [0, 1]");
    if (q == 0.0)
        return PmfTable::degenerate(0, max_k);
    if (q == 1.0)
        return PmfTable::degenerate(n, max_k);
    std::vector<double> probs(max_k + 1, 0.0);
    const auto lf = log_factorials(n);
    for (std::size_t k = 0; k <= std::min(n, max_k); ++k)
        probs[k] = std::exp(lf[n] - lf[k] - lf[n - k] + static_cast<double>(k) * std::log(q) +
                            static_cast<double>(n - k) * std::log1p(-q));
    return finish_table(std::move(probs), 0.0, default_tail_tol);
}

std::string format_double(double x, int significant_digits)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, significant_digits);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream &os, const PmfTable &table)
{
    os << "k,p_k\n";
    for (std::size_t k = 0; k < table.size(); ++k)
        os << k << ',' << format_double(table[k]) << '\n';
}

std::string to_json(const PmfTable &table)
{
    nlohmann::json j;
    j["probs"] = std::vector<double>(table.probs().begin(), table.probs().end());
    j["tail_bound"] = table.tail_bound();
    return j.dump();
}

PmfTable pmf_from_json(const std::string &text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        fail(ErrorKind::schema, std::string("pmf json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("probs") || !j["probs"].is_array())
        fail(ErrorKind::schema, "pmf json: expected an object with a \"probs\" array");
    auto probs = j["probs"].get<std::vector<double>>();
    double tail = j.value("tail_bound", 0.0);
    return PmfTable(std::move(probs), tail, default_tail_tol);
}

} // namespace fdm
