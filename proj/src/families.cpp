#include "fdm/families.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fdm/error.hpp"
#include "fdm/poisson_tweedie.hpp"
#include "json.hpp"

namespace fdm {

namespace {

struct ParamInfo {
    const char *name;
    const char *constraint;
    bool optional = false;
};

struct FamilyInfo {
    const char *name;
    std::vector<ParamInfo> params;
};

const std::vector<FamilyInfo> &registry()
{
    static const std::vector<FamilyInfo> r = {
        {"poisson", {{"mu", "> 0"}}},
        {"bernoulli", {{"q", "0 < q < 1"}}},
        {"binomial", {{"n", "integer >= 1"}, {"mu", "0 < mu <= 1"}}},
        {"geometric", {{"mu", "> 0"}}},
        {"nb", {{"lambda", "> 0"}, {"mu", "> 0"}}},
        {"hermite", {{"mu", "> 0"}, {"gamma", "0 < gamma <= mu"}}},
        {"short", {{"mu1", "> 0"}, {"mu2", "> 0"}, {"phi", "> 0"}}},
        {"neyman_a", {{"mu", "> 0"}, {"gamma", "> 0"}}},
        {"neyman_a_additive", {{"mu", "> 0"}, {"lambda", "> 0", true}}},
        {"poisson_nb", {{"lambda", "> 0"}, {"mu", "> 0"}, {"k", "> 0"}}},
        {"poisson_binomial", {{"lambda", "> 0"}, {"mu", "0 < mu <= 1"}, {"n", "integer >= 1"}}},
        {"discrete_stable",
         {{"lambda", "> 0"}, {"alpha", "0 < alpha < 1"}, {"theta", "< 0", true}, {"mu", "> 0", true}}},
        {"linnik", {{"b", "> 0"}, {"scale", "> 0"}, {"alpha", "0 < alpha < 1"}, {"theta", "< 0"}}},
        {"com_poisson", {{"lambda", "> 0"}, {"nu", "> 0"}}},
        {"pt", {{"p", "p = 0 or p >= 1"}, {"mu", "> 0"}, {"gamma", "> 0 (<= mu when p = 0)"}}},
        {"degenerate", {{"k", "integer >= 0"}}},
    };
    return r;
}

const FamilyInfo &info(const std::string &name)
{
    for (const auto &f : registry())
        if (name == f.name)
            return f;
    fail(ErrorKind::parameter, "unknown family '" + name + "'");
}

void check_params(const FamilyInfo &fi, const ParamMap &params)
{
    std::set<std::string> known;
    for (const auto &p : fi.params) {
        known.insert(p.name);
        if (!p.optional && !params.count(p.name))
            fail(ErrorKind::parameter, std::string(fi.name) + ": missing parameter '" + p.name + "'");
    }
    for (const auto &[k, v] : params) {
        if (!known.count(k))
            fail(ErrorKind::parameter, std::string(fi.name) + ": unknown parameter '" + k + "'");
        if (!std::isfinite(v))
            fail(ErrorKind::parameter, std::string(fi.name) + ": parameter '" + k + "' is not finite");
    }
}

void require(bool ok, const std::string &family, const std::string &what)
{
    if (!ok)
        fail(ErrorKind::parameter, family + ": " + what);
}

bool is_integer(double x)
{
    return x == std::floor(x) && std::fabs(x) < 1e9;
}

constexpr FcgfFlags mixture{true, true};

FamilySpec spec(const std::string &name, const ParamMap &params, AnalyticFcgf f, Interval mean_domain,
                std::function<double(double)> v)
{
    Interval theta = f.analytic_interval();
    return FamilySpec{name, params, std::move(f), theta, mean_domain, std::move(v)};
}

FamilySpec binomial_like(const std::string &name, const ParamMap &params, double n, double mu)
{
    // n log(1 + mu t)
    auto f = blocks::log_sum({{n, mu}}, 0.0, {});
    return spec(name, params, f, {0.0, n}, [n](double m) { return -m * m / n; });
}

} // namespace

double FamilySpec::param(const std::string &key) const
{
    auto it = params.find(key);
    if (it == params.end())
        fail(ErrorKind::parameter, name + ": no parameter '" + key + "'");
    return it->second;
}

std::vector<std::string> family_names()
{
    std::vector<std::string> out;
    for (const auto &f : registry())
        out.emplace_back(f.name);
    return out;
}

std::string param_schema_json(const std::string &name)
{
    const auto &fi = info(name);
    nlohmann::ordered_json j;
    j["family"] = fi.name;
    j["params"] = nlohmann::ordered_json::array();
    for (const auto &p : fi.params)
        j["params"].push_back({{"name", p.name}, {"constraint", p.constraint}, {"required", !p.optional}});
    return j.dump();
}

double alpha_from_p(double p)
{
    if (p == 1.0)
        return -infinity;
    if (p == 2.0)
        return 0.0; // not -0
    return (2.0 - p) / (1.0 - p);
}

double p_from_alpha(double alpha)
{
    if (std::isinf(alpha) && alpha < 0)
        return 1.0;
    return (alpha - 2.0) / (alpha - 1.0);
}

double discrete_stable_mu(double theta, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(ErrorKind::domain, "discrete stable: alpha must lie in (0, 1)");
    if (!(theta / (alpha - 1.0) > 0.0))
        fail(ErrorKind::domain, "discrete stable: theta / (alpha - 1) must be positive");
    return std::pow(theta / (alpha - 1.0), alpha - 1.0);
}

double discrete_stable_theta(double mu, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        fail(ErrorKind::domain, "discrete stable: alpha must lie in (0, 1)");
    if (!(mu > 0.0))
        fail(ErrorKind::domain, "discrete stable: mu must be positive");
    return (alpha - 1.0) * std::pow(mu, 1.0 / (alpha - 1.0));
}

FamilySpec make_family(const std::string &name, const ParamMap &params)
{
    const auto &fi = info(name);
    check_params(fi, params);
    auto get = [&](const char *k) { return params.at(k); };

    if (name == "poisson") {
        double mu = get("mu");
        require(mu > 0, name, "mu must be positive");
        return spec(name, params, blocks::linear(mu, mixture), {mu, mu}, [mu](double m) {
            if (m != mu)
                fail(ErrorKind::root_not_bracketed, "poisson: the tilting family is the single mean " +
                                                        format_double(mu));
            return 0.0;
        });
    }
    if (name == "bernoulli") {
        double q = get("q");
        require(q > 0 && q < 1, name, "q must lie in (0, 1)");
        return binomial_like(name, params, 1.0, q);
    }
    if (name == "binomial") {
        double n = get("n"), mu = get("mu");
        require(is_integer(n) && n >= 1, name, "n must be an integer >= 1");
        require(mu > 0 && mu <= 1, name, "mu must lie in (0, 1]");
        return binomial_like(name, params, n, mu);
    }
    if (name == "degenerate") {
        double k = get("k");
        require(is_integer(k) && k >= 0, name, "k must be a non-negative integer");
        auto f = blocks::log_sum({{k, 1.0}}, 0.0, {});
        return spec(name, params, f, {k, k}, [k](double m) { return k > 0 ? -m * m / k : 0.0; });
    }
    if (name == "geometric" || name == "nb") {
        double lambda = name == "nb" ? get("lambda") : 1.0;
        double mu = get("mu");
        require(lambda > 0 && mu > 0, name, "lambda and mu must be positive");
        auto f = blocks::log_sum({{-lambda, -mu}}, 0.0, mixture);
        return spec(name, params, f, {0.0, infinity}, [lambda](double m) { return m * m / lambda; });
    }
    if (name == "hermite") {
        double mu = get("mu"), g = get("gamma");
        require(mu > 0 && g > 0 && g <= mu, name, "need 0 < gamma <= mu");
        return spec(name, params, pt_fcgf({0.0, mu, g}), {g, infinity}, [g](double) { return g; });
    }
    if (name == "short") {
        double m1 = get("mu1"), m2 = get("mu2"), phi = get("phi");
        require(m1 > 0 && m2 > 0 && phi > 0, name, "mu1, mu2, phi must be positive");
        auto f = blocks::sum(blocks::exponential(m1, phi), blocks::linear(m2), mixture);
        return spec(name, params, f, {m2, infinity}, [m2, phi](double m) { return phi * (m - m2); });
    }
    if (name == "neyman_a") {
        double mu = get("mu"), g = get("gamma");
        require(mu > 0 && g > 0, name, "mu and gamma must be positive");
        return spec(name, params, pt_fcgf({1.0, mu, g}), {0.0, infinity}, [g](double m) { return g * m; });
    }
    if (name == "neyman_a_additive") {
        // Only lambda * mu is identifiable; store the canonical (mean, gamma = 1).
        double mean = get("mu") * (params.count("lambda") ? get("lambda") : 1.0);
        require(mean > 0, name, "mu and lambda must be positive");
        ParamMap canon{{"mu", mean}};
        return spec(name, canon, pt_fcgf({1.0, mean, 1.0}), {0.0, infinity}, [](double m) { return m; });
    }
    if (name == "poisson_nb") {
        double lambda = get("lambda"), mu = get("mu"), k = get("k");
        require(lambda > 0 && mu > 0 && k > 0, name, "lambda, mu, k must be positive");
        auto f = blocks::power(lambda, -mu, -k, mixture);
        return spec(name, params, f, {0.0, infinity}, [=](double m) {
            return (k + 1.0) * mu * m * std::pow(m / (lambda * k * mu), 1.0 / (k + 1.0));
        });
    }
    if (name == "poisson_binomial") {
        double lambda = get("lambda"), mu = get("mu"), n = get("n");
        require(lambda > 0 && mu > 0 && mu <= 1, name, "need lambda > 0 and 0 < mu <= 1");
        require(is_integer(n) && n >= 1, name, "n must be an integer >= 1");
        auto f = blocks::power(lambda, mu, n, {true, false});
        double lo = lambda * n * std::pow(mu, n);
        return spec(name, params, f, {n == 1 ? lambda * mu : lo, n == 1 ? lambda * mu : infinity},
                    [=](double m) {
                        if (n == 1)
                            return 0.0;
                        return (n - 1.0) * mu * m * std::pow(m / (lambda * n * mu), -1.0 / (n - 1.0));
                    });
    }
    if (name == "discrete_stable") {
        double lambda = get("lambda"), alpha = get("alpha");
        require(lambda > 0 && alpha > 0 && alpha < 1, name, "need lambda > 0 and 0 < alpha < 1");
        require(params.count("theta") + params.count("mu") == 1, name, "give exactly one of theta, mu");
        double theta = params.count("theta") ? get("theta") : discrete_stable_theta(get("mu"), alpha);
        require(theta < 0, name, "theta must be negative");
        double c_alpha = (alpha - 1.0) / alpha * std::pow(theta / (alpha - 1.0), alpha);
        auto f = blocks::power(lambda * c_alpha, 1.0 / theta, alpha, mixture);
        double p = p_from_alpha(alpha);
        ParamMap canon{{"lambda", lambda}, {"alpha", alpha}, {"theta", theta}};
        return spec(name, canon, f, {0.0, infinity},
                    [=](double m) { return std::pow(lambda, 1.0 - p) * std::pow(m, p); });
    }
    if (name == "linnik") {
        double b = get("b"), s = get("scale"), alpha = get("alpha"), theta = get("theta");
        require(b > 0 && s > 0 && alpha > 0 && alpha < 1, name, "need b, scale > 0 and 0 < alpha < 1");
        require(theta < 0, name, "theta must be negative (the untilted law has infinite mean)");
        auto base = blocks::linnik(b, s, alpha, mixture);
        auto f = raw::shift(base, theta, mixture);
        return spec(name, params, f, {0.0, infinity}, nullptr);
    }
    if (name == "com_poisson") {
        double lambda = get("lambda"), nu = get("nu");
        require(lambda > 0 && nu > 0, name, "lambda and nu must be positive");
        FcgfFlags flags{nu <= 1.0, nu == 1.0};
        auto f = blocks::com_poisson(lambda, nu, flags);
        Interval mean = nu > 1 ? Interval{0.0, lambda} : nu < 1 ? Interval{lambda, infinity}
                                                                 : Interval{lambda, lambda};
        FamilySpec out{name, params, f, {-1.0, infinity}, mean, nullptr};
        if (nu == 1.0)
            out.unit_dispersion = [](double) { return 0.0; };
        return out;
    }
    if (name == "pt") {
        PtParams pt{get("p"), get("mu"), get("gamma")};
        auto f = pt_fcgf(pt);
        double p = pt.p, g = pt.gamma;
        Interval mean = p == 0.0 ? Interval{g, infinity} : Interval{0.0, infinity};
        return spec(name, params, f, mean, [p, g](double m) { return g * std::pow(m, p); });
    }
    fail(ErrorKind::parameter, "unknown family '" + name + "'");
}

FamilySpec tilt_family(const FamilySpec &f, double theta)
{
    if (!f.theta_domain.contains(theta) && theta != 0.0)
        fail(ErrorKind::domain, f.name + ": tilt outside the family's parameter domain");
    FamilySpec out = f;
    out.fcgf = raw::shift(f.fcgf, theta, f.fcgf.flags());
    out.theta_domain = f.theta_domain.shifted(-theta);
    return out;
}

double solve_mean(const FamilySpec &f, double mu)
{
    const Interval dom = f.theta_domain;
    auto eval = [&](double th, double &slope) {
        auto c = f.fcgf.taylor_at(th, 2);
        slope = 2.0 * c[2];
        return c[1] - mu;
    };
    double s0;
    double g0 = eval(0.0, s0);
    if (g0 == 0.0)
        return 0.0;
    if (s0 == 0.0 || !std::isfinite(g0))
        fail(ErrorKind::root_not_bracketed, f.name + ": mean " + format_double(mu) + " not attainable");

    // Move toward the root, doubling the step; finite endpoints are approached
    // by halving the remaining distance.
    const int dir = ((g0 < 0) == (s0 > 0)) ? 1 : -1;
    const double edge = dir > 0 ? dom.hi : dom.lo;
    double a = 0.0, ga = g0, step = 1.0;
    double b = 0.0, gb = g0;
    bool bracketed = false;
    for (int it = 0; it < 400; ++it) {
        double cand = a + dir * step;
        if (std::isfinite(edge) && (dir > 0 ? cand >= edge : cand <= edge))
            cand = a + 0.5 * (edge - a);
        if (cand == a)
            break;
        double unused;
        double gc = std::isfinite(edge) && cand == edge ? NAN : eval(cand, unused);
        if (!std::isfinite(gc)) {
            step *= 0.5;
            continue;
        }
        if ((gc > 0) != (ga > 0) || gc == 0.0) {
            b = cand;
            gb = gc;
            bracketed = true;
            break;
        }
        a = cand;
        ga = gc;
        step *= 2.0;
    }
    if (!bracketed)
        fail(ErrorKind::root_not_bracketed,
             f.name + ": mean " + format_double(mu) + " outside the attainable range");
    if (gb == 0.0)
        return b;

    // Safeguarded Newton inside [lo, hi].
    double lo = std::min(a, b), hi = std::max(a, b);
    double glo = lo == a ? ga : gb;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
        double slope;
        double gx = eval(x, slope);
        if (gx == 0.0)
            return x;
        if ((gx > 0) == (glo > 0)) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
        double next = x - gx / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = 0.5 * (lo + hi);
        const double eps = 4.0 * std::numeric_limits<double>::epsilon();
        if (std::fabs(next - x) <= eps * std::fabs(x) ||
            hi - lo <= eps * std::max(std::fabs(lo), std::fabs(hi)))
            return next;
        x = next;
    }
    return x;
}

double numeric_dispersion_function(const FamilySpec &f, double mu)
{
    double th = solve_mean(f, mu);
    return f.fcgf.derivative(th, 2);
}

double dispersion_function(const FamilySpec &f, double mu)
{
    if (f.unit_dispersion) {
        const Interval &m = f.mean_domain;
        bool inside = (mu > m.lo && mu < m.hi) || mu == m.lo || mu == m.hi;
        if (!inside)
            fail(ErrorKind::root_not_bracketed, f.name + ": mean " + format_double(mu) +
                                                    " outside the mean domain");
        return f.unit_dispersion(mu);
    }
    return numeric_dispersion_function(f, mu);
}

} // namespace fdm
