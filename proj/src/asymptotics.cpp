#include "fdm/asymptotics.hpp"

#include <cmath>
#include <random>

#include "fdm/error.hpp"
#include "fdm/poisson_tweedie.hpp"
#include "json.hpp"

namespace fdm {

namespace {

bool is_integer(double x)
{
    return x == std::floor(x) && x >= 1.0;
}

// t -> scale * C_theta(dil * t) with C'_theta(0) = m.
AnalyticFcgf scaled_member(const FamilySpec &family, double m, double dil, double scale)
{
    const double theta = solve_mean(family, m);
    AnalyticFcgf f = theta == 0.0 ? family.fcgf : tilt_family(family, theta).fcgf;
    f = dilate(f, dil);
    if (scale == 1.0)
        return f;
    if (!f.infinitely_divisible() && !is_integer(scale))
        fail(ErrorKind::not_an_fcgf, family.name + ": scaling by " + format_double(scale) +
                                         " needs an infinitely divisible family");
    return raw::affine(f, scale, 0.0, f.flags());
}

double fit_slope(const std::vector<double> &x, const std::vector<double> &y, double *intercept = nullptr)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0 && y[i] != 0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(std::fabs(y[i])));
        }
    }
    if (lx.size() < 2)
        return std::nan("");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    double b = sxy / sxx;
    if (intercept)
        *intercept = my - b * mx;
    return b;
}

void record(ConvergenceRun &run, double control, const PmfTable &a, const PmfTable &b)
{
    run.control.push_back(control);
    run.tv.push_back(tv_distance(a, b));
    run.bound.push_back(std::min(1.0, 0.5 * (a.tail_bound() + b.tail_bound())));
}

void check_grid(const std::vector<double> &grid)
{
    if (grid.empty())
        fail(ErrorKind::parameter, "convergence: empty grid");
    bool up = true, down = true;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        up = up && grid[i] > grid[i - 1];
        down = down && grid[i] < grid[i - 1];
    }
    if (grid.size() > 1 && !up && !down)
        fail(ErrorKind::parameter, "convergence: grid must be strictly monotone");
}

std::vector<double> as_doubles(const std::vector<std::size_t> &n)
{
    return {n.begin(), n.end()};
}

} // namespace

double ConvergenceRun::slope() const
{
    return fit_slope(control, tv);
}

bool ConvergenceRun::strictly_decreasing() const
{
    for (std::size_t i = 1; i < tv.size(); ++i)
        if (!(tv[i] < tv[i - 1]))
            return false;
    return !tv.empty();
}

void write_csv(std::ostream &os, const ConvergenceRun &run)
{
    os << "control,tv,bound\n";
    for (std::size_t i = 0; i < run.tv.size(); ++i)
        os << format_double(run.control[i]) << ',' << format_double(run.tv[i]) << ','
           << format_double(run.bound[i]) << '\n';
}

std::string to_json(const ConvergenceRun &run)
{
    nlohmann::ordered_json j;
    j["experiment"] = run.experiment;
    j["target"] = run.target;
    j["control"] = run.control;
    j["tv"] = run.tv;
    j["bound"] = run.bound;
    double s = run.slope();
    j["slope"] = std::isfinite(s) ? nlohmann::ordered_json(s) : nlohmann::ordered_json(nullptr);
    j["strictly_decreasing"] = run.strictly_decreasing();
    j["skipped"] = run.skipped;
    return j.dump();
}

AnalyticFcgf reproductive_member(const FamilySpec &family, double m, double gamma)
{
    if (!(gamma > 0.0))
        fail(ErrorKind::parameter, "reproductive member: gamma must be positive");
    return scaled_member(family, m, gamma, 1.0 / gamma);
}

AnalyticFcgf additive_member(const FamilySpec &family, double m, double lambda)
{
    if (!(lambda > 0.0))
        fail(ErrorKind::parameter, "additive member: lambda must be positive");
    return scaled_member(family, m, 1.0, lambda);
}

ConvergenceRun thin_numbers(const PmfTable &base, double mu, const std::vector<std::size_t> &n_grid,
                            std::size_t max_k)
{
    if (!base.complete())
        fail(ErrorKind::incomplete_table, "thin numbers: base table is incomplete");
    if (!(mu > 0.0) || std::fabs(base.mean() - mu) > 1e-6 * mu)
        fail(ErrorKind::parameter, "thin numbers: mu must be the (positive) mean of the base table");
    check_grid(as_doubles(n_grid));
    if (max_k == 0)
        max_k = base.max_k();

    ConvergenceRun run;
    run.experiment = "thin_numbers";
    run.target = "poisson(mu=" + format_double(mu) + ")";
    const auto target = poisson_table(mu, max_k);
    for (std::size_t n : n_grid) {
        if (n == 0)
            fail(ErrorKind::parameter, "thin numbers: n must be positive");
        auto sum = convolve_power(base, n, max_k);
        auto avg = thin_pmf(sum, 1.0 / static_cast<double>(n));
        record(run, static_cast<double>(n), avg, target);
    }
    return run;
}

ConvergenceRun hermite_clt(const AnalyticFcgf &base, double mu, const std::vector<std::size_t> &n_grid,
                           std::size_t max_k)
{
    const auto k = cumulants(base, 2);
    const double m = k[0], gamma = k[1];
    if (!(m > 0.0) || !(gamma > 0.0))
        fail(ErrorKind::parameter, "hermite clt: base needs positive mean and dispersion");
    if (mu < gamma)
        fail(ErrorKind::parameter, "hermite clt: need mu >= gamma = " + format_double(gamma));
    check_grid(as_doubles(n_grid));

    ConvergenceRun run;
    run.experiment = "hermite_clt";
    run.target = "pt(p=0, mu=" + format_double(mu) + ", gamma=" + format_double(gamma) + ")";
    const auto target = pmf_from_fcgf(pt_fcgf({0.0, mu, gamma}), max_k);
    for (std::size_t n : n_grid) {
        const double rn = std::sqrt(static_cast<double>(n));
        if (static_cast<double>(n) * m - rn * mu < 0.0) {
            run.skipped.push_back("n=" + std::to_string(n) + ": negative subtraction");
            continue;
        }
        auto z = raw::affine(dilate(base, 1.0 / rn), static_cast<double>(n), -(rn * m - mu), base.flags());
        if (!pmf_nonnegative(z, max_k)) {
            run.skipped.push_back("n=" + std::to_string(n) + ": Poisson subtraction invalid");
            continue;
        }
        record(run, static_cast<double>(n), pmf_from_fcgf(z, max_k), target);
    }
    return run;
}

ConvergenceRun pt_converge(const FamilySpec &family, double p, double c0, double mu, double gamma,
                           const std::vector<double> &c_grid, Direction direction, std::size_t max_k)
{
    if (!(mu > 0.0) || !(gamma > 0.0) || !(c0 > 0.0))
        fail(ErrorKind::parameter, "pt converge: mu, gamma and c0 must be positive");
    if (direction == Direction::down && !family.fcgf.infinitely_dilatable())
        fail(ErrorKind::dilation_unavailable, family.name + ": the limit c -> 0 needs infinite dilatability");
    check_grid(c_grid);
    for (double c : c_grid)
        if (!(c > 0.0))
            fail(ErrorKind::parameter, "pt converge: c must be positive");

    ConvergenceRun run;
    run.experiment = std::string("pt_converge_") + (direction == Direction::up ? "up" : "down");
    PtParams tp{p, mu, gamma * c0};
    run.target = "pt(p=" + format_double(p) + ", mu=" + format_double(mu) + ", gamma=" +
                 format_double(tp.gamma) + ")";
    const auto target = pmf_from_fcgf(pt_fcgf(tp), max_k);
    for (double c : c_grid) {
        // c^{-1} . FD(c mu, g) with g = c^{2-p} gamma is t -> C_theta(g t / c) / g.
        const double g = std::pow(c, 2.0 - p) * gamma;
        auto member = scaled_member(family, c * mu, g / c, 1.0 / g);
        record(run, c, pmf_from_fcgf(member, max_k), target);
    }
    return run;
}

ConvergenceRun hermite_revisited(const FamilySpec &family, double mu0, double mu, double gamma,
                                 const std::vector<std::size_t> &n_grid, std::size_t max_k)
{
    if (!(mu > 0.0) || !(gamma > 0.0) || mu0 < 0.0)
        fail(ErrorKind::parameter, "hermite revisited: need mu, gamma > 0 and mu0 >= 0");
    const double v0 = dispersion_function(family, mu0);
    const double target_gamma = gamma * v0;
    if (!(target_gamma > 0.0) || target_gamma > mu)
        fail(ErrorKind::parameter, "hermite revisited: need 0 < gamma v(mu0) <= mu");
    check_grid(as_doubles(n_grid));

    ConvergenceRun run;
    run.experiment = "hermite_revisited";
    run.target = "pt(p=0, mu=" + format_double(mu) + ", gamma=" + format_double(target_gamma) + ")";
    const auto target = pmf_from_fcgf(pt_fcgf({0.0, mu, target_gamma}), max_k);
    for (std::size_t n : n_grid) {
        const double nd = static_cast<double>(n), rn = std::sqrt(nd);
        // (n / gamma) C_theta(gamma t / n^{1/2}) - n^{1/2} mu0 t
        auto member = scaled_member(family, mu0 + mu / rn, gamma / rn, nd / gamma);
        auto z = raw::affine(member, 1.0, -rn * mu0, member.flags());
        if (!pmf_nonnegative(z, max_k)) {
            run.skipped.push_back("n=" + std::to_string(n) + ": Poisson subtraction invalid");
            continue;
        }
        record(run, nd, pmf_from_fcgf(z, max_k), target);
    }
    return run;
}

std::vector<std::int64_t> inar1_simulate(const Inar1Config &cfg, Rng &rng)
{
    if (!(cfg.lambda > 0.0) || !(cfg.c >= 0.0 && cfg.c < 1.0))
        fail(ErrorKind::parameter, "inar1: need lambda > 0 and 0 <= c < 1");
    std::vector<std::int64_t> path;
    path.reserve(cfg.length);
    if (cfg.length == 0)
        return path;
    std::poisson_distribution<std::int64_t> start(cfg.lambda);
    std::poisson_distribution<std::int64_t> innovation(cfg.lambda * (1.0 - cfg.c));
    std::int64_t x = start(rng);
    path.push_back(x);
    for (std::size_t t = 1; t < cfg.length; ++t) {
        std::binomial_distribution<std::int64_t> thin(x, cfg.c);
        x = thin(rng) + innovation(rng);
        path.push_back(x);
    }
    return path;
}

Inar1Summary summarize_inar1(const std::vector<std::int64_t> &path, double c)
{
    const std::size_t n = path.size();
    if (n < 2)
        fail(ErrorKind::parameter, "inar1 summary: need at least two observations");
    double m = 0.0;
    for (auto x : path)
        m += static_cast<double>(x);
    m /= static_cast<double>(n);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = static_cast<double>(path[i]) - m;
        s0 += d * d;
        if (i + 1 < n)
            s1 += d * (static_cast<double>(path[i + 1]) - m);
    }
    const double var = s0 / static_cast<double>(n);
    const double se = std::sqrt(var / static_cast<double>(n) * (1.0 + c) / (1.0 - c));
    return {m, se, var, s1 / s0};
}

DispersionFit dispersion_limit_check(const FamilySpec &family, double p, Boundary boundary,
                                     const std::vector<double> &grid)
{
    check_grid(grid);
    std::vector<double> v;
    for (double mu : grid) {
        if (!family.mean_domain.contains(mu))
            fail(ErrorKind::domain, family.name + ": grid point " + format_double(mu) +
                                        " outside the mean domain");
        v.push_back(dispersion_function(family, mu));
    }
    double intercept = 0.0;
    const double slope = fit_slope(grid, v, &intercept);
    DispersionFit fit{slope, 0.0, p, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double r = std::log(std::fabs(v[i])) - (intercept + slope * std::log(grid[i]));
        fit.max_residual = std::max(fit.max_residual, std::fabs(r));
    }
    // The point nearest the boundary carries the most weight for c0.
    const std::size_t edge = (boundary == Boundary::zero) == (grid.front() < grid.back()) ? 0 : grid.size() - 1;
    fit.c0 = v[edge] / std::pow(grid[edge], p);
    return fit;
}

} // namespace fdm
