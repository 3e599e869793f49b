// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "fdm/asymptotics.hpp"
#include "fdm/families.hpp"
#include "fdm/multivariate.hpp"
#include "fdm/poisson_tweedie.hpp"

using namespace fdm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string &what)
    {
        if (!ok) {
            if (!pass)
                detail << "; ";
            detail << "failed: " << what;
        }
        pass = pass && ok;
    }
};

std::string num(double x)
{
    return format_double(x, 4);
}

double rel(double a, double b)
{
    return std::fabs(a - b) / std::max(1e-300, std::max(std::fabs(a), std::fabs(b)));
}

void atlas(Outcome &o)
{
    o.check(alpha_from_p(0.0) == 2.0, "hermite");
    o.check(std::isinf(alpha_from_p(1.0)) && alpha_from_p(1.0) < 0, "neyman type A");
    o.check(alpha_from_p(1.5) == -1.0, "polya-aeppli");
    o.check(alpha_from_p(2.0) == 0.0, "negative binomial");
    o.check(alpha_from_p(3.0) == 0.5, "poisson-inverse gaussian");
    for (int n : {3, 4, 5})
        o.check(alpha_from_p((n - 2.0) / (n - 1.0)) == n, "poisson-binomial n=" + std::to_string(n));
    o.detail << "8 table pairs exact";
}

void variance_law(Outcome &o)
{
    double worst_series = 0.0, worst_z = 0.0;
    std::uint64_t seed = 1000;
    for (double p : {1.0, 1.5, 2.0, 3.0})
        for (double mu : {0.5, 1.0, 2.0})
            for (double g : {0.25, 1.0}) {
                const double var = mu + g * std::pow(mu, p);
                auto pmf = pmf_from_fcgf(pt_fcgf({p, mu, g}), 4096);
                const double err = std::fabs(pmf.variance() - var);
                worst_series = std::max(worst_series, err);
                o.check(pmf.complete() && err <= 1e-8, "series p=" + num(p) + " mu=" + num(mu) + " g=" + num(g));

                Rng rng(seed++);
                auto x = sample_pt({p, mu, g}, 1'000'000, rng);
                const double n = static_cast<double>(x.size());
                double m = 0.0;
                for (auto v : x)
                    m += static_cast<double>(v);
                m /= n;
                double m2 = 0.0, m4 = 0.0;
                for (auto v : x) {
                    const double d = (static_cast<double>(v) - m) * (static_cast<double>(v) - m);
                    m2 += d;
                    m4 += d * d;
                }
                m2 /= n;
                m4 /= n;
                const double se = std::sqrt((m4 - m2 * m2) / n);
                const double z = std::fabs(m2 * n / (n - 1) - var) / se;
                worst_z = std::max(worst_z, z);
                o.check(z < 4.0, "monte carlo p=" + num(p) + " mu=" + num(mu) + " g=" + num(g));
            }
    o.detail << (o.pass ? "" : "; ") << "max series error " << num(worst_series) << ", max |z| " << num(worst_z)
             << " over 24 cells";
}

void dilation_closure(Outcome &o)
{
    double worst = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const PtParams base{p, 2.0, 0.8};
        auto pmf = pmf_from_fcgf(pt_fcgf(base), 600);
        for (double c : {0.25, 0.5, 0.9}) {
            auto thinned = thin_pmf(pmf, c);
            auto direct = pmf_from_fcgf(pt_fcgf(pt_dilate(base, c)), 600);
            for (std::size_t k = 0; k <= 600; ++k)
                worst = std::max(worst, std::fabs(thinned[k] - direct[k]));
        }
    }
    o.check(worst <= 1e-9, "elementwise difference");
    o.detail << (o.pass ? "" : "; ") << "max |diff| " << num(worst);
}

void m_transform_duality(Outcome &o)
{
    double worst = 0.0;
    for (std::size_t n : {1, 3})
        for (double mu : {0.5, 1.0}) {
            auto nb = make_family("nb", {{"lambda", static_cast<double>(n)}, {"mu", mu}}).fcgf;
            auto pmf = pmf_from_fcgf(m_transform(nb, mu, true), 40);
            auto oracle = binomial_table(n, mu, 40);
            for (std::size_t k = 0; k <= 40; ++k)
                worst = std::max(worst, std::fabs(pmf[k] - oracle[k]));
        }
    o.check(worst <= 1e-10, "binomial PMF match");
    o.detail << (o.pass ? "" : "; ") << "max |diff| " << num(worst);
}

void thin_numbers_law(Outcome &o)
{
    auto bern = thin_numbers(pmf_from_fcgf(make_family("bernoulli", {{"q", 0.5}}).fcgf, 60), 0.5, {50}, 60);
    o.check(bern.tv[0] <= 0.25 / 50, "bernoulli bound");
    auto geo = thin_numbers(pmf_from_fcgf(make_family("geometric", {{"mu", 2.0}}).fcgf, 512), 2.0, {8, 16, 32, 64});
    double worst = 0.0;
    for (std::size_t i = 1; i < geo.tv.size(); ++i)
        worst = std::max(worst, geo.tv[i] / geo.tv[i - 1]);
    o.check(worst <= 0.7, "geometric ratio");
    o.detail << (o.pass ? "" : "; ") << "bernoulli n=50 tv " << num(bern.tv[0]) << " (bound 0.005), geometric worst ratio "
             << num(worst);
}

void hermite_clt_rate(Outcome &o)
{
    auto geo = make_family("geometric", {{"mu", 2.0}}).fcgf;
    auto run = hermite_clt(geo, 8.0, {25, 100, 400});
    const double s = run.slope();
    o.check(run.skipped.empty() && s >= -1.0 && s <= -0.25, "slope in [-1, -0.25]");
    auto edge = hermite_clt(geo, 4.0, {25, 100, 400});
    o.detail << (o.pass ? "" : "; ") << "target mu=8 slope " << num(s) << ", tv " << num(run.tv.front()) << " -> "
             << num(run.tv.back()) << "; diagnostic at the boundary mu=gamma=4: slope " << num(edge.slope());
}

void pt_convergence(Outcome &o)
{
    const double b = 1.5, s = 1.0, a = 0.5;
    auto fam = make_family("linnik", {{"b", b}, {"scale", s}, {"alpha", a}, {"theta", -0.8}});
    auto up = pt_converge(fam, 3.0, (1 - a) * std::pow(b * s * a, -2.0), 1.0, 1.0, {1, 2, 4, 8}, Direction::up);
    auto down = pt_converge(fam, 2.0, 1.0 / (b * a), 1.0, 1.0, {1, 0.5, 0.25, 0.125}, Direction::down);
    o.check(up.strictly_decreasing() && up.tv.back() < 0.05, "linnik up to p=3");
    o.check(down.strictly_decreasing() && down.tv.back() < 0.05, "linnik down to p=2");
    o.detail << (o.pass ? "" : "; ") << "up tv " << num(up.tv.front()) << " -> " << num(up.tv.back()) << ", down tv "
             << num(down.tv.front()) << " -> " << num(down.tv.back());
}

void dispersion_round_trip(Outcome &o)
{
    double worst_rt = 0.0, worst_tilt = 0.0;
    int points = 0;
    for (const auto &[name, params] : catalog()) {
        auto f = make_family(name, params);
        for (double th : {0.0, -0.3, -0.1, 0.1}) {
            if (th != 0.0 && (f.mean_domain.lo == f.mean_domain.hi || !f.theta_domain.contains(th)))
                continue;
            auto g = th == 0.0 ? f : tilt_family(f, th);
            auto c = cumulants(g.fcgf, 2);
            const double r = rel(dispersion_function(f, c[0]), c[1]);
            worst_rt = std::max(worst_rt, r);
            ++points;
            o.check(r <= 1e-9, "round trip " + label(name, params) + " theta=" + num(th));
            if (th != 0.0) {
                const double t = rel(numeric_dispersion_function(f, c[0]), numeric_dispersion_function(g, c[0]));
                worst_tilt = std::max(worst_tilt, t);
                o.check(t <= 1e-8, "tilting invariance " + label(name, params));
            }
        }
    }
    o.detail << (o.pass ? "" : "; ") << points << " points, max round-trip error " << num(worst_rt)
             << ", max tilting error " << num(worst_tilt);
}

void zero_inflation(Outcome &o)
{
    const double po = report(make_family("poisson", {{"mu", 2.0}}).fcgf).zero_inflation;
    o.check(po == 0.0, "poisson exactly zero");
    const double nta = report(make_family("neyman_a", {{"mu", 2.0}, {"gamma", 1.0}}).fcgf).zero_inflation;
    o.check(std::fabs(nta - std::exp(-1.0)) <= 1e-12, "neyman type A");
    double spread = 0.0;
    for (auto [name, params] : std::vector<std::pair<std::string, ParamMap>>{
             {"nb", {{"mu", 0.7}}},
             {"poisson_nb", {{"mu", 0.7}, {"k", 1.5}}},
             {"discrete_stable", {{"alpha", 0.5}, {"theta", -0.7}}},
             {"neyman_a_additive", {{"mu", 0.7}}}}) {
        std::vector<double> zi;
        for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
            params["lambda"] = lambda;
            zi.push_back(report(make_family(name, params).fcgf).zero_inflation);
        }
        for (double z : zi)
            spread = std::max(spread, std::fabs(z - zi[0]));
    }
    o.check(spread <= 1e-10, "additive invariance");
    o.detail << (o.pass ? "" : "; ") << "poisson " << po << ", neyman type A " << format_double(nta)
             << ", additive spread " << num(spread);
}

void multivariate(Outcome &o)
{
    Vector mu3(3);
    mu3 << 1.0, 2.0, 0.5;
    Vector q(2);
    q << 0.2, 0.3;
    const auto bp = classify(bivariate_poisson(1.0, 1.0, 1.0).moments);
    const auto mn = classify(multinomial(5, q).moments);
    const auto pp = classify(product_poisson(mu3).moments);
    o.check(bp == DispersionClass::indefinite, "bivariate poisson indefinite");
    o.check(mn == DispersionClass::under, "multinomial under");
    o.check(pp == DispersionClass::equi, "product poisson equi");

    MvPtParams pt;
    pt.p = 2.0;
    pt.mu = Vector(2);
    pt.mu << 1.0, 2.0;
    pt.sigma = Matrix(2, 2);
    pt.sigma << 0.5, 0.2, 0.2, 0.5;
    Rng rng(77);
    auto x = sample_mv_pt(pt, 1'000'000, rng);
    const double n = static_cast<double>(x.size());
    Vector m = Vector::Zero(2);
    for (const auto &row : x)
        for (int i = 0; i < 2; ++i)
            m[i] += static_cast<double>(row[i]);
    m /= n;
    Matrix cov = Matrix::Zero(2, 2), sq = Matrix::Zero(2, 2);
    for (const auto &row : x)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double v = (static_cast<double>(row[i]) - m[i]) * (static_cast<double>(row[j]) - m[j]);
                cov(i, j) += v;
                sq(i, j) += v * v;
            }
    cov /= n;
    sq /= n;
    const Matrix target = Matrix(pt.mu.asDiagonal()) + mv_pt_dispersion(pt).S;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double se = std::sqrt((sq(i, j) - cov(i, j) * cov(i, j)) / n);
            worst = std::max(worst, std::fabs(cov(i, j) - target(i, j)) / se);
        }
    o.check(worst < 4.0, "sample covariance");
    o.detail << (o.pass ? "" : "; ") << "classes " << to_string(bp) << "/" << to_string(mn) << "/" << to_string(pp)
             << ", covariance max |z| " << num(worst);
}

void com_poisson_asymptote(Outcome &o)
{
    auto hard = make_family("com_poisson", {{"lambda", 1.0}, {"nu", 2.0}});
    const double mu = 0.01;
    const double v = dispersion_function(hard, mu);
    const double ratio = v / (-mu * mu);
    o.check(ratio >= 0.85 && ratio <= 1.15, "nu=2 ratio v/(-mu^2) in [0.85, 1.15]");
    auto soft = make_family("com_poisson", {{"lambda", 1.0}, {"nu", 0.5}});
    auto fit = dispersion_limit_check(soft, p_from_alpha(2.0), Boundary::infinity, {10, 20, 40, 70, 100});
    o.check(std::fabs(fit.slope - fit.expected_p) <= 0.15, "nu=0.5 slope");
    o.detail << (o.pass ? "" : "; ") << "nu=2: v(0.01)/(-mu^2) = " << num(ratio) << ", v/(-mu^3/2) = "
             << num(v / (-mu * mu * mu / 2)) << "; nu=0.5 slope " << num(fit.slope) << " vs p=" << num(fit.expected_p);
}

void inar1(Outcome &o)
{
    Rng rng(2026);
    Inar1Config cfg{3.0, 0.5, 100'000};
    auto s = summarize_inar1(inar1_simulate(cfg, rng), cfg.c);
    o.check(std::fabs(s.mean - 3.0) < 4 * s.se_mean, "mean");
    o.check(std::fabs(s.lag1_acf - 0.5) <= 0.02, "lag-1 acf");
    o.detail << (o.pass ? "" : "; ") << "mean " << num(s.mean) << " (se " << num(s.se_mean) << "), acf "
             << num(s.lag1_acf);
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism(Outcome &o)
{
    const fs::path root = fs::temp_directory_path() / "fdm_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    for (const char *run : {"a", "b"}) {
        const std::string cmd = std::string("\"") + FDM_EXE + "\" manifest \"" + FDM_MANIFEST + "\" --out \"" +
                                (root / run).string() + "\" > \"" + (root / (std::string(run) + ".stdout")).string() +
                                "\"";
        o.check(std::system(cmd.c_str()) == 0, std::string("run ") + run);
    }
    std::size_t files = 0;
    if (fs::exists(root / "a")) {
        for (const auto &e : fs::directory_iterator(root / "a")) {
            ++files;
            const auto other = root / "b" / e.path().filename();
            o.check(fs::exists(other) && slurp(e.path()) == slurp(other), e.path().filename().string());
        }
    }
    o.check(files > 0 && files == static_cast<std::size_t>(std::distance(fs::directory_iterator(root / "b"),
                                                                         fs::directory_iterator())),
            "same file set");
    o.check(slurp(root / "a.stdout") == slurp(root / "b.stdout"), "stdout");
    o.detail << (o.pass ? "" : "; ") << files << " files byte-identical across two runs";
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Outcome &)>>> criteria{
        {"atlas", atlas},
        {"variance-law", variance_law},
        {"dilation-closure", dilation_closure},
        {"m-transform-duality", m_transform_duality},
        {"law-of-thin-numbers", thin_numbers_law},
        {"hermite-clt", hermite_clt_rate},
        {"pt-convergence", pt_convergence},
        {"dispersion-round-trip", dispersion_round_trip},
        {"zero-inflation", zero_inflation},
        {"multivariate", multivariate},
        {"com-poisson-asymptote", com_poisson_asymptote},
        {"inar1", inar1},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception &e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": "
                  << o.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
