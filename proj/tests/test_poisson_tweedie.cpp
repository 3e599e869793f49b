#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "fdm/error.hpp"
#include "fdm/families.hpp"
#include "fdm/poisson_tweedie.hpp"
#include "fdm/series.hpp"

using namespace fdm;

namespace {

ErrorKind kind_of(auto &&fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    return ErrorKind::usage;
}

PmfTable empirical(const std::vector<std::int64_t> &x, std::size_t max_k)
{
    std::vector<double> p(max_k + 1, 0.0);
    double over = 0.0;
    for (auto v : x) {
        if (static_cast<std::size_t>(v) <= max_k)
            p[static_cast<std::size_t>(v)] += 1.0;
        else
            over += 1.0;
    }
    for (auto &v : p)
        v /= static_cast<double>(x.size());
    return PmfTable(p, over / static_cast<double>(x.size()), 1.0);
}

} // namespace

TEST(PtFcgf, ClosedForms)
{
    auto nb = pt_fcgf({2.0, 2.0, 0.5});
    for (double t : {-0.9, 0.2, 0.9})
        EXPECT_NEAR(nb.eval(t), -2.0 * std::log(1 - t), 1e-14);
    auto k = cumulants(nb, 2);
    EXPECT_NEAR(k[0] + k[1], 4.0, 1e-13);

    auto nta = pt_fcgf({1.0, 2.0, 1.0});
    for (double t : {-1.0, 0.5})
        EXPECT_NEAR(nta.eval(t), 2.0 * (std::exp(t) - 1), 1e-14);

    auto pig = pt_fcgf({3.0, 1.0, 1.0});
    auto c = cumulants(pig, 2);
    EXPECT_NEAR(c[0], 1.0, 1e-14);
    EXPECT_NEAR(c[1], 1.0, 1e-14);
    EXPECT_NEAR(finite_difference(pig, 0.0, 2), 1.0, 1e-5);

    EXPECT_TRUE(pig.infinitely_divisible() && pig.infinitely_dilatable());
    auto herm = pt_fcgf({0.0, 2.0, 1.0});
    EXPECT_FALSE(herm.infinitely_dilatable());
}

TEST(PtFcgf, ParameterErrors)
{
    EXPECT_EQ(kind_of([] { pt_fcgf({0.5, 1.0, 1.0}); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([] { pt_fcgf({-1.0, 1.0, 1.0}); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([] { pt_fcgf({0.0, 1.0, 2.0}); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([] { pt_fcgf({2.0, 0.0, 1.0}); }), ErrorKind::parameter);
}

TEST(PtFcgf, VarianceLaw)
{
    for (double p : {1.0, 1.5, 2.0, 3.0, 2.5, 5.0})
        for (double mu : {0.5, 1.0, 2.0})
            for (double g : {0.25, 1.0}) {
                auto k = cumulants(pt_fcgf({p, mu, g}), 2);
                EXPECT_NEAR(k[0], mu, 1e-12);
                EXPECT_NEAR(k[1], g * std::pow(mu, p), 1e-8) << p << " " << mu << " " << g;
                auto pmf = pmf_from_fcgf(pt_fcgf({p, mu, g}), 2048);
                if (pmf.complete())
                    EXPECT_NEAR(pmf.variance(), mu + g * std::pow(mu, p), 1e-8) << p << " " << mu << " " << g;
            }
}

TEST(PtDilate, Parameters)
{
    auto d = pt_dilate({0.0, 2.0, 1.0}, 0.5);
    EXPECT_EQ(d.mu, 1.0);
    EXPECT_EQ(d.gamma, 0.25);
    auto nb = pt_dilate({2.0, 2.0, 0.7}, 3.0);
    EXPECT_EQ(nb.gamma, 0.7);
    auto id = pt_dilate({1.5, 2.0, 0.7}, 1.0);
    EXPECT_EQ(id.mu, 2.0);
    EXPECT_EQ(id.gamma, 0.7);
    EXPECT_EQ(kind_of([] { pt_dilate({0.0, 2.0, 1.0}, 2.0); }), ErrorKind::parameter);
}

TEST(PtDilate, PmfClosureUnderThinning)
{
    for (double p : {0.0, 1.0, 1.5, 2.0, 3.0}) {
        PtParams base{p, 2.0, 0.8};
        auto pmf = pmf_from_fcgf(pt_fcgf(base), 600);
        for (double c : {0.25, 0.5, 0.9}) {
            auto thinned = thin_pmf(pmf, c);
            auto direct = pmf_from_fcgf(pt_fcgf(pt_dilate(base, c)), 600);
            for (std::size_t k = 0; k <= 600; ++k)
                ASSERT_NEAR(thinned[k], direct[k], 1e-9) << p << " " << c << " " << k;
        }
    }
}

TEST(PtDilate, FcgfLevelIdentity)
{
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0})
        for (double c : {0.3, 2.0, 7.0}) {
            PtParams base{p, 1.3, 0.6};
            auto a = dilate(pt_fcgf(base), c);
            auto b = pt_fcgf(pt_dilate(base, c));
            for (double t : {-0.05, 0.01, 0.03})
                EXPECT_NEAR(a.eval(t), b.eval(t), 1e-13 * std::max(1.0, std::fabs(a.eval(t))));
        }
}

TEST(Duality, RoundTripAndDilation)
{
    auto r = to_reproductive({1.0, 4.0});
    EXPECT_EQ(r.gamma, 0.25);
    auto a = to_additive(r);
    EXPECT_EQ(a.lambda, 4.0);
    EXPECT_EQ(a.mu, 1.0);

    // NB additive -lambda log(1 - mu t) with (mu, lambda) = (1, 2) has mean 2;
    // its dual has mean mu = 1 and gamma = 1/2.
    auto additive = make_family("nb", {{"lambda", 2.0}, {"mu", 1.0}}).fcgf;
    auto repro = reproductive_from_additive(additive, 2.0);
    EXPECT_NEAR(cumulants(additive, 1)[0], 2.0, 1e-15);
    EXPECT_NEAR(cumulants(repro, 1)[0], 1.0, 1e-15);
    auto ref = pt_fcgf({2.0, 1.0, 0.5});
    for (double t : {-0.5, 0.3})
        EXPECT_NEAR(repro.eval(t), ref.eval(t), 1e-14);
    EXPECT_EQ(kind_of([] { to_reproductive({1.0, 0.0}); }), ErrorKind::parameter);
}

TEST(FunctionalEquation, PowerHoldsShortFails)
{
    auto power = make_family("pt", {{"p", 2.7}, {"mu", 1.0}, {"gamma", 1.0}});
    auto shrt = make_family("short", {{"mu1", 1.0}, {"mu2", 0.2}, {"phi", 1.0}});
    double worst_short = 0.0;
    for (double c : {1.5, 2.0, 3.0})
        for (double mu : {1.3, 2.0, 4.0}) {
            auto v = [&](const FamilySpec &f, double m) { return dispersion_function(f, m); };
            double lhs = v(power, 1.0) * v(power, c * mu), rhs = v(power, c) * v(power, mu);
            EXPECT_NEAR(lhs, rhs, 1e-10 * std::fabs(lhs));
            double ls = v(shrt, 1.0) * v(shrt, c * mu), rs = v(shrt, c) * v(shrt, mu);
            worst_short = std::max(worst_short, std::fabs(ls - rs) / std::fabs(ls));
        }
    EXPECT_GT(worst_short, 0.05);
}

TEST(ZeroInflation, GrowsWithGammaForNegativeBinomial)
{
    double prev = 0.0;
    for (double g : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        double zi = report(pt_fcgf({2.0, 1.5, g})).zero_inflation;
        EXPECT_GT(zi, prev);
        prev = zi;
    }
}

TEST(ZeroInflation, AdditiveFormIgnoresLambda)
{
    std::map<std::string, ParamMap> bases{
        {"nb", {{"mu", 0.7}}},
        {"poisson_nb", {{"mu", 0.7}, {"k", 1.5}}},
        {"discrete_stable", {{"alpha", 0.5}, {"theta", -0.7}}},
        {"neyman_a_additive", {{"mu", 0.7}}},
    };
    for (auto [name, params] : bases) {
        std::vector<double> zi;
        for (double lambda : {1.0, 2.0, 5.0}) {
            params["lambda"] = lambda;
            zi.push_back(report(make_family(name, params).fcgf).zero_inflation);
        }
        EXPECT_NEAR(zi[1], zi[0], 1e-10) << name;
        EXPECT_NEAR(zi[2], zi[0], 1e-10) << name;
    }
}

TEST(SamplePt, NegativeBinomialMatchesSeries)
{
    Rng rng(2024);
    auto x = sample_pt({2.0, 2.0, 0.5}, 1'000'000, rng);
    auto series = pmf_from_fcgf(pt_fcgf({2.0, 2.0, 0.5}), 200);
    EXPECT_LT(tv_distance(empirical(x, 200), series), 0.01);
}

TEST(SamplePt, NeymanTypeAVariance)
{
    Rng rng(9);
    auto x = sample_pt({1.0, 2.0, 1.0}, 400'000, rng);
    double m = 0, m2 = 0;
    for (auto v : x) {
        m += static_cast<double>(v);
        m2 += static_cast<double>(v) * static_cast<double>(v);
    }
    m /= x.size();
    double var = m2 / x.size() - m * m;
    EXPECT_NEAR(m, 2.0, 0.02);
    EXPECT_NEAR(var, 4.0, 0.1);
}

TEST(SamplePt, SmallGammaIsNearlyPoisson)
{
    Rng rng(4);
    auto x = sample_pt({1.5, 1.0, 1e-3}, 200'000, rng);
    EXPECT_LT(tv_distance(empirical(x, 60), poisson_table(1.0, 60)), 0.01);
}

TEST(SamplePt, EveryBranchAgreesWithSeries)
{
    std::uint64_t seed = 77;
    for (PtParams p : {PtParams{0.0, 2.0, 1.0}, PtParams{1.5, 1.0, 0.8}, PtParams{3.0, 1.0, 0.5},
                       PtParams{2.5, 1.2, 0.4}, PtParams{4.0, 0.8, 0.6}}) {
        Rng rng(seed++);
        auto x = sample_pt(p, 200'000, rng);
        auto series = pmf_from_fcgf(pt_fcgf(p), 400);
        EXPECT_LT(tv_distance(empirical(x, 400), series), 0.012) << p.p;
    }
}
