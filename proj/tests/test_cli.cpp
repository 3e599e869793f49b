#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fdm/cli.hpp"
#include "fdm/series.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = fdm::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string &text)
{
    std::vector<std::string> v;
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);)
        v.push_back(l);
    return v;
}

fs::path scratch(const std::string &name)
{
    auto p = fs::temp_directory_path() / ("fdm_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(CliPmf, HermiteZeroRow)
{
    auto r = run({"pmf", "--family", "hermite", "--mu", "2", "--gamma", "1", "--n", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto l = lines(r.out);
    ASSERT_EQ(l.size(), 13u);
    EXPECT_EQ(l[0], "k,p_k");
    EXPECT_EQ(l[1].substr(0, 10), "0,0.223130");
    EXPECT_NEAR(std::stod(l[1].substr(2)), std::exp(0.5 - 2.0), 1e-16);
    EXPECT_EQ(l.back().substr(0, 8), "# total=");
}

TEST(CliPmf, TrailerEchoesTailBound)
{
    auto r = run({"pmf", "--family", "nb", "--lambda", "2", "--mu", "0.5", "--n", "6"});
    ASSERT_EQ(r.code, 0);
    double sum = 0.0;
    auto l = lines(r.out);
    for (std::size_t i = 1; i + 1 < l.size(); ++i)
        sum += std::stod(l[i].substr(l[i].find(',') + 1));
    const auto &trailer = l.back();
    const double tail = std::stod(trailer.substr(trailer.find("tail_bound=") + 11));
    EXPECT_GT(tail, 0.0);
    EXPECT_NEAR(sum + tail, 1.0, 1e-15);
}

TEST(CliPmf, TruncationFromEnvironment)
{
    ::setenv("FDM_TRUNC", "7", 1);
    auto r = run({"pmf", "--family", "poisson", "--mu", "1"});
    auto flag = run({"pmf", "--family", "poisson", "--mu", "1", "--trunc", "3"});
    ::unsetenv("FDM_TRUNC");
    EXPECT_EQ(lines(r.out).size(), 8u + 2u);
    EXPECT_EQ(lines(flag.out).size(), 4u + 2u);
}

TEST(CliPmf, JsonAndParamPrefix)
{
    auto r = run({"pmf", "--family", "binomial", "--param-n", "2", "--mu", "0.5", "--n", "2", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["probs"].size(), 3u);
    EXPECT_DOUBLE_EQ(j["probs"][1].get<double>(), 0.5);
}

TEST(CliAtlas, TableRows)
{
    auto r = run({"atlas"});
    ASSERT_EQ(r.code, 0);
    auto l = lines(r.out);
    auto has = [&](const std::string &row) { return std::find(l.begin(), l.end(), row) != l.end(); };
    EXPECT_TRUE(has("polya-aeppli, p=1.5, alpha=-1"));
    EXPECT_TRUE(has("hermite, p=0, alpha=2"));
    EXPECT_TRUE(has("neyman-type-a, p=1, alpha=-inf"));
    EXPECT_TRUE(has("negative-binomial, p=2, alpha=0"));
    EXPECT_TRUE(has("poisson-inverse-gaussian, p=3, alpha=0.5"));
    EXPECT_TRUE(has("poisson-binomial(n=4), p=0.66666666666666663, alpha=4"));
}

TEST(CliOp, MTransformOfNegativeBinomialIsBinomial)
{
    // -3 log(1 - mu t) with a = mu becomes 3 log(1 + mu t), i.e. Bi(3, mu).
    for (double mu : {0.5, 1.0}) {
        auto m = fdm::format_double(mu);
        auto r = run({"op", "--family", "nb", "--lambda", "3", "--mu", m, "mtransform", "--a", m, "pmf", "--n", "10"});
        ASSERT_EQ(r.code, 0) << r.err;
        auto oracle = fdm::binomial_table(3, mu, 10);
        auto l = lines(r.out);
        for (std::size_t k = 0; k <= 10; ++k)
            EXPECT_NEAR(std::stod(l[k + 1].substr(l[k + 1].find(',') + 1)), oracle[k], 1e-10) << mu << " " << k;
    }
}

TEST(CliOp, ChainAndErrors)
{
    auto r = run({"op", "--family", "poisson", "--mu", "2", "dilate", "--c", "0.5", "translate", "--mu", "1",
                  "report", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["mean"].get<double>(), 2.0);
    EXPECT_DOUBLE_EQ(j["zero_inflation"].get<double>(), 0.0);

    auto bad = run({"op", "--family", "poisson", "--mu", "1", "subtract", "--mu", "2"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_EQ(bad.err.rfind("error: ", 0), 0u);

    EXPECT_EQ(run({"op", "--family", "poisson", "--mu", "1", "twist"}).code, 2);
    EXPECT_EQ(run({"op", "--family", "poisson", "--mu", "1", "report", "dilate", "--c", "0.5"}).code, 2);
}

TEST(CliErrors, ExitCodesAndMessages)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"pmf", "--family", "poisson", "--mu"}).code, 2);
    EXPECT_EQ(run({"pmf", "--family", "poisson", "--mu", "abc"}).code, 2);
    EXPECT_EQ(run({"pmf", "--family", "poisson", "--mu", "1", "--format", "xml"}).code, 2);
    auto r = run({"pmf", "--family", "hermite", "--mu", "1", "--gamma", "2"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("error: parameter: ", 0), 0u) << r.err;
    EXPECT_EQ(lines(r.err).size(), 1u);
    EXPECT_EQ(run({"help"}).code, 0);
}

TEST(CliSample, DeterministicPerSeed)
{
    std::vector<std::string> base{"sample", "--family", "pt", "--p", "1.5", "--mu", "2", "--gamma", "0.5", "--n", "200"};
    auto a = run(base), b = run(base);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    auto seeded = base;
    seeded.insert(seeded.end(), {"--seed", "1"});
    EXPECT_NE(run(seeded).out, a.out);
    auto inv = run({"sample", "--family", "geometric", "--mu", "2", "--n", "100", "--seed", "4"});
    EXPECT_EQ(inv.out, run({"sample", "--family", "geometric", "--mu", "2", "--n", "100", "--seed", "4"}).out);
    EXPECT_EQ(lines(inv.out).size(), 101u);
}

TEST(CliConverge, ThinNumbersAndInar)
{
    auto r = run({"converge", "--experiment", "thin_numbers", "--family", "geometric", "--mu", "2", "--format",
                  "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_LT(j["slope"].get<double>(), 0.0);
    EXPECT_TRUE(j["strictly_decreasing"].get<bool>());

    auto inar = run({"converge", "--experiment", "inar1", "--lambda", "3", "--c", "0.5", "--length", "1000"});
    EXPECT_EQ(inar.code, 0);
    EXPECT_EQ(lines(inar.out).front(), "mean,se_mean,variance,lag1_acf");
    EXPECT_EQ(run({"converge", "--experiment", "nope"}).code, 2);
}

TEST(CliMv, Subcommands)
{
    auto c = run({"mv", "classify", "--model", "multinomial", "--trials", "4", "--q", "0.2,0.3"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(lines(c.out).back(), "classification,,,under");
    auto zi = run({"mv", "zi", "--model", "bivariate_poisson", "--mu1", "1", "--mu2", "1", "--mu3", "1"});
    EXPECT_EQ(lines(zi.out).back(), "0.25");
    auto s = run({"mv", "sample", "--model", "pt", "--p", "2", "--mu", "1,2", "--sigma", "0.5,0.2,0.2,0.5", "--n",
                  "10"});
    EXPECT_EQ(lines(s.out).size(), 11u);
    auto bad = run({"mv", "sample", "--model", "pt", "--p", "2", "--mu", "1,1", "--sigma", "4,1.5,1.5,1", "--n", "10"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("decomposition-infeasible"), std::string::npos);
    EXPECT_EQ(run({"mv", "classify", "--model", "pt", "--p", "2", "--mu", "1,1", "--sigma", "1,2"}).code, 2);
}

TEST(CliOut, WritesFile)
{
    auto dir = scratch("out");
    auto r = run({"atlas", "--out", (dir / "atlas.csv").string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(slurp(dir / "atlas.csv"), run({"atlas"}).out);
}

TEST(CliManifest, RunsAndSummarizes)
{
    auto dir = scratch("manifest");
    {
        std::ofstream m(dir / "m.json");
        m << R"({"experiments": [
  {"id": "geo", "experiment": "thin_numbers", "family": "geometric", "mu": 2, "grid": [8, 16, 32]},
  {"id": "draws", "experiment": "sample", "family": "poisson", "mu": 1, "n": 50}
]})";
    }
    auto out1 = dir / "a", out2 = dir / "b";
    auto r = run({"manifest", (dir / "m.json").string(), "--out", out1.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_EQ(run({"manifest", (dir / "m.json").string(), "--out", out2.string()}).code, 0);
    auto summary = nlohmann::json::parse(slurp(out1 / "summary.json"));
    ASSERT_EQ(summary["experiments"].size(), 2u);
    EXPECT_LT(summary["experiments"][0]["slope"].get<double>(), 0.0);
    for (auto f : {"geo.csv", "draws.csv", "summary.json"})
        EXPECT_EQ(slurp(out1 / f), slurp(out2 / f)) << f;
}

TEST(CliManifest, EmptyAndSchemaErrors)
{
    auto dir = scratch("schema");
    auto write = [&](const std::string &name, const std::string &body) {
        std::ofstream(dir / name) << body;
        return (dir / name).string();
    };
    auto empty = run({"manifest", write("empty.json", R"({"experiments": []})"), "--out", (dir / "e").string()});
    EXPECT_EQ(empty.code, 0) << empty.err;
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "e" / "summary.json"))["experiments"].size(), 0u);

    auto dup = run({"manifest",
                    write("dup.json", "{\"experiments\": [\n"
                                      "  {\"id\": \"a\", \"experiment\": \"atlas\"},\n"
                                      "  {\"id\": \"a\", \"experiment\": \"atlas\"}\n]}"),
                    "--out", (dir / "d").string()});
    EXPECT_EQ(dup.code, 1);
    EXPECT_NE(dup.err.find("error: schema:"), std::string::npos) << dup.err;
    EXPECT_NE(dup.err.find("dup.json:3:"), std::string::npos) << dup.err;
    EXPECT_NE(dup.err.find("duplicate"), std::string::npos);

    auto broken = run({"manifest", write("broken.json", "{\n\"experiments\": [\n  {\"id\": }\n]}")});
    EXPECT_EQ(broken.code, 1);
    EXPECT_NE(broken.err.find("broken.json:3:"), std::string::npos) << broken.err;

    auto unknown = run({"manifest", write("unknown.json", R"({"experiments": [{"id": "x", "experiment": "zzz"}]})")});
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.err.find("unknown experiment"), std::string::npos);
}
