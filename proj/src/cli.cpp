#include "fdm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "fdm/asymptotics.hpp"
#include "fdm/error.hpp"
#include "fdm/families.hpp"
#include "fdm/multivariate.hpp"
#include "fdm/poisson_tweedie.hpp"
#include "json.hpp"

namespace fdm::cli {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void usage(const std::string &msg)
{
    fail(ErrorKind::usage, msg);
}

struct Context {
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::size_t trunc = default_truncation;
    double tail_tol = default_tail_tol;
    std::optional<std::string> out_path;
    // Set by convergence commands so the manifest runner can summarize them.
    std::optional<ConvergenceRun> last_run;
};

double parse_double(const std::string &flag, const std::string &text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        usage("--" + flag + ": '" + text + "' is not a number");
    return v;
}

std::size_t parse_count(const std::string &flag, const std::string &text)
{
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        usage("--" + flag + ": '" + text + "' is not a non-negative integer");
    return v;
}

std::vector<std::string> split(const std::string &text, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, sep))
        parts.push_back(cur);
    return parts;
}

// Flag/value pairs of one command segment. Every flag must be consumed.
class Args {
public:
    explicit Args(const std::vector<std::string> &tokens)
    {
        for (std::size_t i = 0; i < tokens.size(); i += 2) {
            const auto &t = tokens[i];
            if (t.rfind("--", 0) != 0 || t.size() < 3)
                usage("expected a --flag, got '" + t + "'");
            if (i + 1 >= tokens.size())
                usage(t + " needs a value");
            auto name = t.substr(2);
            if (!kv_.emplace(name, tokens[i + 1]).second)
                usage(t + " given twice");
            order_.push_back(name);
        }
    }

    std::optional<std::string> opt(const std::string &name)
    {
        auto it = kv_.find(name);
        if (it == kv_.end())
            return std::nullopt;
        used_.insert(name);
        return it->second;
    }
    std::string str(const std::string &name)
    {
        auto v = opt(name);
        if (!v)
            usage("missing --" + name);
        return *v;
    }
    double num(const std::string &name) { return parse_double(name, str(name)); }
    double num_or(const std::string &name, double def)
    {
        auto v = opt(name);
        return v ? parse_double(name, *v) : def;
    }
    std::size_t count(const std::string &name) { return parse_count(name, str(name)); }
    std::size_t count_or(const std::string &name, std::size_t def)
    {
        auto v = opt(name);
        return v ? parse_count(name, *v) : def;
    }
    std::vector<double> nums(const std::string &name)
    {
        std::vector<double> out;
        for (const auto &p : split(str(name), ','))
            out.push_back(parse_double(name, p));
        return out;
    }
    std::vector<double> nums_or(const std::string &name, std::vector<double> def)
    {
        return kv_.count(name) ? nums(name) : def;
    }
    std::vector<std::size_t> counts_or(const std::string &name, std::vector<std::size_t> def)
    {
        if (!kv_.count(name))
            return def;
        std::vector<std::size_t> out;
        for (const auto &p : split(str(name), ','))
            out.push_back(parse_count(name, p));
        return out;
    }

    // Every flag not consumed so far, as numeric family parameters. A
    // "param-" prefix disambiguates names that clash with command flags.
    ParamMap rest()
    {
        ParamMap params;
        for (const auto &name : order_) {
            if (used_.count(name))
                continue;
            used_.insert(name);
            std::string key = name.rfind("param-", 0) == 0 ? name.substr(6) : name;
            if (!params.emplace(key, parse_double(name, kv_[name])).second)
                usage("parameter '" + key + "' given twice");
        }
        return params;
    }

    void finish() const
    {
        for (const auto &name : order_)
            if (!used_.count(name))
                usage("unknown flag --" + name);
    }

private:
    std::map<std::string, std::string> kv_;
    std::vector<std::string> order_;
    std::set<std::string> used_;
};

FamilySpec family_from(Args &args)
{
    auto name = args.str("family");
    return make_family(name, args.rest());
}

bool json_format(const Context &ctx)
{
    return ctx.format == "json";
}

void emit_pmf(const Context &ctx, const PmfTable &table, std::ostream &out)
{
    if (json_format(ctx)) {
        out << to_json(table) << '\n';
        return;
    }
    write_csv(out, table);
    out << "# total=" << format_double(table.total()) << ",tail_bound=" << format_double(table.tail_bound())
        << '\n';
}

void emit_report(const Context &ctx, const DispersionReport &r, std::ostream &out)
{
    if (json_format(ctx)) {
        out << to_json(r) << '\n';
        return;
    }
    out << "mean,dispersion,fisher_index,zero_inflation\n"
        << format_double(r.mean) << ',' << format_double(r.dispersion) << ',' << format_double(r.fisher_index)
        << ',' << format_double(r.zero_inflation) << '\n';
}

void emit_draws(const Context &ctx, const std::vector<std::int64_t> &x, std::ostream &out)
{
    if (json_format(ctx)) {
        out << Json{{"draws", x}}.dump() << '\n';
        return;
    }
    out << "x\n";
    for (auto v : x)
        out << v << '\n';
}

void emit_run(Context &ctx, const ConvergenceRun &run, std::ostream &out)
{
    if (json_format(ctx))
        out << to_json(run) << '\n';
    else
        write_csv(out, run);
    ctx.last_run = run;
}

// Inversion against a complete PMF table.
std::vector<std::int64_t> sample_by_inversion(const AnalyticFcgf &f, std::size_t n, const Context &ctx, Rng &rng)
{
    auto table = pmf_from_fcgf(f, ctx.trunc, ctx.tail_tol);
    if (!table.complete())
        fail(ErrorKind::incomplete_table, "sample: the PMF table misses " + format_double(table.tail_bound()) +
                                              " of its mass; raise --trunc");
    std::vector<double> cdf(table.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k)
        cdf[k] = acc += std::max(0.0, table[k]);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::int64_t> out(n);
    for (auto &x : out) {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng) * acc);
        x = static_cast<std::int64_t>(std::min<std::size_t>(it - cdf.begin(), table.max_k()));
    }
    return out;
}

void cmd_pmf(Context &ctx, Args &args, std::ostream &out)
{
    auto n = args.count_or("n", ctx.trunc);
    auto fam = family_from(args);
    args.finish();
    emit_pmf(ctx, pmf_from_fcgf(fam.fcgf, n, ctx.tail_tol), out);
}

void cmd_sample(Context &ctx, Args &args, std::ostream &out)
{
    auto n = args.count("n");
    auto fam = family_from(args);
    args.finish();
    Rng rng(ctx.seed);
    if (fam.name == "pt")
        emit_draws(ctx, sample_pt({fam.param("p"), fam.param("mu"), fam.param("gamma")}, n, rng), out);
    else
        emit_draws(ctx, sample_by_inversion(fam.fcgf, n, ctx, rng), out);
}

void cmd_report(Context &ctx, Args &args, std::ostream &out)
{
    auto fam = family_from(args);
    args.finish();
    emit_report(ctx, report(fam.fcgf), out);
}

const std::set<std::string> operator_words = {"dilate", "tilt", "mtransform", "translate",
                                              "subtract", "geomthin", "reflect"};
const std::set<std::string> terminal_words = {"pmf", "report", "sample"};

void cmd_op(Context &ctx, const std::vector<std::string> &tokens, std::ostream &out)
{
    struct Segment {
        std::string word;
        std::vector<std::string> tokens;
    };
    std::vector<Segment> segs{{"", {}}};
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto &t = tokens[i];
        if (t.rfind("--", 0) == 0) {
            segs.back().tokens.push_back(t);
            if (i + 1 < tokens.size())
                segs.back().tokens.push_back(tokens[++i]);
            continue;
        }
        if (!operator_words.count(t) && !terminal_words.count(t))
            usage("op: unknown operator '" + t + "'");
        if (terminal_words.count(segs.back().word))
            usage("op: '" + segs.back().word + "' must end the chain");
        segs.push_back({t, {}});
    }
    Args head(segs.front().tokens);
    auto fam = family_from(head);
    head.finish();
    AnalyticFcgf f = fam.fcgf;
    for (std::size_t s = 1; s < segs.size(); ++s) {
        Args a(segs[s].tokens);
        const auto &w = segs[s].word;
        if (w == "dilate")
            f = dilate(f, a.num("c"));
        else if (w == "tilt")
            f = tilt(f, a.num("theta"));
        else if (w == "mtransform")
            f = m_transform(f, a.num("a"), true, ctx.trunc);
        else if (w == "translate")
            f = translate(f, a.num("mu"));
        else if (w == "subtract")
            f = subtract(f, a.num("mu"), ctx.trunc);
        else if (w == "geomthin")
            f = geometric_thin(f, a.num("c"));
        else if (w == "reflect")
            f = reflect(f);
        else if (w == "pmf") {
            auto n = a.count_or("n", ctx.trunc);
            a.finish();
            emit_pmf(ctx, pmf_from_fcgf(f, n, ctx.tail_tol), out);
            return;
        } else if (w == "sample") {
            auto n = a.count("n");
            a.finish();
            Rng rng(ctx.seed);
            emit_draws(ctx, sample_by_inversion(f, n, ctx, rng), out);
            return;
        } else if (w == "report") {
            a.finish();
            break;
        }
        a.finish();
    }
    emit_report(ctx, report(f), out);
}

Direction parse_direction(const std::string &s)
{
    if (s == "up")
        return Direction::up;
    if (s == "down")
        return Direction::down;
    usage("--direction must be up or down");
}

void cmd_converge(Context &ctx, Args &args, std::ostream &out)
{
    const auto name = args.str("experiment");
    if (name == "thin_numbers") {
        auto grid = args.counts_or("grid", {8, 16, 32, 64});
        auto max_k = args.count_or("max-k", 0);
        auto fam = family_from(args);
        args.finish();
        auto base = pmf_from_fcgf(fam.fcgf, ctx.trunc, ctx.tail_tol);
        emit_run(ctx, thin_numbers(base, report(fam.fcgf).mean, grid, max_k), out);
    } else if (name == "hermite_clt") {
        auto mu = args.num("target-mu");
        auto grid = args.counts_or("grid", {25, 100, 400});
        auto fam = family_from(args);
        args.finish();
        emit_run(ctx, hermite_clt(fam.fcgf, mu, grid, ctx.trunc), out);
    } else if (name == "pt_converge") {
        auto p = args.num("target-p");
        auto c0 = args.num("c0");
        auto mu = args.num_or("target-mu", 1.0);
        auto gamma = args.num_or("target-gamma", 1.0);
        auto dir = parse_direction(args.str("direction"));
        auto grid = args.nums("grid");
        auto fam = family_from(args);
        args.finish();
        emit_run(ctx, pt_converge(fam, p, c0, mu, gamma, grid, dir, ctx.trunc), out);
    } else if (name == "hermite_revisited") {
        auto mu0 = args.num("mu0");
        auto mu = args.num("target-mu");
        auto gamma = args.num("target-gamma");
        auto grid = args.counts_or("grid", {4, 16, 64});
        auto fam = family_from(args);
        args.finish();
        emit_run(ctx, hermite_revisited(fam, mu0, mu, gamma, grid, ctx.trunc), out);
    } else if (name == "inar1") {
        Inar1Config cfg{args.num("lambda"), args.num("c"), args.count_or("length", 100000)};
        args.finish();
        Rng rng(ctx.seed);
        auto s = summarize_inar1(inar1_simulate(cfg, rng), cfg.c);
        if (json_format(ctx))
            out << Json{{"mean", s.mean}, {"se_mean", s.se_mean}, {"variance", s.variance}, {"lag1_acf", s.lag1_acf}}
                       .dump()
                << '\n';
        else
            out << "mean,se_mean,variance,lag1_acf\n"
                << format_double(s.mean) << ',' << format_double(s.se_mean) << ',' << format_double(s.variance)
                << ',' << format_double(s.lag1_acf) << '\n';
    } else if (name == "dispersion_limit") {
        auto p = args.num("target-p");
        auto b = args.str("boundary");
        if (b != "zero" && b != "infinity")
            usage("--boundary must be zero or infinity");
        auto grid = args.nums("grid");
        auto fam = family_from(args);
        args.finish();
        auto fit = dispersion_limit_check(fam, p, b == "zero" ? Boundary::zero : Boundary::infinity, grid);
        if (json_format(ctx))
            out << Json{{"slope", fit.slope}, {"c0", fit.c0}, {"expected_p", fit.expected_p},
                        {"max_residual", fit.max_residual}}
                       .dump()
                << '\n';
        else
            out << "slope,c0,expected_p,max_residual\n"
                << format_double(fit.slope) << ',' << format_double(fit.c0) << ','
                << format_double(fit.expected_p) << ',' << format_double(fit.max_residual) << '\n';
    } else {
        usage("converge: unknown experiment '" + name + "'");
    }
}

Vector to_vector(const std::vector<double> &v)
{
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_square(const std::vector<double> &v, Eigen::Index k, const std::string &flag)
{
    if (static_cast<Eigen::Index>(v.size()) != k * k)
        usage("--" + flag + " needs " + std::to_string(k * k) + " entries in row-major order");
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            m(i, j) = v[static_cast<std::size_t>(i * k + j)];
    return m;
}

struct MvModel {
    std::string name;
    std::optional<MvFcgf> fcgf;
    MvDispersion moments;
    std::optional<MvPtParams> pt;
    // Exact lattice table; built lazily because it depends on the axis budget.
    std::function<MvPmf(std::size_t)> table;
};

MvModel mv_model(Args &args)
{
    MvModel m;
    m.name = args.str("model");
    if (m.name == "product_poisson") {
        auto mu = to_vector(args.nums("mu"));
        m.fcgf = product_poisson(mu);
        m.table = [mu](std::size_t axis) { return product_poisson_pmf(mu, axis); };
    } else if (m.name == "bivariate_poisson") {
        double a = args.num("mu1"), b = args.num("mu2"), c = args.num("mu3");
        m.fcgf = bivariate_poisson(a, b, c);
        m.table = [=](std::size_t axis) {
            return common_shock_pmf({{{1, 1}, a}, {{1, 0}, b}, {{0, 1}, c}}, 2, axis);
        };
    } else if (m.name == "multinomial") {
        auto trials = args.count("trials");
        auto q = to_vector(args.nums("q"));
        m.fcgf = multinomial(trials, q);
        m.table = [=](std::size_t axis) {
            const auto k = static_cast<std::size_t>(q.size());
            MvPmf one(k, axis);
            std::vector<std::size_t> idx(k, 0);
            one.at(idx) = 1.0 - q.sum();
            for (std::size_t i = 0; i < k; ++i) {
                idx.assign(k, 0);
                idx[i] = 1;
                one.at(idx) = q[static_cast<Eigen::Index>(i)];
            }
            one.set_tail_bound(0.0);
            return trials == 0 ? product_poisson_pmf(Vector::Zero(q.size()), axis) : mv_convolve_power(one, trials);
        };
    } else if (m.name == "hermite") {
        auto mu = to_vector(args.nums("mu"));
        auto sigma = to_square(args.nums("sigma"), mu.size(), "sigma");
        m.fcgf = mv_hermite(mu, sigma);
        m.table = [=](std::size_t axis) { return mv_hermite_pmf(mu, sigma, axis); };
    } else if (m.name == "bernoulli_pair") {
        double p10 = args.num("p10"), p01 = args.num("p01"), p11 = args.num("p11");
        const double p00 = 1.0 - p10 - p01 - p11;
        if (!(p10 >= 0 && p01 >= 0 && p11 >= 0 && p00 >= 0))
            fail(ErrorKind::parameter, "bernoulli_pair: cell probabilities must be non-negative with sum <= 1");
        Vector mean(2);
        mean << p10 + p11, p01 + p11;
        Matrix S(2, 2);
        S << -mean[0] * mean[0], p11 - mean[0] * mean[1], p11 - mean[0] * mean[1], -mean[1] * mean[1];
        auto eval = [=](const Vector &t) {
            return std::log(1.0 + mean[0] * t[0] + mean[1] * t[1] + p11 * t[0] * t[1]);
        };
        m.fcgf = MvFcgf{eval, {mean, S}};
        m.table = [=](std::size_t axis) {
            MvPmf t(2, axis);
            t.at({0, 0}) = p00;
            t.at({1, 0}) = p10;
            t.at({0, 1}) = p01;
            t.at({1, 1}) = p11;
            t.set_tail_bound(0.0);
            return t;
        };
    } else if (m.name == "pt") {
        MvPtParams pt;
        pt.p = args.num("p");
        pt.mu = to_vector(args.nums("mu"));
        pt.sigma = to_square(args.nums("sigma"), pt.mu.size(), "sigma");
        m.moments = mv_pt_dispersion(pt);
        m.pt = pt;
        return m;
    } else {
        usage("mv: unknown model '" + m.name + "'");
    }
    m.moments = m.fcgf->moments;
    return m;
}

void cmd_mv(Context &ctx, const std::vector<std::string> &tokens, std::ostream &out)
{
    if (tokens.empty())
        usage("mv needs one of classify, zi, sample, thin-numbers");
    const auto what = tokens.front();
    Args args({tokens.begin() + 1, tokens.end()});
    if (what == "classify") {
        auto m = mv_model(args);
        args.finish();
        if (json_format(ctx)) {
            out << to_json(m.moments) << '\n';
        } else {
            write_csv(out, m.moments);
            out << "classification,,," << to_string(classify(m.moments)) << '\n';
        }
    } else if (what == "zi") {
        std::optional<std::vector<double>> c;
        if (auto v = args.opt("c"); v) {
            c.emplace();
            for (const auto &p : split(*v, ','))
                c->push_back(parse_double("c", p));
        }
        auto m = mv_model(args);
        args.finish();
        if (!m.fcgf)
            fail(ErrorKind::unsupported, "mv zi: model '" + m.name + "' has no closed-form FCGF");
        double zi = mv_zero_inflation(*m.fcgf, c ? to_vector(*c) : Vector());
        if (json_format(ctx))
            out << Json{{"zero_inflation", zi}}.dump() << '\n';
        else
            out << "zero_inflation\n" << format_double(zi) << '\n';
    } else if (what == "sample") {
        auto n = args.count("n");
        auto m = mv_model(args);
        args.finish();
        if (!m.pt)
            fail(ErrorKind::unsupported, "mv sample: only the pt model can be sampled");
        Rng rng(ctx.seed);
        auto draws = sample_mv_pt(*m.pt, n, rng);
        if (json_format(ctx)) {
            out << Json{{"draws", draws}}.dump() << '\n';
            return;
        }
        for (Eigen::Index i = 0; i < m.pt->mu.size(); ++i)
            out << (i ? "," : "") << 'x' << i;
        out << '\n';
        for (const auto &row : draws) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << row[i];
            out << '\n';
        }
    } else if (what == "thin-numbers") {
        auto grid = args.counts_or("grid", {1, 2, 4, 8, 16, 32});
        auto axis = args.count_or("axis", default_axis_budget);
        auto m = mv_model(args);
        args.finish();
        if (!m.table)
            fail(ErrorKind::unsupported, "mv thin-numbers: model '" + m.name + "' has no exact lattice table");
        emit_run(ctx, mv_thin_numbers(m.table(axis), m.moments.mean, grid), out);
    } else {
        usage("mv: unknown action '" + what + "'");
    }
}

std::string alpha_text(double a)
{
    return std::isinf(a) ? (a < 0 ? "-inf" : "inf") : format_double(a);
}

void cmd_atlas(Context &ctx, Args &args, std::ostream &out)
{
    args.finish();
    std::vector<std::pair<std::string, double>> rows{{"hermite", 0.0}};
    for (int n : {3, 4, 5})
        rows.push_back({"poisson-binomial(n=" + std::to_string(n) + ")", (n - 2.0) / (n - 1.0)});
    rows.insert(rows.end(), {{"neyman-type-a", 1.0},
                             {"polya-aeppli", 1.5},
                             {"negative-binomial", 2.0},
                             {"poisson-inverse-gaussian", 3.0}});
    if (json_format(ctx)) {
        Json j = Json::array();
        for (const auto &[name, p] : rows)
            j.push_back({{"type", name}, {"p", p}, {"alpha", alpha_text(alpha_from_p(p))}});
        out << j.dump() << '\n';
        return;
    }
    for (const auto &[name, p] : rows)
        out << name << ", p=" << format_double(p) << ", alpha=" << alpha_text(alpha_from_p(p)) << '\n';
}

void dispatch(Context &ctx, const std::vector<std::string> &tokens, std::ostream &out);

// Line of each object opening at the given nesting depth, skipping strings.
std::vector<std::size_t> object_lines(const std::string &text, int depth_wanted)
{
    std::vector<std::size_t> lines;
    std::size_t line = 1;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '\n')
            ++line;
        if (in_string) {
            if (ch == '\\')
                ++i;
            else if (ch == '"')
                in_string = false;
            continue;
        }
        if (ch == '"')
            in_string = true;
        else if (ch == '{' && ++depth == depth_wanted)
            lines.push_back(line);
        else if (ch == '}')
            --depth;
    }
    return lines;
}

const std::map<std::string, std::vector<std::string>> manifest_routes = {
    {"thin_numbers", {"converge", "--experiment", "thin_numbers"}},
    {"hermite_clt", {"converge", "--experiment", "hermite_clt"}},
    {"pt_converge", {"converge", "--experiment", "pt_converge"}},
    {"hermite_revisited", {"converge", "--experiment", "hermite_revisited"}},
    {"inar1", {"converge", "--experiment", "inar1"}},
    {"dispersion_limit", {"converge", "--experiment", "dispersion_limit"}},
    {"pmf", {"pmf"}},
    {"report", {"report"}},
    {"sample", {"sample"}},
    {"atlas", {"atlas"}},
    {"mv_classify", {"mv", "classify"}},
    {"mv_zi", {"mv", "zi"}},
    {"mv_sample", {"mv", "sample"}},
    {"mv_thin_numbers", {"mv", "thin-numbers"}},
};

void cmd_manifest(Context &ctx, const std::vector<std::string> &tokens, std::ostream &out)
{
    if (tokens.size() != 1)
        usage("manifest takes exactly one path");
    const std::string path = tokens.front();
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::schema, path + ": cannot open manifest");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto schema = [&](std::size_t line, const std::string &msg) {
        fail(ErrorKind::schema, path + ":" + std::to_string(line) + ": " + msg);
    };
    Json j;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        j = Json{{"experiments", Json::array()}};
    } else {
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error &e) {
            const auto upto = std::min<std::size_t>(e.byte, text.size());
            schema(1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n')),
                   "invalid JSON");
        }
    }
    if (!j.is_object() || !j.contains("experiments") || !j["experiments"].is_array())
        schema(1, "expected an object with an \"experiments\" array");
    for (const auto &[key, value] : j.items())
        if (key != "experiments" && key != "seed")
            schema(1, "unknown top-level key '" + key + "'");
    std::uint64_t seed = ctx.seed;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            schema(1, "\"seed\" must be a non-negative integer");
        seed = j["seed"].get<std::uint64_t>();
    }

    const auto lines = object_lines(text, 2);
    const std::filesystem::path dir = ctx.out_path.value_or(".");
    std::filesystem::create_directories(dir);

    struct Job {
        std::string id, experiment;
        std::vector<std::string> tokens;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    std::set<std::string> ids;
    const auto &list = j["experiments"];
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::size_t line = i < lines.size() ? lines[i] : 1;
        const auto &e = list[i];
        if (!e.is_object())
            schema(line, "experiment entries must be objects");
        if (!e.contains("id") || !e["id"].is_string() || e["id"].get<std::string>().empty())
            schema(line, "every experiment needs a non-empty string \"id\"");
        const auto id = e["id"].get<std::string>();
        if (id.find_first_of("/\\") != std::string::npos || id == "." || id == ".." || id == "summary")
            schema(line, "id '" + id + "' cannot be used as a file name");
        if (!ids.insert(id).second)
            schema(line, "duplicate experiment id '" + id + "'");
        if (!e.contains("experiment") || !e["experiment"].is_string())
            schema(line, "experiment '" + id + "' needs a string \"experiment\"");
        const auto name = e["experiment"].get<std::string>();
        auto route = manifest_routes.find(name);
        if (route == manifest_routes.end())
            schema(line, "unknown experiment '" + name + "'");
        Job job{id, name, route->second, seed};
        for (const auto &[key, value] : e.items()) {
            if (key == "id" || key == "experiment")
                continue;
            if (key == "seed") {
                if (!value.is_number_unsigned())
                    schema(line, "\"seed\" must be a non-negative integer");
                job.seed = value.get<std::uint64_t>();
                continue;
            }
            std::string v;
            if (value.is_string()) {
                v = value.get<std::string>();
            } else if (value.is_number()) {
                v = value.is_number_float() ? format_double(value.get<double>()) : value.dump();
            } else if (value.is_array() && !value.empty()) {
                for (const auto &x : value) {
                    if (!x.is_number())
                        schema(line, "'" + key + "' must hold numbers only");
                    v += (v.empty() ? "" : ",") + (x.is_number_float() ? format_double(x.get<double>()) : x.dump());
                }
            } else {
                schema(line, "'" + key + "' must be a string, a number or a non-empty array of numbers");
            }
            job.tokens.push_back("--" + key);
            job.tokens.push_back(v);
        }
        jobs.push_back(std::move(job));
    }

    Json summary = Json::array();
    for (const auto &job : jobs) {
        Context sub;
        sub.seed = job.seed;
        sub.trunc = ctx.trunc;
        sub.tail_tol = ctx.tail_tol;
        std::ostringstream body;
        dispatch(sub, job.tokens, body);
        const auto file = job.id + ".csv";
        std::ofstream f(dir / file, std::ios::binary);
        f << body.str();
        if (!f)
            fail(ErrorKind::schema, (dir / file).string() + ": cannot write");
        Json entry{{"id", job.id}, {"experiment", job.experiment}, {"file", file}, {"seed", job.seed}};
        if (sub.last_run) {
            const auto &r = *sub.last_run;
            const double s = r.slope();
            entry["slope"] = std::isfinite(s) ? Json(s) : Json(nullptr);
            entry["final_tv"] = r.tv.empty() ? Json(nullptr) : Json(r.tv.back());
            entry["strictly_decreasing"] = r.strictly_decreasing();
        }
        summary.push_back(entry);
    }
    const auto text_out = Json{{"experiments", summary}}.dump(2) + "\n";
    std::ofstream sf(dir / "summary.json", std::ios::binary);
    sf << text_out;
    if (!sf)
        fail(ErrorKind::schema, (dir / "summary.json").string() + ": cannot write");
    out << text_out;
}

void dispatch(Context &ctx, const std::vector<std::string> &tokens, std::ostream &out)
{
    if (tokens.empty())
        usage("missing subcommand");
    const auto &sub = tokens.front();
    std::vector<std::string> rest(tokens.begin() + 1, tokens.end());
    if (sub == "op")
        return cmd_op(ctx, rest, out);
    if (sub == "mv")
        return cmd_mv(ctx, rest, out);
    if (sub == "manifest")
        return cmd_manifest(ctx, rest, out);
    Args args(rest);
    if (sub == "pmf")
        return cmd_pmf(ctx, args, out);
    if (sub == "sample")
        return cmd_sample(ctx, args, out);
    if (sub == "report")
        return cmd_report(ctx, args, out);
    if (sub == "converge")
        return cmd_converge(ctx, args, out);
    if (sub == "atlas")
        return cmd_atlas(ctx, args, out);
    usage("unknown subcommand '" + sub + "'");
}

// Pulls the global options out of argv, wherever they appear.
std::vector<std::string> take_globals(Context &ctx, const std::vector<std::string> &args)
{
    if (const char *env = std::getenv("FDM_TRUNC"); env && *env)
        ctx.trunc = parse_count("FDM_TRUNC", env);
    std::vector<std::string> rest;
    const std::set<std::string> globals{"--out", "--format", "--seed", "--trunc", "--tail-tol"};
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!globals.count(args[i])) {
            rest.push_back(args[i]);
            // A flag's value is never itself a global option.
            if (args[i].rfind("--", 0) == 0 && i + 1 < args.size())
                rest.push_back(args[++i]);
            continue;
        }
        if (i + 1 >= args.size())
            usage(args[i] + " needs a value");
        const auto &flag = args[i];
        const auto &v = args[++i];
        if (flag == "--out")
            ctx.out_path = v;
        else if (flag == "--format") {
            if (v != "csv" && v != "json")
                usage("--format must be csv or json");
            ctx.format = v;
        } else if (flag == "--seed")
            ctx.seed = parse_count("seed", v);
        else if (flag == "--trunc")
            ctx.trunc = parse_count("trunc", v);
        else
            ctx.tail_tol = parse_double("tail-tol", v);
    }
    if (ctx.trunc == 0)
        usage("truncation must be positive");
    return rest;
}

} // namespace

std::string help_text()
{
    return "usage: fdm <subcommand> [options]\n"
           "  pmf      --family NAME --PARAM VALUE ... [--n N]\n"
           "  sample   --family NAME --PARAM VALUE ... --n DRAWS\n"
           "  report   --family NAME --PARAM VALUE ...\n"
           "  op       --family NAME ... OPERATOR [--ARG V] ... [pmf --n N | report | sample --n D]\n"
           "           operators: dilate --c, tilt --theta, mtransform --a, translate --mu,\n"
           "           subtract --mu, geomthin --c, reflect\n"
           "  converge --experiment thin_numbers|hermite_clt|pt_converge|hermite_revisited|\n"
           "                        inar1|dispersion_limit ...\n"
           "  mv       classify|zi|sample|thin-numbers --model NAME ...\n"
           "  atlas\n"
           "  manifest PATH [--out DIR]\n"
           "global: [--out PATH] [--format csv|json] [--seed U64] [--trunc N] [--tail-tol X]\n"
           "family parameters clashing with a command flag take a param- prefix, e.g. --param-n 3\n";
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    if (args.empty() || args.front() == "help" || args.front() == "--help" || args.front() == "-h") {
        (args.empty() ? err : out) << help_text();
        return args.empty() ? 2 : 0;
    }
    try {
        Context ctx;
        auto tokens = take_globals(ctx, args);
        if (ctx.out_path && !tokens.empty() && tokens.front() != "manifest") {
            std::ostringstream buf;
            dispatch(ctx, tokens, buf);
            std::ofstream f(*ctx.out_path, std::ios::binary);
            f << buf.str();
            if (!f)
                fail(ErrorKind::schema, *ctx.out_path + ": cannot write");
        } else {
            dispatch(ctx, tokens, out);
        }
        return 0;
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::usage) {
            err << "usage error: " << e.what() << '\n' << help_text();
            return 2;
        }
        err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        err << "error: internal: " << e.what() << '\n';
        return 1;
    }
}

} // namespace fdm::cli
