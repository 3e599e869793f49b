#include "fdm/multivariate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "fdm/error.hpp"
#include "fdm/series.hpp"
#include "json.hpp"

namespace fdm {

namespace {

double scale_of(const Matrix &S)
{
    return 1.0 + (S.size() ? S.norm() : 0.0);
}

void check_symmetric(const Matrix &S, const char *what)
{
    if (S.rows() != S.cols())
        fail(ErrorKind::parameter, std::string(what) + ": matrix must be square");
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale_of(S))
        fail(ErrorKind::asymmetric, std::string(what) + ": matrix is not symmetric");
}

void check_coefficients(const Vector &c, Eigen::Index k, const char *what)
{
    if (c.size() != k)
        fail(ErrorKind::parameter, std::string(what) + ": coefficient vector has wrong length");
    for (Eigen::Index i = 0; i < k; ++i)
        if (!(c[i] >= 0.0) || !std::isfinite(c[i]))
            fail(ErrorKind::parameter, std::string(what) + ": coefficients must be non-negative");
}

std::vector<double> binomial_weights(std::size_t x, double c)
{
    std::vector<double> w(x + 1, 0.0);
    if (c >= 1.0) {
        w[x] = 1.0;
        return w;
    }
    const double lc = std::log(c), l1c = std::log1p(-c);
    const double lx = std::lgamma(static_cast<double>(x) + 1.0);
    for (std::size_t y = 0; y <= x; ++y) {
        const double yy = static_cast<double>(y), xy = static_cast<double>(x - y);
        w[y] = std::exp(lx - std::lgamma(yy + 1.0) - std::lgamma(xy + 1.0) + yy * lc + xy * l1c);
    }
    return w;
}

void refresh_tail(MvPmf &m)
{
    m.set_tail_bound(std::max(0.0, 1.0 - m.total()));
}

} // namespace

void validate(const MvDispersion &d)
{
    if (d.S.rows() != d.mean.size())
        fail(ErrorKind::parameter, "dispersion: matrix and mean sizes differ");
    check_symmetric(d.S, "dispersion");
    const double tol = 1e-12 * scale_of(d.S);
    for (Eigen::Index i = 0; i < d.mean.size(); ++i) {
        if (!(d.mean[i] >= 0.0))
            fail(ErrorKind::parameter, "dispersion: mean entries must be non-negative");
        if (d.S(i, i) < -d.mean[i] - tol)
            fail(ErrorKind::parameter, "dispersion: S_ii below -E(X_i) is impossible");
    }
}

std::string_view to_string(DispersionClass c)
{
    switch (c) {
    case DispersionClass::equi: return "equi";
    case DispersionClass::over: return "over";
    case DispersionClass::under: return "under";
    case DispersionClass::indefinite: return "indefinite";
    }
    return "unknown";
}

DispersionClass classify(const MvDispersion &d)
{
    validate(d);
    if (d.S.size() == 0)
        return DispersionClass::equi;
    const double tol = 1e-10 * scale_of(d.S);
    Eigen::SelfAdjointEigenSolver<Matrix> es(d.S, Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues();
    const bool pos = (ev.array() > tol).any();
    const bool neg = (ev.array() < -tol).any();
    if (pos && neg)
        return DispersionClass::indefinite;
    if (pos)
        return DispersionClass::over;
    if (neg)
        return DispersionClass::under;
    return DispersionClass::equi;
}

Combination dilate_combination(const MvDispersion &d, const Vector &c)
{
    validate(d);
    check_coefficients(c, d.mean.size(), "dilate combination");
    Combination r;
    r.mean = c.dot(d.mean);
    r.dispersion = c.dot(d.S * c);
    r.determinant = d.S.size() ? d.S.determinant() : 1.0;
    const double k = static_cast<double>(d.S.rows());
    r.singular = std::fabs(r.determinant) <= 1e-10 * std::pow(scale_of(d.S), k);
    return r;
}

MvDispersion dilate_matrix(const MvDispersion &d, const Matrix &A)
{
    validate(d);
    if (A.cols() != d.mean.size())
        fail(ErrorKind::parameter, "dilate matrix: column count must equal the dimension");
    if ((A.array() < 0.0).any())
        fail(ErrorKind::parameter, "dilate matrix: entries must be non-negative");
    return {A * d.mean, A * d.S * A.transpose()};
}

MvFcgf product_poisson(const Vector &mu)
{
    if ((mu.array() < 0.0).any())
        fail(ErrorKind::parameter, "product poisson: means must be non-negative");
    const auto k = mu.size();
    return {[mu](const Vector &t) { return mu.dot(t); }, {mu, Matrix::Zero(k, k)}};
}

MvFcgf bivariate_poisson(double mu1, double mu2, double mu3)
{
    if (!(mu1 >= 0 && mu2 >= 0 && mu3 >= 0))
        fail(ErrorKind::parameter, "bivariate poisson: means must be non-negative");
    Vector m(2);
    m << mu1 + mu2, mu1 + mu3;
    Matrix S(2, 2);
    S << 0.0, mu1, mu1, 0.0;
    auto eval = [=](const Vector &t) {
        return mu1 * (t[0] + t[1] + t[0] * t[1]) + mu2 * t[0] + mu3 * t[1];
    };
    return {eval, {m, S}};
}

MvFcgf multinomial(std::size_t n, const Vector &q)
{
    if ((q.array() < 0.0).any() || q.sum() > 1.0 + 1e-12)
        fail(ErrorKind::parameter, "multinomial: cell probabilities must be non-negative with sum <= 1");
    const double nn = static_cast<double>(n);
    auto eval = [=](const Vector &t) {
        const double arg = 1.0 + q.dot(t);
        return arg > 0.0 ? nn * std::log(arg) : (arg == 0.0 ? -infinity : std::nan(""));
    };
    return {eval, {nn * q, -nn * q * q.transpose()}};
}

MvFcgf mv_hermite(const Vector &mu, const Matrix &Sigma)
{
    if (Sigma.rows() != mu.size())
        fail(ErrorKind::parameter, "multivariate hermite: sizes differ");
    check_symmetric(Sigma, "multivariate hermite");
    if ((Sigma.array() < 0.0).any())
        fail(ErrorKind::parameter, "multivariate hermite: Sigma must be non-negative");
    Vector singles = mu - Sigma.rowwise().sum();
    if ((singles.array() < -1e-12 * scale_of(Sigma)).any())
        fail(ErrorKind::parameter, "multivariate hermite: needs mu >= Sigma 1");
    auto eval = [=](const Vector &t) { return mu.dot(t) + 0.5 * t.dot(Sigma * t); };
    return {eval, {mu, Sigma}};
}

MvFcgf dilate_matrix(const MvFcgf &f, const Matrix &A)
{
    auto moments = dilate_matrix(f.moments, A);
    auto inner = f.eval;
    Matrix At = A.transpose();
    return {[inner, At](const Vector &t) { return inner(At * t); }, moments};
}

MvDispersion numeric_moments(const MvFcgf &f, double h)
{
    const auto k = static_cast<Eigen::Index>(f.dim());
    Vector g(k);
    Matrix H(k, k);
    const Vector zero = Vector::Zero(k);
    const double f0 = f.eval(zero);
    for (Eigen::Index i = 0; i < k; ++i) {
        Vector e = zero;
        e[i] = h;
        const double fp = f.eval(e), fm = f.eval(-e);
        g[i] = (fp - fm) / (2 * h);
        H(i, i) = (fp - 2 * f0 + fm) / (h * h);
        for (Eigen::Index j = 0; j < i; ++j) {
            Vector a = zero;
            a[i] = h;
            a[j] = h;
            Vector b = a;
            b[j] = -h;
            const double v = (f.eval(a) - f.eval(b) - f.eval(-b) + f.eval(-a)) / (4 * h * h);
            H(i, j) = H(j, i) = v;
        }
    }
    return {g, H};
}

double mv_zero_inflation(const MvFcgf &f, const Vector &c)
{
    const auto k = static_cast<Eigen::Index>(f.dim());
    const Vector dir = c.size() == 0 ? Vector::Ones(k) : c;
    check_coefficients(dir, k, "zero inflation");
    const double denom = dir.dot(f.moments.mean);
    if (!(denom > 0.0))
        fail(ErrorKind::domain, "zero inflation: c . E(X) must be positive");
    const double value = f.eval(-dir);
    if (!std::isfinite(value))
        fail(ErrorKind::domain, "zero inflation: -c lies outside the FCGF domain");
    return 1.0 + value / denom;
}

void validate(const MvPtParams &params)
{
    if (!(params.p >= 1.0) || !std::isfinite(params.p))
        fail(ErrorKind::parameter, "multivariate PT: p must be at least 1");
    const auto k = params.mu.size();
    if (k == 0 || params.sigma.rows() != k)
        fail(ErrorKind::parameter, "multivariate PT: mu and Sigma sizes differ");
    if (!(params.mu.array() > 0.0).all())
        fail(ErrorKind::parameter, "multivariate PT: mu must be positive");
    check_symmetric(params.sigma, "multivariate PT");
    Eigen::LLT<Matrix> llt(params.sigma);
    if (llt.info() != Eigen::Success)
        fail(ErrorKind::parameter, "multivariate PT: Sigma must be positive definite");
}

MvDispersion mv_pt_dispersion(const MvPtParams &params)
{
    validate(params);
    Vector d = params.mu.array().pow(params.p / 2);
    return {params.mu, d.asDiagonal() * params.sigma * d.asDiagonal()};
}

MvPtParams mv_pt_dilate(const MvPtParams &params, const Vector &c)
{
    validate(params);
    check_coefficients(c, params.mu.size(), "multivariate PT dilation");
    if (!(c.array() > 0.0).all())
        fail(ErrorKind::parameter, "multivariate PT dilation: coefficients must be positive");
    Vector s = c.array().pow(1.0 - params.p / 2);
    return {params.p, c.cwiseProduct(params.mu), s.asDiagonal() * params.sigma * s.asDiagonal()};
}

CommonComponents common_components(const MvPtParams &params)
{
    const auto S = mv_pt_dispersion(params).S;
    const auto k = params.mu.size();
    CommonComponents cc;
    cc.ratio = S.diagonal().cwiseQuotient(params.mu);
    cc.shared_mean = Matrix::Zero(k, k);
    cc.own_mean = params.mu;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            if (i == j)
                continue;
            if (S(i, j) < 0.0)
                fail(ErrorKind::infeasible, "multivariate PT: negative covariance between coordinates " +
                                                std::to_string(i) + " and " + std::to_string(j) +
                                                " cannot come from shared components");
            cc.shared_mean(i, j) = S(i, j) / (cc.ratio[i] * cc.ratio[j]);
            cc.own_mean[i] -= S(i, j) / cc.ratio[j];
        }
    for (Eigen::Index i = 0; i < k; ++i)
        if (!(cc.own_mean[i] > 1e-12 * params.mu[i]))
            fail(ErrorKind::infeasible, "multivariate PT: covariances of coordinate " + std::to_string(i) +
                                            " exceed what non-negative shared components allow");
    return cc;
}

std::vector<std::vector<std::int64_t>> sample_mv_pt(const MvPtParams &params, std::size_t n, Rng &rng)
{
    const auto cc = common_components(params);
    const auto k = params.mu.size();
    const double p = params.p;
    std::vector<TweedieSampler> own;
    for (Eigen::Index i = 0; i < k; ++i)
        own.emplace_back(TweedieParams{p, cc.own_mean[i], cc.ratio[i] * std::pow(cc.own_mean[i], 1 - p)});
    struct Link {
        Eigen::Index i, j;
        TweedieSampler s;
    };
    std::vector<Link> links;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double m = cc.shared_mean(i, j);
            if (m > 0.0)
                links.push_back({i, j, TweedieSampler({p, m, std::pow(m, 1 - p)})});
        }
    std::vector<std::vector<std::int64_t>> out(n, std::vector<std::int64_t>(static_cast<std::size_t>(k)));
    std::vector<double> y(static_cast<std::size_t>(k));
    for (auto &row : out) {
        for (Eigen::Index i = 0; i < k; ++i)
            y[i] = own[i](rng);
        for (auto &l : links) {
            const double w = l.s(rng);
            y[l.i] += cc.ratio[l.i] * w;
            y[l.j] += cc.ratio[l.j] * w;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
            if (y[i] > 0.0) {
                std::poisson_distribution<std::int64_t> po(y[i]);
                row[i] = po(rng);
            } else {
                row[i] = 0;
            }
        }
    }
    return out;
}

void check_budget(std::size_t dim)
{
    if (dim == 0)
        fail(ErrorKind::parameter, "multivariate table: dimension must be positive");
    if (dim > 3)
        fail(ErrorKind::budget, "multivariate table: exact lattices are limited to three axes, got " +
                                    std::to_string(dim));
}

MvPmf::MvPmf(std::size_t dim, std::size_t axis) : dim_(dim), axis_(axis)
{
    check_budget(dim);
    if (axis == 0)
        fail(ErrorKind::parameter, "multivariate table: axis budget must be positive");
    std::size_t cells = 1;
    for (std::size_t i = 0; i < dim; ++i)
        cells *= axis + 1;
    probs_.assign(cells, 0.0);
    tail_bound_ = 1.0;
}

MvPmf::MvPmf(std::size_t dim, std::size_t axis, std::vector<double> probs, double tail_bound)
    : MvPmf(dim, axis)
{
    if (probs.size() != probs_.size())
        fail(ErrorKind::parameter, "multivariate table: wrong number of cells");
    probs_ = std::move(probs);
    tail_bound_ = tail_bound;
}

double &MvPmf::at(const std::vector<std::size_t> &idx)
{
    std::size_t flat = 0;
    for (auto i : idx)
        flat = flat * (axis_ + 1) + i;
    return probs_[flat];
}

double MvPmf::at(const std::vector<std::size_t> &idx) const
{
    return const_cast<MvPmf *>(this)->at(idx);
}

std::vector<std::size_t> MvPmf::index(std::size_t flat) const
{
    std::vector<std::size_t> idx(dim_);
    for (std::size_t d = dim_; d-- > 0;) {
        idx[d] = flat % (axis_ + 1);
        flat /= axis_ + 1;
    }
    return idx;
}

double MvPmf::total() const
{
    double s = 0.0;
    for (double p : probs_)
        s += p;
    return s;
}

Vector MvPmf::mean() const
{
    Vector m = Vector::Zero(static_cast<Eigen::Index>(dim_));
    for (std::size_t f = 0; f < probs_.size(); ++f) {
        if (probs_[f] == 0.0)
            continue;
        auto idx = index(f);
        for (std::size_t d = 0; d < dim_; ++d)
            m[static_cast<Eigen::Index>(d)] += probs_[f] * static_cast<double>(idx[d]);
    }
    return m;
}

PmfTable MvPmf::marginal(std::size_t i) const
{
    std::vector<double> p(axis_ + 1, 0.0);
    for (std::size_t f = 0; f < probs_.size(); ++f)
        p[index(f)[i]] += probs_[f];
    return PmfTable(p, tail_bound_, default_tail_tol);
}

MvPmf product_poisson_pmf(const Vector &mu, std::size_t axis)
{
    const auto dim = static_cast<std::size_t>(mu.size());
    MvPmf out(dim, axis);
    std::vector<PmfTable> tables;
    for (std::size_t d = 0; d < dim; ++d)
        tables.push_back(poisson_table(mu[static_cast<Eigen::Index>(d)], axis));
    for (std::size_t f = 0; f < out.cells(); ++f) {
        auto idx = out.index(f);
        double p = 1.0;
        for (std::size_t d = 0; d < dim; ++d)
            p *= tables[d][idx[d]];
        out.probs()[f] = p;
    }
    refresh_tail(out);
    return out;
}

MvPmf common_shock_pmf(const std::vector<Shock> &shocks, std::size_t dim, std::size_t axis)
{
    MvPmf out(dim, axis);
    out.probs()[0] = 1.0;
    out.set_tail_bound(0.0);
    for (const auto &s : shocks) {
        if (s.jump.size() != dim)
            fail(ErrorKind::parameter, "common shock: jump has wrong dimension");
        if (!(s.rate >= 0.0))
            fail(ErrorKind::parameter, "common shock: rates must be non-negative");
        const std::size_t top = *std::max_element(s.jump.begin(), s.jump.end());
        if (s.rate == 0.0 || top == 0)
            continue;
        const std::size_t steps = axis / top;
        auto counts = poisson_table(s.rate, steps);
        MvPmf shock(dim, axis);
        std::vector<std::size_t> idx(dim);
        for (std::size_t m = 0; m <= steps; ++m) {
            for (std::size_t d = 0; d < dim; ++d)
                idx[d] = m * s.jump[d];
            shock.at(idx) = counts[m];
        }
        refresh_tail(shock);
        out = mv_convolve(out, shock);
    }
    return out;
}

MvPmf mv_hermite_pmf(const Vector &mu, const Matrix &Sigma, std::size_t axis)
{
    mv_hermite(mu, Sigma);
    const auto dim = static_cast<std::size_t>(mu.size());
    std::vector<Shock> shocks;
    for (std::size_t i = 0; i < dim; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<std::size_t> one(dim, 0), two(dim, 0);
        one[i] = 1;
        two[i] = 2;
        shocks.push_back({one, std::max(0.0, mu[ii] - Sigma.row(ii).sum())});
        shocks.push_back({two, Sigma(ii, ii) / 2});
        for (std::size_t j = i + 1; j < dim; ++j) {
            std::vector<std::size_t> pair(dim, 0);
            pair[i] = pair[j] = 1;
            shocks.push_back({pair, Sigma(ii, static_cast<Eigen::Index>(j))});
        }
    }
    return common_shock_pmf(shocks, dim, axis);
}

MvPmf mv_convolve(const MvPmf &a, const MvPmf &b)
{
    if (a.dim() != b.dim() || a.axis() != b.axis())
        fail(ErrorKind::parameter, "multivariate convolution: tables must share shape");
    const std::size_t dim = a.dim(), axis = a.axis();
    struct Cell {
        std::vector<std::size_t> idx;
        double p;
    };
    auto nonzero = [](const MvPmf &m) {
        std::vector<Cell> cells;
        for (std::size_t f = 0; f < m.cells(); ++f)
            if (m.probs()[f] != 0.0)
                cells.push_back({m.index(f), m.probs()[f]});
        return cells;
    };
    auto ca = nonzero(a), cb = nonzero(b);
    MvPmf out(dim, axis);
    std::vector<std::size_t> idx(dim);
    for (const auto &x : ca)
        for (const auto &y : cb) {
            bool inside = true;
            for (std::size_t d = 0; d < dim && inside; ++d) {
                idx[d] = x.idx[d] + y.idx[d];
                inside = idx[d] <= axis;
            }
            if (inside)
                out.at(idx) += x.p * y.p;
        }
    refresh_tail(out);
    return out;
}

MvPmf mv_convolve_power(const MvPmf &a, std::size_t n)
{
    if (n == 0)
        fail(ErrorKind::parameter, "multivariate convolution power: n must be positive");
    MvPmf result = a, base = a;
    bool have = false;
    while (n > 0) {
        if (n & 1U) {
            result = have ? mv_convolve(result, base) : base;
            have = true;
        }
        n >>= 1U;
        if (n > 0)
            base = mv_convolve(base, base);
    }
    return result;
}

MvPmf mv_thin(const MvPmf &a, const Vector &c)
{
    check_coefficients(c, static_cast<Eigen::Index>(a.dim()), "multivariate thinning");
    const std::size_t dim = a.dim(), axis = a.axis(), side = axis + 1;
    MvPmf out = a;
    std::size_t stride = 1;
    for (std::size_t d = dim; d-- > 0;) {
        const double cd = c[static_cast<Eigen::Index>(d)];
        if (!(cd > 0.0) || cd > 1.0)
            fail(ErrorKind::parameter, "multivariate thinning: coefficients must lie in (0, 1]");
        if (cd < 1.0) {
            std::vector<std::vector<double>> w(side);
            for (std::size_t x = 0; x < side; ++x)
                w[x] = binomial_weights(x, cd);
            auto &p = out.probs();
            std::vector<double> line(side), next(side);
            for (std::size_t f = 0; f < p.size(); ++f) {
                if ((f / stride) % side != 0)
                    continue;
                for (std::size_t x = 0; x < side; ++x)
                    line[x] = p[f + x * stride];
                std::fill(next.begin(), next.end(), 0.0);
                for (std::size_t x = 0; x < side; ++x)
                    if (line[x] != 0.0)
                        for (std::size_t y = 0; y <= x; ++y)
                            next[y] += line[x] * w[x][y];
                for (std::size_t y = 0; y < side; ++y)
                    p[f + y * stride] = next[y];
            }
        }
        stride *= side;
    }
    refresh_tail(out);
    return out;
}

double mv_tv_distance(const MvPmf &a, const MvPmf &b)
{
    if (a.dim() != b.dim() || a.axis() != b.axis())
        fail(ErrorKind::parameter, "multivariate TV: tables must share shape");
    double s = 0.0;
    for (std::size_t f = 0; f < a.cells(); ++f)
        s += std::fabs(a.probs()[f] - b.probs()[f]);
    return std::clamp(0.5 * s + 0.5 * (a.tail_bound() + b.tail_bound()), 0.0, 1.0);
}

ConvergenceRun mv_thin_numbers(const MvPmf &base, const Vector &mu, const std::vector<std::size_t> &n_grid)
{
    check_budget(base.dim());
    if (static_cast<std::size_t>(mu.size()) != base.dim())
        fail(ErrorKind::parameter, "multivariate thin numbers: mean vector has wrong length");
    if (base.tail_bound() > default_tail_tol)
        fail(ErrorKind::incomplete_table, "multivariate thin numbers: base table misses " +
                                              format_double(base.tail_bound()) + " of its mass");
    if (n_grid.empty())
        fail(ErrorKind::parameter, "convergence: empty grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            fail(ErrorKind::parameter, "convergence: grid must be strictly increasing");
    const auto target = product_poisson_pmf(mu, base.axis());
    ConvergenceRun run;
    run.experiment = "mv_thin_numbers";
    run.target = "product_poisson";
    for (auto n : n_grid) {
        if (n == 0)
            fail(ErrorKind::parameter, "convergence: n must be positive");
        const Vector c = Vector::Constant(mu.size(), 1.0 / static_cast<double>(n));
        const auto avg = mv_convolve_power(mv_thin(base, c), n);
        run.control.push_back(static_cast<double>(n));
        run.tv.push_back(mv_tv_distance(avg, target));
        run.bound.push_back(std::min(1.0, 0.5 * (avg.tail_bound() + target.tail_bound())));
    }
    return run;
}

MvFcgf mv_hermite_composite(const MvFcgf &base, const Vector &mu, double n)
{
    if (!(n > 0.0))
        fail(ErrorKind::parameter, "hermite composite: n must be positive");
    if (static_cast<std::size_t>(mu.size()) != base.dim())
        fail(ErrorKind::parameter, "hermite composite: mean vector has wrong length");
    const double rn = std::sqrt(n);
    const Vector drift = rn * base.moments.mean - mu;
    auto inner = base.eval;
    auto eval = [=](const Vector &t) { return n * inner(t / rn) - drift.dot(t); };
    return {eval, {mu, base.moments.S}};
}

std::string to_json(const MvDispersion &d)
{
    nlohmann::ordered_json j;
    j["mean"] = std::vector<double>(d.mean.data(), d.mean.data() + d.mean.size());
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < d.S.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(d.S.cols()));
        for (Eigen::Index k = 0; k < d.S.cols(); ++k)
            row[static_cast<std::size_t>(k)] = d.S(i, k);
        rows.push_back(row);
    }
    j["dispersion_matrix"] = rows;
    j["classification"] = std::string(to_string(classify(d)));
    return j.dump();
}

void write_csv(std::ostream &os, const MvDispersion &d)
{
    os << "kind,i,j,value\n";
    for (Eigen::Index i = 0; i < d.mean.size(); ++i)
        os << "mean," << i << ",," << format_double(d.mean[i]) << '\n';
    for (Eigen::Index i = 0; i < d.S.rows(); ++i)
        for (Eigen::Index k = 0; k < d.S.cols(); ++k)
            os << "dispersion," << i << ',' << k << ',' << format_double(d.S(i, k)) << '\n';
}

} // namespace fdm
