#ifndef FDM_MULTIVARIATE_HPP
#define FDM_MULTIVARIATE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fdm/asymptotics.hpp"
#include "fdm/tweedie.hpp"

namespace fdm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Mean vector and dispersion matrix S = Cov(X) - diag(E(X)).
struct MvDispersion {
    Vector mean;
    Matrix S;
};

// Checks symmetry (1e-12 relative) and S_ii >= -mean_i.
void validate(const MvDispersion &d);

enum class DispersionClass { equi, over, under, indefinite };
std::string_view to_string(DispersionClass c);

// Eigenvalues with |lambda| < 1e-10 (1 + ||S||) count as zero.
DispersionClass classify(const MvDispersion &d);

struct Combination {
    double mean;
    double dispersion;
    double determinant;
    // |det S| within tolerance. A zero quadratic form forces this only for
    // semidefinite S.
    bool singular;
};

// c . X for a coefficient row c >= 0.
Combination dilate_combination(const MvDispersion &d, const Vector &c);

// A . X for a matrix A >= 0: mean A m, dispersion A S A^T.
MvDispersion dilate_matrix(const MvDispersion &d, const Matrix &A);

// Multivariate FCGF C(t) = log E[prod (1 + t_i)^{X_i}] with closed-form
// first two derivatives at zero.
struct MvFcgf {
    std::function<double(const Vector &)> eval;
    MvDispersion moments;
    std::size_t dim() const { return static_cast<std::size_t>(moments.mean.size()); }
};

MvFcgf product_poisson(const Vector &mu);
// X1 = U1 + U2, X2 = U1 + U3 with U_i ~ Po(mu_i) independent.
MvFcgf bivariate_poisson(double mu1, double mu2, double mu3);
// Mu(q, n): n log(1 + q^T t).
MvFcgf multinomial(std::size_t n, const Vector &q);
// mu^T t + t^T Sigma t / 2; needs Sigma >= 0 elementwise and mu >= Sigma 1.
MvFcgf mv_hermite(const Vector &mu, const Matrix &Sigma);
// t -> C(A^T t)
MvFcgf dilate_matrix(const MvFcgf &f, const Matrix &A);

// Central-difference gradient and Hessian at zero.
MvDispersion numeric_moments(const MvFcgf &f, double h = 1e-4);

// 1 + C(-c) / (c . C'(0)); the all-ones direction when c is empty.
double mv_zero_inflation(const MvFcgf &f, const Vector &c = {});

// PT_p(mu, Sigma): X | Y ~ independent Po(Y_i), Cov(Y) = [mu]^{p/2} Sigma [mu]^{p/2}.
struct MvPtParams {
    double p = 2.0;
    Vector mu;
    Matrix sigma;
};
void validate(const MvPtParams &params);
MvDispersion mv_pt_dispersion(const MvPtParams &params);
// [c] . PT_p(mu, Sigma) = PT_p([c] mu, [c]^{1-p/2} Sigma [c]^{1-p/2})
MvPtParams mv_pt_dilate(const MvPtParams &params, const Vector &c);

// Common-component realization of Y. Shared component W_ij ~ Tw_p(m_ij, m_ij^{1-p})
// enters Y_i scaled by r_i = Var(Y_i) / mu_i, so every summand of Y_i has the
// same variance-to-mean ratio and Y_i is exactly Tw_p(mu_i, sigma_ii). Needs
// cov_ij >= 0 and mu_i > sum_j cov_ij / r_j.
struct CommonComponents {
    Vector ratio;        // r_i
    Vector own_mean;     // mean of Z_i
    Matrix shared_mean;  // m_ij, symmetric with zero diagonal
};
CommonComponents common_components(const MvPtParams &params);

// Rows are draws.
std::vector<std::vector<std::int64_t>> sample_mv_pt(const MvPtParams &params, std::size_t n, Rng &rng);

inline constexpr std::size_t default_axis_budget = 64;

// Joint PMF on {0..N}^k, row-major with the last axis fastest.
class MvPmf {
public:
    MvPmf(std::size_t dim, std::size_t axis);
    MvPmf(std::size_t dim, std::size_t axis, std::vector<double> probs, double tail_bound);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t axis() const noexcept { return axis_; }
    std::size_t cells() const noexcept { return probs_.size(); }
    double tail_bound() const noexcept { return tail_bound_; }
    void set_tail_bound(double b) { tail_bound_ = b; }
    const std::vector<double> &probs() const noexcept { return probs_; }
    std::vector<double> &probs() noexcept { return probs_; }

    double &at(const std::vector<std::size_t> &idx);
    double at(const std::vector<std::size_t> &idx) const;
    std::vector<std::size_t> index(std::size_t flat) const;

    double total() const;
    Vector mean() const;
    PmfTable marginal(std::size_t i) const;

private:
    std::size_t dim_, axis_;
    std::vector<double> probs_;
    double tail_bound_ = 0.0;
};

// Errors with truncation-budget for more than three axes.
void check_budget(std::size_t dim);

MvPmf product_poisson_pmf(const Vector &mu, std::size_t axis = default_axis_budget);
// Sum of independent Poisson shocks, each adding an integer vector.
struct Shock {
    std::vector<std::size_t> jump;
    double rate;
};
MvPmf common_shock_pmf(const std::vector<Shock> &shocks, std::size_t dim, std::size_t axis = default_axis_budget);
MvPmf mv_hermite_pmf(const Vector &mu, const Matrix &Sigma, std::size_t axis = default_axis_budget);

MvPmf mv_convolve(const MvPmf &a, const MvPmf &b);
MvPmf mv_convolve_power(const MvPmf &a, std::size_t n);
// Independent binomial thinning of each coordinate by c_i in (0, 1].
MvPmf mv_thin(const MvPmf &a, const Vector &c);
double mv_tv_distance(const MvPmf &a, const MvPmf &b);

// (n I)^{-1} . (X_1 + ... + X_n) against independent Po(mu_i).
ConvergenceRun mv_thin_numbers(const MvPmf &base, const Vector &mu, const std::vector<std::size_t> &n_grid);

// n C(t / n^{1/2}) - (n^{1/2} m - mu)^T t; tends to the Hermite FCGF with
// mean mu and dispersion S(base).
MvFcgf mv_hermite_composite(const MvFcgf &base, const Vector &mu, double n);

std::string to_json(const MvDispersion &d);
// "kind,i,j,value" rows for the mean vector and the matrix.
void write_csv(std::ostream &os, const MvDispersion &d);

} // namespace fdm

#endif
