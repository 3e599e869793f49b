#ifndef FDM_FCGF_IMPL_HPP
#define FDM_FCGF_IMPL_HPP

// Implementation interface behind AnalyticFcgf. Only needed by code that adds
// new closed-form blocks.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fdm/fcgf.hpp"
#include "fdm/series.hpp"

namespace fdm::detail {

using ImplPtr = std::shared_ptr<const FcgfImpl>;

class FcgfImpl : public std::enable_shared_from_this<FcgfImpl> {
public:
    virtual ~FcgfImpl() = default;

    virtual double eval(double t) const = 0;
    // Taylor coefficients of C(t0 + tau) in tau, constant term included.
    virtual PowerSeries taylor(double t0, std::size_t order) const = 0;
    virtual Interval analytic() const = 0;
    virtual std::string describe() const = 0;

    virtual std::optional<LatticeShift> lattice_shift() const { return std::nullopt; }

    // Probabilities p_0..p_max_k when they have a closed form that is better
    // conditioned than exponentiating the Taylor series at -1.
    virtual std::optional<std::vector<double>> pmf(std::size_t /*max_k*/) const { return std::nullopt; }

    // Closed-form rewrites. A null result means "wrap generically".
    virtual ImplPtr mobius(double /*alpha*/, double /*beta*/) const { return nullptr; }
    virtual ImplPtr shifted(double /*theta*/) const { return nullptr; }
    virtual ImplPtr affine(double /*scale*/, double /*linear*/) const { return nullptr; }
};

ImplPtr make_mobius(const ImplPtr &inner, double alpha, double beta);
ImplPtr make_shift(const ImplPtr &inner, double theta);
ImplPtr make_affine(const ImplPtr &inner, double scale, double linear);

// Coefficients of f(s(t0 + tau)) - f(s(t0)) style composition: given the Taylor
// coefficients c of f at s(t0), returns those of f(s0 + a tau / (1 + b tau)).
PowerSeries compose_mobius_series(const PowerSeries &c, double a, double b);

} // namespace fdm::detail

#endif
