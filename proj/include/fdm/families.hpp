#ifndef FDM_FAMILIES_HPP
#define FDM_FAMILIES_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fdm/fcgf.hpp"

namespace fdm {

using ParamMap = std::map<std::string, double>;

// A named distribution together with the factorial tilting family it
// generates. Tilts are relative to `fcgf`: the family is
// { tilt(fcgf, theta) : theta in theta_domain }.
struct FamilySpec {
    std::string name;
    ParamMap params;
    AnalyticFcgf fcgf;
    Interval theta_domain;
    Interval mean_domain;
    // Closed-form dispersion function of the tilting family, if known.
    std::function<double(double)> unit_dispersion;

    double param(const std::string &key) const;
};

// Registry by name; see family_names() for the list.
FamilySpec make_family(const std::string &name, const ParamMap &params);
std::vector<std::string> family_names();
// JSON description of the parameters and their constraints.
std::string param_schema_json(const std::string &name);

// The member tilted by theta, with the same underlying family.
FamilySpec tilt_family(const FamilySpec &f, double theta);

// theta with C'(theta) = mu, by safeguarded Newton/bisection to 1e-12.
double solve_mean(const FamilySpec &f, double mu);

// v(mu) = C''(theta(mu)); closed form when available.
double dispersion_function(const FamilySpec &f, double mu);
// Always by root finding, ignoring any closed form.
double numeric_dispersion_function(const FamilySpec &f, double mu);

// mu = (theta / (alpha - 1))^(alpha - 1) and its inverse.
double discrete_stable_mu(double theta, double alpha);
double discrete_stable_theta(double mu, double alpha);

// alpha = 1 + 1/(1 - p); -infinity at p = 1.
double alpha_from_p(double p);
// p = (alpha - 2) / (alpha - 1); 1 at alpha = -infinity.
double p_from_alpha(double alpha);

} // namespace fdm

#endif
