#ifndef FDM_TESTS_CATALOG_HPP
#define FDM_TESTS_CATALOG_HPP

#include <string>
#include <vector>

#include "fdm/families.hpp"

// Interior parameter points for every registered family.
inline std::vector<std::pair<std::string, fdm::ParamMap>> catalog()
{
    return {
        {"poisson", {{"mu", 2.0}}},
        {"bernoulli", {{"q", 0.3}}},
        {"binomial", {{"n", 5}, {"mu", 0.4}}},
        {"geometric", {{"mu", 2.0}}},
        {"nb", {{"lambda", 2.0}, {"mu", 1.5}}},
        {"hermite", {{"mu", 2.0}, {"gamma", 1.0}}},
        {"short", {{"mu1", 1.0}, {"mu2", 2.0}, {"phi", 1.0}}},
        {"neyman_a", {{"mu", 2.0}, {"gamma", 1.0}}},
        {"neyman_a_additive", {{"mu", 0.5}, {"lambda", 3.0}}},
        {"poisson_nb", {{"lambda", 1.5}, {"mu", 0.6}, {"k", 2.0}}},
        {"poisson_binomial", {{"lambda", 1.2}, {"mu", 0.5}, {"n", 3}}},
        {"discrete_stable", {{"lambda", 2.0}, {"alpha", 0.5}, {"mu", 1.0}}},
        {"linnik", {{"b", 1.5}, {"scale", 1.0}, {"alpha", 0.5}, {"theta", -0.8}}},
        {"com_poisson", {{"lambda", 2.0}, {"nu", 2.0}}},
        {"com_poisson", {{"lambda", 1.5}, {"nu", 0.5}}},
        {"pt", {{"p", 1.5}, {"mu", 2.0}, {"gamma", 0.5}}},
        {"pt", {{"p", 3.0}, {"mu", 1.0}, {"gamma", 1.0}}},
        {"pt", {{"p", 2.5}, {"mu", 1.5}, {"gamma", 0.7}}},
        {"pt", {{"p", 4.0}, {"mu", 0.8}, {"gamma", 0.4}}},
    };
}

inline std::string label(const std::string &name, const fdm::ParamMap &params)
{
    std::string s = name;
    for (const auto &[k, v] : params)
        s += " " + k + "=" + std::to_string(v);
    return s;
}

#endif
