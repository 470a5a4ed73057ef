#pragma once

#include "uep/exponents.hpp"

namespace uep {

// Generic layered feasibility system shared by the Theorem-2 region test and
// its slack-adjusted converse variant: does phi exist with
//   exponents[i] <= (1 - sum phi_j) D + sum_{j>i} phi_j J(j_rates[j] / phi_j)
//   phi_i >= min_phi[i],  sum phi_j <= 1.
struct LayerSystem {
    std::vector<double> j_rates;
    std::vector<double> min_phi;
    std::vector<double> exponents;
};

// Maximizes the smallest constraint slack over the phi polytope (the slack is
// jointly concave in phi, so nested golden-section search is exact) and
// reports feasibility at tolerance tol.
FeasibilityResult maximize_slack(const JCurve& j, const LayerSystem& sys, double tol);

// Smallest constraint slack of a concrete phi vector (witness re-evaluation).
double system_slack(const JCurve& j, const LayerSystem& sys, const std::vector<double>& phi);

} // namespace uep
