#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uep/channel.hpp"

namespace uep {

// Witness for the single-point exponent j(r): an input letter and an input
// distribution with I(P;W) >= r whose output marginal attains the value.
struct SingleLetterWitness {
    double value = 0.0;
    int letter = 0;
    Distribution input;
    double mutual_info = 0.0;
};

// Two-point time-sharing witness for J(r).
struct TimeSharePlan {
    double tau = 1.0;
    int x1 = 0, x2 = 0;
    Distribution p1, p2;
};

struct JResult {
    double value = 0.0;
    TimeSharePlan plan;
};

struct PhasePlan {
    std::vector<double> phis;
};

struct RateExponentQuery {
    std::vector<double> rates;
    std::vector<double> exponents;
};

struct FeasibilityResult {
    bool feasible = false;
    double margin = 0.0; // max over plans of min constraint slack
    std::optional<PhasePlan> plan;
};

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
    std::optional<TimeSharePlan> time_share;
    std::optional<PhasePlan> phases;
};

struct JOptions {
    int table_points = 2000;     // tabulation grid over [0, C]
    int simplex_resolution = 400; // denominator of the simplex grid for |X| <= 4
    int polish_rounds = 24;
    double rate_slack = 1e-9;    // rates this far above C are clamped
};

// j(r): max over input letter x and input distribution P with I(P;W) >= r of
// KL(q_P || W_x), q_P the output marginal of P. Exhaustive simplex grid with
// local refinement along vertex directions.
SingleLetterWitness j_single(const Channel& w, double rate, const JOptions& opt = {});

// Exponent trade-off curve J(r): the two-point upper concave envelope of
// j(r), tabulated once per channel and interpolated on the upper hull.
// J(r) = D exactly for r <= 0.
class JCurve {
public:
    explicit JCurve(const Channel& w, const JOptions& opt = {});

    const Channel& channel() const { return w_; }
    double capacity() const { return c_; }
    double d_max() const { return d_; }

    double value(double rate) const;
    JResult with_plan(double rate) const;

    // Evaluates a plan's objective and time-shared mutual information.
    double plan_value(const TimeSharePlan& plan) const;
    double plan_rate(const TimeSharePlan& plan) const;

private:
    Channel w_;
    double c_ = 0.0, d_ = 0.0;
    double rate_slack_ = 1e-9;
    std::vector<double> rates_;                 // tabulation abscissae
    std::vector<SingleLetterWitness> table_;    // polished j values per rate
    std::vector<int> hull_;                     // indices of upper-hull vertices

    int hull_segment(double rate) const;
};

// Burnashev reliability function (1 - r/C) D.
double burnashev(const Channel& w, double rate);

// Missed detection exponent E + (1 - E/D) J(R / (1 - E/D)).
// The degenerate (r=0, e=D) point evaluates the second term as exact zero.
double emd(const JCurve& j, double rate, double exponent);

// Optimal first-layer exponent for two layers (closed form):
// E2 + (1 - r1/C - E2/D) J(r2 / (1 - r1/C - E2/D)).
double optimal_e1(const JCurve& j, double r1, double r2, double e2);

// Theorem-2 feasibility: does a time-sharing vector phi exist with
//   E_i <= (1 - sum phi_j) D + sum_{j>i} phi_j J(R_j / phi_j),
//   R_i <= C phi_i, phi_i >= 0, sum phi_j <= 1.
// phi_j J(R_j/phi_j) is exact zero when R_j = phi_j = 0.
FeasibilityResult region_feasible(const JCurve& j, const RateExponentQuery& q,
                                  double tol = 1e-6);

// Largest E1 such that (rates, (E1, E2)) stays feasible, by bisection on
// region_feasible. Cross-validates optimal_e1.
double boundary_e1_by_bisection(const JCurve& j, double r1, double r2, double e2,
                                double tol = 1e-6);

enum class CurveKind {
    JOfRate,        // x = rate, y = J(rate)
    EmdOfRate,      // x = rate, y = E_md(rate, fixed exponent)
    E1Boundary,     // x = second-layer rate, y = optimal E1 via feasibility bisection
    E1OfE2Boundary, // x = second-layer exponent, y = optimal E1, rates fixed
};

struct TraceRequest {
    CurveKind kind = CurveKind::JOfRate;
    double x_min = 0.0;
    double x_max = 0.0; // < x_min (or both zero) means "use the natural domain"
    int n_points = 2;
    double fixed_exponent = 0.0; // EmdOfRate: overall exponent; E1Boundary: E2
    double fixed_rate = 0.0;     // E1Boundary / E1OfE2Boundary: first-layer rate R1
    double fixed_rate2 = 0.0;    // E1OfE2Boundary: second-layer rate R2
};

std::vector<CurvePoint> trace_curve(const JCurve& j, const TraceRequest& req);

} // namespace uep
