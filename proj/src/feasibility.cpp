#include "uep/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace uep {
namespace {

// phi * J(r / phi) with the exact-zero convention at r = phi = 0. The clamp
// of the rate argument to C only absorbs float noise: whenever the system's
// rate constraints hold, r / phi <= C already.
double perspective_j(const JCurve& j, double r, double phi) {
    if (r <= 0.0) return phi * j.d_max();
    if (phi <= 0.0) return 0.0;
    double u = r / phi;
    if (u > j.capacity()) u = j.capacity();
    return phi * j.value(u);
}

// Smallest slack of the exponent constraints
//   (1 - sum phi) D + sum_{k>i} phi_k J(j_rates[k]/phi_k) - exponents[i]
// over i. Box constraints are handled by the search domain, not here.
double exponent_slack(const JCurve& j, const LayerSystem& sys, const std::vector<double>& phi) {
    size_t ell = sys.j_rates.size();
    double total = 0.0;
    for (double v : phi) total += v;
    std::vector<double> term(ell, 0.0);
    for (size_t k = 1; k < ell; ++k) term[k] = perspective_j(j, sys.j_rates[k], phi[k]);
    const double d = j.d_max();
    double slack = 1e18;
    double suffix = 0.0;
    for (size_t i = ell; i-- > 0;) {
        double rhs = (1.0 - total) * d + suffix;
        slack = std::min(slack, rhs - sys.exponents[i]);
        if (i > 0) suffix += term[i];
    }
    return slack;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters,
                  double& arg_best) {
    const double inv_phi = 0.6180339887498949;
    arg_best = lo;
    double best = f(lo);
    double fhi = f(hi);
    if (fhi > best) {
        best = fhi;
        arg_best = hi;
    }
    double a = lo, b = hi;
    double x1 = b - (b - a) * inv_phi;
    double x2 = a + (b - a) * inv_phi;
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + (b - a) * inv_phi;
            f2 = f(x2);
            if (f2 > best) {
                best = f2;
                arg_best = x2;
            }
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - (b - a) * inv_phi;
            f1 = f(x1);
            if (f1 > best) {
                best = f1;
                arg_best = x1;
            }
        }
    }
    return best;
}

int iters_for(size_t ell) {
    if (ell <= 2) return 64;
    if (ell == 3) return 44;
    return 30;
}

} // namespace

double system_slack(const JCurve& j, const LayerSystem& sys, const std::vector<double>& phi) {
    if (phi.size() != sys.j_rates.size()) return -1e18;
    double total = 0.0;
    for (size_t i = 0; i < phi.size(); ++i) {
        if (phi[i] < sys.min_phi[i] - 1e-9) return -1e18;
        total += phi[i];
    }
    if (total > 1.0 + 1e-9) return -1e18;
    return exponent_slack(j, sys, phi);
}

FeasibilityResult maximize_slack(const JCurve& j, const LayerSystem& sys, double tol) {
    size_t ell = sys.j_rates.size();
    if (ell == 0) throw std::invalid_argument("maximize_slack: empty system");
    double lo_sum = 0.0;
    for (double v : sys.min_phi) lo_sum += v;
    if (lo_sum > 1.0 + 1e-12) return {false, 1.0 - lo_sum, std::nullopt};

    // Suffix sums of the lower bounds give each level's search interval.
    std::vector<double> tail_lo(ell + 1, 0.0);
    for (size_t k = ell; k-- > 0;) tail_lo[k] = tail_lo[k + 1] + sys.min_phi[k];

    const int iters = iters_for(ell);
    std::vector<double> phi(ell, 0.0);

    // The smallest slack is jointly concave in phi and partial maximization
    // preserves concavity, so nested golden-section search is exact. Each
    // level leaves phi[level] at its best argument; the final descent
    // therefore writes the full argmax path into phi.
    std::function<double(size_t, double)> search = [&](size_t level, double used) -> double {
        double lo = sys.min_phi[level];
        double hi = 1.0 - used - tail_lo[level + 1];
        if (hi < lo) hi = lo;
        auto eval = [&](double t) -> double {
            phi[level] = t;
            if (level + 1 == ell) return exponent_slack(j, sys, phi);
            return search(level + 1, used + t);
        };
        if (hi - lo < 1e-15) return eval(lo);
        double arg;
        golden_max(eval, lo, hi, iters, arg);
        return eval(arg);
    };

    search(0, 0.0);
    std::vector<double> best_phi = phi;
    double margin = exponent_slack(j, sys, best_phi);

    FeasibilityResult out;
    out.margin = margin;
    out.feasible = margin >= -tol;
    if (out.feasible) out.plan = PhasePlan{best_phi};
    return out;
}

} // namespace uep
