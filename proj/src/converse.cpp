#include "uep/converse.hpp"

#include <algorithm>
#include <cmath>

#include "uep/feasibility.hpp"

namespace uep {

double query_bound(const EntropySchedule& sched, int i, const JCurve& j) {
    const int k1 = static_cast<int>(sched.interval_means.size()); // k+1 intervals
    if (static_cast<int>(sched.decay_rates.size()) != k1)
        throw std::invalid_argument("query_bound: schedule size mismatch");
    if (i < 1 || i > static_cast<int>(sched.list_mass.size()))
        throw std::invalid_argument("query_bound: list index out of range");
    double mass = sched.list_mass[static_cast<size_t>(i - 1)];
    if (sched.pe + mass > 0.5)
        throw std::domain_error("query_bound: Pe + list mass exceeds 1/2");
    double num = -binary_entropy(std::clamp(sched.pe + mass, 0.0, 1.0));
    for (int jj = i; jj < k1; ++jj) { // paper's j = i+1 .. k+1
        double eta = sched.decay_rates[static_cast<size_t>(jj)];
        if (eta > j.capacity() + 1e-9)
            throw std::domain_error("query_bound: entropy decay rate exceeds capacity");
        eta = std::min(eta, j.capacity());
        num -= sched.interval_means[static_cast<size_t>(jj)] * j.value(eta);
    }
    return std::exp(num / (1.0 - sched.pe - mass));
}

double default_delta(double pe) {
    if (!(pe > 0.0) || pe >= 1.0)
        throw std::domain_error("default_delta: Pe must be in (0,1)");
    return 1.0 / std::log(1.0 / pe);
}

double consm_bound(const ConverseInputs& inp, const JCurve& j) {
    if (inp.expected_t <= 0.0)
        throw std::invalid_argument("consm_bound: expected decoding time must be positive");
    if (inp.msg_count < 2) throw std::invalid_argument("consm_bound: need at least two messages");
    const double d = j.d_max(), c = j.capacity();
    const double log_inv_pe = inp.exponent * inp.expected_t; // ln(1/Pe)
    const double pe = std::exp(-log_inv_pe);
    double delta = inp.delta;
    if (delta <= 0.0) {
        // the paper's choice 1/ln(1/Pe); valid even when Pe underflows
        if (!(log_inv_pe > 0.0))
            throw std::domain_error("consm_bound: need a positive error exponent");
        delta = 1.0 / log_inv_pe;
    }
    const double lambda = j.channel().min_entry();
    double eps1 = pe + delta + pe / delta + 1.0 / static_cast<double>(inp.msg_count);
    if (eps1 > 0.5) throw std::domain_error("consm_bound: hypothesis eps1 <= 1/2 violated");
    double eps2 = (binary_entropy(eps1) - std::log(lambda * delta)) / inp.expected_t;
    double eps = (eps1 * d + eps2) / (1.0 - eps1);
    double factor = 1.0 - (inp.exponent - eps) / d;
    if (factor <= 0.0) return inp.exponent; // degenerate corner of the formula
    double arg = (inp.rate - eps) / factor;
    if (arg > c) arg = c; // J is non-increasing; clamping keeps the bound valid
    return inp.exponent + factor * j.value(arg);
}

FeasibilityResult conbits_necessary(const std::vector<double>& rates,
                                    const std::vector<double>& exponents, double pe,
                                    double expected_t, double delta, const JCurve& j,
                                    double tol) {
    const size_t ell = rates.size();
    if (ell == 0 || exponents.size() != ell)
        throw std::invalid_argument("conbits_necessary: rate/exponent size mismatch");
    if (expected_t <= 0.0)
        throw std::invalid_argument("conbits_necessary: expected decoding time must be positive");
    if (delta <= 0.0) delta = default_delta(pe);
    double eps3 = pe + delta + pe / delta;
    if (eps3 > 0.2)
        throw std::domain_error("conbits_necessary: hypothesis eps3 <= 1/5 violated");
    const double lambda = j.channel().min_entry();
    double eps4 = binary_entropy(eps3) / expected_t;
    double eps5 = (binary_entropy(eps3) - std::log(lambda * delta)) / expected_t;

    const double c = j.capacity();
    LayerSystem sys;
    sys.j_rates.resize(ell);
    sys.min_phi.resize(ell);
    sys.exponents.resize(ell);
    for (size_t i = 0; i < ell; ++i) {
        sys.j_rates[i] = (1.0 - eps3) * rates[i];
        double needed = (1.0 - eps3) * rates[i] - (i == 0 ? eps4 : 0.0);
        if (needed > 0.0 && c <= 0.0) return {false, -1.0, std::nullopt};
        sys.min_phi[i] = needed > 0.0 && c > 0.0 ? needed / c : 0.0;
        sys.exponents[i] = (1.0 - eps3) * exponents[i] - eps5;
    }
    return maximize_slack(j, sys, tol);
}

double pe_floor(std::int64_t msg_count, double t_transform) {
    if (msg_count < 1) throw std::invalid_argument("pe_floor: empty message set");
    if (t_transform < 0.0 || t_transform > 1.0 + 1e-12)
        throw std::invalid_argument("pe_floor: transform outside (0,1]");
    return (static_cast<double>(msg_count) - 1.0) / static_cast<double>(msg_count) * t_transform;
}

double min_conditional_floor(double pe, std::int64_t msg_count, double lambda, double t_star) {
    double mass = 1.0 - 1.0 / static_cast<double>(msg_count) - pe;
    if (mass <= 0.0) return 0.0;
    return std::pow(lambda / (1.0 - lambda), t_star) * mass;
}

std::optional<std::int64_t> vlc_t_star(const std::vector<double>& pera_m, int block_len,
                                       double pe) {
    const double m = static_cast<double>(pera_m.size());
    double target = (m - 1.0) / m - pe;
    if (target <= 0.0) return std::nullopt;
    double worst = 0.0;
    for (double p : pera_m) worst = std::max(worst, p);
    if (worst >= 1.0) return std::nullopt;
    std::int64_t k = 1;
    if (worst > 0.0 && worst > target) {
        k = static_cast<std::int64_t>(std::ceil(std::log(target) / std::log(worst) - 1e-12));
        k = std::max<std::int64_t>(k, 1);
    }
    return k * block_len;
}

} // namespace uep
