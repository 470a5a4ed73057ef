#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "uep/exponents.hpp"

namespace uep {

// Caller-supplied description of how fast the conditional entropy of the
// message falls in the k+1 intervals cut by anticipative decoding times:
// interval_means[j] = E[T_{j+1} - T_j] and decay_rates[j] the per-use entropy
// decrease of interval j (0-based storage of the paper's j = 1..k+1).
struct EntropySchedule {
    std::vector<double> interval_means;
    std::vector<double> decay_rates;
    std::vector<double> list_mass; // P{M in A_i} for i = 1..k
    double pe = 0.0;
};

// Lower bound on the probability that the decoded message escapes the i-th
// query list (1-based i):
//   exp{ [-h_b(Pe + mass_i) - sum_{j>i} E[dT_j] J(eta_j)] / (1 - Pe - mass_i) }.
double query_bound(const EntropySchedule& sched, int i, const JCurve& j);

struct ConverseInputs {
    double rate = 0.0;       // nats per channel use
    double exponent = 0.0;   // -ln Pe / E[T]
    double expected_t = 0.0; // channel uses
    std::int64_t msg_count = 2;
    double delta = 0.0; // posterior threshold in (0, 1/2); 0 = use 1/ln(1/Pe)
};

// delta choice used throughout the converse section when Pe is known.
double default_delta(double pe);

// Uniform upper bound on -ln Pe(m) / E[T]:
//   E + (1 - (E - eps)/D) J((R - eps) / (1 - (E - eps)/D))
// with eps = (eps1 D + eps2) / (1 - eps1),
//      eps1 = Pe + delta + Pe/delta + 1/|M|,
//      eps2 = (h_b(eps1) - ln(lambda delta)) / E[T].
// Throws if the hypothesis eps1 <= 1/2 fails.
double consm_bound(const ConverseInputs& inp, const JCurve& j);

// Necessary feasibility condition for a measured bit-wise code: existence of
// phi with (1-eps3) E_i - eps5 <= (1 - sum phi) D + sum_{j>i} phi_j
// J((1-eps3) R_j / phi_j) and (1-eps3) R_i - eps4 1{i=1} <= C phi_i.
// Requires eps3 = Pe + delta + Pe/delta <= 1/5.
FeasibilityResult conbits_necessary(const std::vector<double>& rates,
                                    const std::vector<double>& exponents, double pe,
                                    double expected_t, double delta, const JCurve& j,
                                    double tol = 1e-6);

// Error-probability floor (M-1)/M E[(lambda/(1-lambda))^T]; the same formula
// serves the per-layer variant with the prefix message count |M^i|.
double pe_floor(std::int64_t msg_count, double t_transform);

// Floor on min_m Pe(m) given the overall error probability and the first time
// t* at which every conditional tail P{T > t | m} drops to (M-1)/M - Pe.
double min_conditional_floor(double pe, std::int64_t msg_count, double lambda, double t_star);

// t* for a repeat-until-non-erasure code: tails are P{T > t | m} =
// P_era(m)^floor(t/n). Empty when the tail never drops far enough.
std::optional<std::int64_t> vlc_t_star(const std::vector<double>& pera_m, int block_len,
                                       double pe);

} // namespace uep
