#pragma once

#include <string>
#include <vector>

#include "uep/converse.hpp"
#include "uep/sim.hpp"

namespace uep {

enum class VerdictStatus { Pass, Fail, Vacuous };

const char* to_string(VerdictStatus s);

struct Verdict {
    std::string bound_name;
    double bound_value = 0.0;
    double observed = 0.0; // the CI endpoint (or exact value) compared
    double margin = 0.0;   // signed distance to the bound, positive = safe
    VerdictStatus status = VerdictStatus::Pass;
    std::string note;
};

// One observed probability with its comparison endpoints. Exact values carry
// lower == upper == value.
struct ObservedProb {
    double value = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    bool exact = false;
};

// Achievability bounds hold per invocation of the fixed-length code; upper
// endpoints are compared so a pass certifies the bound at 95% confidence.
// Bounds at or above one are reported vacuous.
Verdict check_upper_bound(const std::string& name, double bound, const ObservedProb& obs);

// Converse floors flag only confident violations: fail when even the upper
// endpoint sits below the floor.
Verdict check_lower_bound(const std::string& name, double floor, const ObservedProb& obs);

// Per-round (fixed-length code) observations recovered from a VLC report:
// every round is an independent invocation of the inner code.
struct FixedCodeObservations {
    int msg_count = 0;
    int layers = 1;
    std::vector<ObservedProb> error_m;   // decoded wrong, per message
    std::vector<ObservedProb> erasure_m; // erased, per message
    std::vector<ObservedProb> layer_err; // prefix i wrong and not erased
    bool exact = false;
};

FixedCodeObservations fixed_observations(const SimReport& rep);
FixedCodeObservations fixed_observations(const ExactOutcomeTable& table, const VlcScheme& scheme);

// Non-asymptotic Lemma bound checks for whichever code the scheme wraps.
std::vector<Verdict> verify_achievability(const FixedCodeObservations& obs,
                                          const VlcScheme& scheme, const Channel& w,
                                          const JCurve& j);

// Appendix-G floors and the converse lemmas evaluated against a Monte Carlo
// report (empirical T transform) or an exact table (geometric T transform).
std::vector<Verdict> verify_converse(const SimReport& rep, const VlcScheme& scheme,
                                     const Channel& w, const JCurve& j);
std::vector<Verdict> verify_converse(const ExactOutcomeTable& table, const VlcScheme& scheme,
                                     const Channel& w, const JCurve& j);

bool all_pass(const std::vector<Verdict>& verdicts);

} // namespace uep
