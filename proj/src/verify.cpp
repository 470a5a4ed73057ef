#include "uep/verify.hpp"

#include <algorithm>
#include <cmath>

namespace uep {
namespace {

ObservedProb from_counts(std::uint64_t hits, std::uint64_t total) {
    ConfidenceInterval ci = wilson_interval(hits, total);
    return {ci.estimate, ci.lower, ci.upper, false};
}

ObservedProb from_exact(double value) { return {value, value, value, true}; }

double mw_plan_exponent(const MwCodeSpec& spec, const Channel& w) {
    Distribution q1 = w.output_marginal(spec.p1);
    Distribution q2 = w.output_marginal(spec.p2);
    return spec.tau * kl_divergence(q1, w.row(spec.x1)) +
           (1.0 - spec.tau) * kl_divergence(q2, w.row(spec.x2));
}

} // namespace

const char* to_string(VerdictStatus s) {
    switch (s) {
    case VerdictStatus::Pass: return "pass";
    case VerdictStatus::Fail: return "fail";
    default: return "vacuous";
    }
}

Verdict check_upper_bound(const std::string& name, double bound, const ObservedProb& obs) {
    Verdict v;
    v.bound_name = name;
    v.bound_value = bound;
    v.observed = obs.exact ? obs.value : obs.upper;
    v.margin = bound - v.observed;
    if (bound >= 1.0) {
        v.status = VerdictStatus::Vacuous;
        v.note = "bound at or above one";
    } else {
        v.status = v.margin >= 0.0 ? VerdictStatus::Pass : VerdictStatus::Fail;
        if (!obs.exact) v.note = "compared against upper 95% limit";
    }
    return v;
}

Verdict check_lower_bound(const std::string& name, double floor, const ObservedProb& obs) {
    Verdict v;
    v.bound_name = name;
    v.bound_value = floor;
    v.observed = obs.exact ? obs.value : obs.lower;
    v.margin = v.observed - floor;
    if (obs.exact) {
        v.status = v.margin >= -1e-15 ? VerdictStatus::Pass : VerdictStatus::Fail;
    } else if (obs.upper < floor) {
        v.status = VerdictStatus::Fail;
        v.note = "upper 95% limit below the floor";
    } else {
        v.status = VerdictStatus::Pass;
        if (v.margin < 0.0) v.note = "floor inside the confidence interval";
    }
    return v;
}

FixedCodeObservations fixed_observations(const SimReport& rep) {
    FixedCodeObservations obs;
    obs.msg_count = rep.msg_count;
    obs.layers = rep.layers;
    std::uint64_t all_rounds = 0;
    for (int m = 1; m <= rep.msg_count; ++m) {
        const MessageStats& s = rep.per_message[static_cast<size_t>(m - 1)];
        obs.error_m.push_back(from_counts(s.errors, s.rounds_total));
        obs.erasure_m.push_back(from_counts(s.erased_rounds, s.rounds_total));
        all_rounds += s.rounds_total;
    }
    for (int i = 1; i <= rep.layers; ++i)
        obs.layer_err.push_back(from_counts(rep.layer_errors[static_cast<size_t>(i - 1)], all_rounds));
    return obs;
}

FixedCodeObservations fixed_observations(const ExactOutcomeTable& table, const VlcScheme& scheme) {
    FixedCodeObservations obs;
    obs.exact = true;
    obs.msg_count = table.msg_count;
    obs.layers = scheme.layer_count();
    const bool plain_mw = std::holds_alternative<MwCodeSpec>(scheme.code);
    for (int m = 1; m <= table.msg_count; ++m) {
        double err = table.error(m);
        double era = table.erasure(m) + table.no_decision(m);
        if (plain_mw) {
            // the erasure-free decoder resolves undecided outputs to message 2
            err += m == 2 ? 0.0 : table.no_decision(m);
            era = 0.0;
        }
        obs.error_m.push_back(from_exact(err));
        obs.erasure_m.push_back(from_exact(era));
    }
    if (const auto* bw = std::get_if<BitwiseCodeSpec>(&scheme.code)) {
        for (int i = 1; i <= bw->ell; ++i) {
            double avg = 0.0;
            for (int m = 1; m <= table.msg_count; ++m)
                avg += exact_prefix_error(table, *bw, m, i) / table.msg_count;
            obs.layer_err.push_back(from_exact(avg));
        }
    } else {
        obs.layer_err.push_back(obs.error_m.empty() ? from_exact(0.0) : obs.error_m[0]);
        double avg = 0.0;
        for (int m = 1; m <= table.msg_count; ++m)
            avg += obs.error_m[static_cast<size_t>(m - 1)].value / table.msg_count;
        obs.layer_err[0] = from_exact(avg);
    }
    return obs;
}

std::vector<Verdict> verify_achievability(const FixedCodeObservations& obs,
                                          const VlcScheme& scheme, const Channel& w,
                                          const JCurve& j) {
    std::vector<Verdict> out;
    const double d = j.d_max();

    if (const auto* mw = std::get_if<MwCodeSpec>(&scheme.code)) {
        double eps = slack_terms(mw->n, 1, w).eps_n;
        double bound1 = std::exp(-mw->n * (mw_plan_exponent(*mw, w) - eps));
        out.push_back(check_upper_bound("lemma2.pe1", bound1, obs.error_m[0]));
        for (int m = 2; m <= mw->msg_count; ++m)
            out.push_back(check_upper_bound("lemma2.pem." + std::to_string(m), eps,
                                            obs.error_m[static_cast<size_t>(m - 1)]));
        return out;
    }

    if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code)) {
        const int n = er->total_len();
        double eps = slack_terms(n, 1, w).eps_n;
        double f = 1.0 - er->design_exponent / d;
        double jval = f > 0.0 ? j.value(std::min(er->design_rate / f, j.capacity())) : 0.0;
        double bound1 = std::exp(-n * (er->design_exponent + f * jval - eps));
        out.push_back(check_upper_bound("lemma3.pe1", bound1, obs.error_m[0]));
        double boundm = eps * std::min(1.0, std::exp(-n * (er->design_exponent - eps)));
        for (int m = 2; m <= er->inner.msg_count; ++m)
            out.push_back(check_upper_bound("lemma3.pem." + std::to_string(m), boundm,
                                            obs.error_m[static_cast<size_t>(m - 1)]));
        double bound_era = eps + std::exp(-n * (f * jval - eps));
        for (int m = 1; m <= er->inner.msg_count; ++m)
            out.push_back(check_upper_bound("lemma3.perm." + std::to_string(m), bound_era,
                                            obs.erasure_m[static_cast<size_t>(m - 1)]));
        return out;
    }

    const BitwiseCodeSpec& bw = std::get<BitwiseCodeSpec>(scheme.code);
    double eps = slack_terms(bw.n, bw.ell, w).eps_n_ell;
    // design-time fractions and per-layer rates of the Lemma-4 statement
    std::vector<double> phi(bw.design_phis);
    double used = 0.0;
    for (double f : phi) used += f;
    double phi_ctrl = std::max(0.0, 1.0 - used);
    std::vector<double> rate(static_cast<size_t>(bw.ell), 0.0);
    bool hypothesis_ok = true;
    for (int i = 0; i < bw.ell; ++i) {
        rate[static_cast<size_t>(i)] =
            std::log(static_cast<double>(bw.msg_sizes[static_cast<size_t>(i)])) / bw.n;
        if (rate[static_cast<size_t>(i)] >
            j.capacity() * std::max(phi[static_cast<size_t>(i)], 0.0) + 1e-9)
            hypothesis_ok = false;
    }
    for (int i = 1; i <= bw.ell; ++i) {
        double expo = phi_ctrl * d;
        for (int k = i; k < bw.ell; ++k) { // layers after i (0-based k = i..ell-1)
            double f = phi[static_cast<size_t>(k)];
            double r = rate[static_cast<size_t>(k)];
            if (f > 0.0) expo += f * j.value(std::min(r / f, j.capacity()));
        }
        double bound = eps * std::exp(-bw.n * (expo - eps));
        Verdict v = check_upper_bound("lemma4.pemb." + std::to_string(i), bound,
                                      obs.layer_err[static_cast<size_t>(i - 1)]);
        if (!hypothesis_ok) {
            v.status = VerdictStatus::Vacuous;
            v.note = "rate exceeds C phi: lemma hypothesis unmet";
        }
        out.push_back(v);
    }
    for (int m = 1; m <= obs.msg_count; ++m) {
        Verdict v = check_upper_bound("lemma4.perm." + std::to_string(m), eps,
                                      obs.erasure_m[static_cast<size_t>(m - 1)]);
        if (!hypothesis_ok) {
            v.status = VerdictStatus::Vacuous;
            v.note = "rate exceeds C phi: lemma hypothesis unmet";
        }
        out.push_back(v);
    }
    return out;
}

namespace {

std::vector<std::int64_t> prefix_counts(const BitwiseCodeSpec& bw) {
    std::vector<std::int64_t> c(static_cast<size_t>(bw.ell), 1);
    std::int64_t acc = 1;
    for (int i = 0; i < bw.ell; ++i) {
        acc *= bw.msg_sizes[static_cast<size_t>(i)];
        c[static_cast<size_t>(i)] = acc;
    }
    return c;
}

void append_conbits(std::vector<Verdict>& out, const std::vector<double>& rates,
                    const std::vector<double>& exponents, double pe, double expected_t,
                    const JCurve& j) {
    Verdict v;
    v.bound_name = "conbits.necessary";
    v.bound_value = 0.0;
    try {
        FeasibilityResult f = conbits_necessary(rates, exponents, pe, expected_t, 0.0, j);
        v.observed = f.margin;
        v.margin = f.margin;
        v.status = f.feasible ? VerdictStatus::Pass : VerdictStatus::Fail;
    } catch (const std::domain_error& e) {
        v.status = VerdictStatus::Vacuous;
        v.note = e.what();
    }
    out.push_back(v);
}

} // namespace

std::vector<Verdict> verify_converse(const SimReport& rep, const VlcScheme& scheme,
                                     const Channel& w, const JCurve& j) {
    std::vector<Verdict> out;
    const double lambda = w.min_entry();
    const bool fixed = std::holds_alternative<MwCodeSpec>(scheme.code);
    double t_transform = fixed ? std::pow(lambda / (1.0 - lambda), rep.block_len)
                               : rep.empirical_t_transform(lambda);
    out.push_back(check_lower_bound("floor.pe", pe_floor(rep.msg_count, t_transform),
                                    from_counts(rep.errors, rep.completed)));

    // min-conditional floor with t* taken from the empirical stopping tail;
    // conservative endpoints keep Monte Carlo noise from faking a violation
    if (rep.completed > 0) {
        double pe_up = rep.error_ci().upper;
        std::vector<double> pera_up(static_cast<size_t>(rep.msg_count), 0.0);
        if (!fixed)
            for (int m = 1; m <= rep.msg_count; ++m)
                pera_up[static_cast<size_t>(m - 1)] = rep.message_erasure_ci(m).upper;
        std::optional<std::int64_t> tstar = vlc_t_star(pera_up, rep.block_len, pe_up);
        if (tstar) {
            double floor = min_conditional_floor(pe_up, rep.msg_count, lambda,
                                                 static_cast<double>(*tstar));
            int argmin = 1;
            double best = 2.0;
            for (int m = 1; m <= rep.msg_count; ++m) {
                double est = rep.message_error_ci(m).estimate;
                if (rep.per_message[static_cast<size_t>(m - 1)].completed > 0 && est < best) {
                    best = est;
                    argmin = m;
                }
            }
            const MessageStats& s = rep.per_message[static_cast<size_t>(argmin - 1)];
            Verdict v = check_lower_bound("floor.min_pem", floor,
                                          from_counts(s.errors, s.completed));
            v.note = "t* from the empirical stopping tail";
            out.push_back(v);
        }
    }
    if (const auto* bw = std::get_if<BitwiseCodeSpec>(&scheme.code)) {
        std::vector<std::int64_t> prefixes = prefix_counts(*bw);
        for (int i = 1; i <= bw->ell; ++i)
            out.push_back(check_lower_bound(
                "floor.peb." + std::to_string(i),
                pe_floor(prefixes[static_cast<size_t>(i - 1)], t_transform),
                from_counts(rep.layer_errors[static_cast<size_t>(i - 1)], rep.completed)));
        // measured rates and exponents, conservatively from CI endpoints
        double t_hat = rep.mean_decode_time();
        if (t_hat > 0.0 && rep.completed > 0) {
            std::vector<double> rates(static_cast<size_t>(bw->ell));
            std::vector<double> exps(static_cast<size_t>(bw->ell));
            bool usable = true;
            for (int i = 0; i < bw->ell; ++i) {
                rates[static_cast<size_t>(i)] =
                    std::log(static_cast<double>(bw->msg_sizes[static_cast<size_t>(i)])) / t_hat;
                double up = rep.layer_error_ci(i + 1).upper;
                if (!(up > 0.0)) usable = false;
                else exps[static_cast<size_t>(i)] = -std::log(up) / t_hat;
            }
            double pe_up = rep.error_ci().upper;
            if (usable && pe_up > 0.0 && pe_up < 1.0)
                append_conbits(out, rates, exps, pe_up, t_hat, j);
        }
    }
    return out;
}

std::vector<Verdict> verify_converse(const ExactOutcomeTable& table, const VlcScheme& scheme,
                                     const Channel& w, const JCurve& j) {
    std::vector<Verdict> out;
    const double lambda = w.min_entry();
    if (std::holds_alternative<MwCodeSpec>(scheme.code)) {
        double t_transform = std::pow(lambda / (1.0 - lambda), table.block_len);
        double pe = 0.0;
        for (int m = 1; m <= table.msg_count; ++m) {
            double err = table.error(m) + (m == 2 ? 0.0 : table.no_decision(m));
            pe += err / table.msg_count;
        }
        out.push_back(check_lower_bound("floor.pe", pe_floor(table.msg_count, t_transform),
                                        from_exact(pe)));
        return out;
    }

    VlcExact vlc = vlc_exact_from_table(table);
    double t_transform = vlc_t_transform(vlc.pera_m, table.block_len, lambda);
    out.push_back(
        check_lower_bound("floor.pe", pe_floor(table.msg_count, t_transform), from_exact(vlc.pe_overall)));

    // min-conditional floor via the exact stopping tails (Appendix-G variant)
    std::optional<std::int64_t> tstar = vlc_t_star(vlc.pera_m, table.block_len, vlc.pe_overall);
    if (tstar) {
        double floor = min_conditional_floor(vlc.pe_overall, table.msg_count, lambda,
                                             static_cast<double>(*tstar));
        double min_pem = *std::min_element(vlc.pe_m.begin(), vlc.pe_m.end());
        out.push_back(check_lower_bound("floor.min_pem", floor, from_exact(min_pem)));
    }

    // single-message converse sandwich
    if (vlc.pe_overall > 0.0) {
        Verdict v;
        v.bound_name = "consm.min_pem";
        double min_pem = *std::min_element(vlc.pe_m.begin(), vlc.pe_m.end());
        try {
            ConverseInputs inp;
            inp.msg_count = table.msg_count;
            inp.expected_t = vlc.expected_t_overall;
            inp.rate = std::log(static_cast<double>(table.msg_count)) / inp.expected_t;
            inp.exponent = -std::log(vlc.pe_overall) / inp.expected_t;
            double bound = consm_bound(inp, j);
            v.bound_value = bound;
            v.observed = min_pem > 0.0 ? -std::log(min_pem) / inp.expected_t : bound;
            v.margin = bound - v.observed;
            v.status = v.margin >= -1e-9 ? VerdictStatus::Pass : VerdictStatus::Fail;
        } catch (const std::domain_error& e) {
            v.status = VerdictStatus::Vacuous;
            v.note = e.what();
        }
        out.push_back(v);
    }

    if (const auto* bw = std::get_if<BitwiseCodeSpec>(&scheme.code)) {
        std::vector<std::int64_t> prefixes = prefix_counts(*bw);
        std::vector<double> peb(static_cast<size_t>(bw->ell), 0.0);
        for (int i = 1; i <= bw->ell; ++i) {
            double avg = 0.0;
            for (int m = 1; m <= table.msg_count; ++m) {
                double fixed_err = exact_prefix_error(table, *bw, m, i);
                avg += fixed_err / (1.0 - vlc.pera_m[static_cast<size_t>(m - 1)]) / table.msg_count;
            }
            peb[static_cast<size_t>(i - 1)] = avg;
            out.push_back(check_lower_bound("floor.peb." + std::to_string(i),
                                            pe_floor(prefixes[static_cast<size_t>(i - 1)], t_transform),
                                            from_exact(avg)));
        }
        bool usable = vlc.pe_overall > 0.0 && vlc.pe_overall < 1.0;
        for (double p : peb)
            if (!(p > 0.0)) usable = false;
        if (usable) {
            std::vector<double> rates(static_cast<size_t>(bw->ell));
            std::vector<double> exps(static_cast<size_t>(bw->ell));
            for (int i = 0; i < bw->ell; ++i) {
                rates[static_cast<size_t>(i)] =
                    std::log(static_cast<double>(bw->msg_sizes[static_cast<size_t>(i)])) /
                    vlc.expected_t_overall;
                exps[static_cast<size_t>(i)] =
                    -std::log(peb[static_cast<size_t>(i)]) / vlc.expected_t_overall;
            }
            append_conbits(out, rates, exps, vlc.pe_overall, vlc.expected_t_overall, j);
        }
    }
    return out;
}

bool all_pass(const std::vector<Verdict>& verdicts) {
    for (const Verdict& v : verdicts)
        if (v.status == VerdictStatus::Fail) return false;
    return true;
}

} // namespace uep
