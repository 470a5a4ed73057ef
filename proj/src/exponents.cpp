#include "uep/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "uep/feasibility.hpp"

namespace uep {
namespace {

struct FastChannelView {
    const Channel* w;
    int nx, ny;
    std::vector<double> log_rows; // ln W(y|x), row-major
    std::vector<double> row_neg_entropy;

    explicit FastChannelView(const Channel& ch) : w(&ch), nx(ch.input_size()), ny(ch.output_size()) {
        log_rows.resize(static_cast<size_t>(nx) * ny);
        row_neg_entropy.resize(static_cast<size_t>(nx));
        for (int x = 0; x < nx; ++x) {
            double h = 0.0;
            for (int y = 0; y < ny; ++y) {
                double v = ch.prob(x, y);
                log_rows[static_cast<size_t>(x * ny + y)] = std::log(v);
                h += v * std::log(v);
            }
            row_neg_entropy[static_cast<size_t>(x)] = h; // sum W ln W
        }
    }

    // Computes I(P;W), max_x KL(q_P || W_x) and its argmax in one pass.
    void evaluate(const std::vector<double>& p, double& info, double& best_kl, int& best_x,
                  std::vector<double>& q, std::vector<double>& lq) const {
        q.assign(static_cast<size_t>(ny), 0.0);
        for (int x = 0; x < nx; ++x) {
            double px = p[static_cast<size_t>(x)];
            if (px == 0.0) continue;
            for (int y = 0; y < ny; ++y) q[static_cast<size_t>(y)] += px * w->prob(x, y);
        }
        lq.resize(static_cast<size_t>(ny));
        double hq = 0.0; // sum q ln q
        for (int y = 0; y < ny; ++y) {
            lq[static_cast<size_t>(y)] = std::log(q[static_cast<size_t>(y)]);
            hq += q[static_cast<size_t>(y)] * lq[static_cast<size_t>(y)];
        }
        info = 0.0;
        best_kl = -1.0;
        best_x = 0;
        for (int x = 0; x < nx; ++x) {
            double wlq = 0.0;
            for (int y = 0; y < ny; ++y) wlq += w->prob(x, y) * lq[static_cast<size_t>(y)];
            double px = p[static_cast<size_t>(x)];
            if (px > 0.0) info += px * (row_neg_entropy[static_cast<size_t>(x)] - wlq);
            double kl = hq;
            const double* lr = &log_rows[static_cast<size_t>(x) * ny];
            for (int y = 0; y < ny; ++y) kl -= q[static_cast<size_t>(y)] * lr[y];
            if (kl > best_kl) {
                best_kl = kl;
                best_x = x;
            }
        }
        if (info < 0.0) info = 0.0;
    }
};

// Enumerates compositions of `resolution` into `dim` parts as probability
// vectors (shared buffer, callback per point).
void for_each_simplex_point(int dim, int resolution,
                            const std::function<void(const std::vector<double>&)>& fn) {
    std::vector<int> counts(static_cast<size_t>(dim), 0);
    std::vector<double> p(static_cast<size_t>(dim), 0.0);
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
        if (idx == dim - 1) {
            counts[static_cast<size_t>(idx)] = remaining;
            for (int i = 0; i < dim; ++i)
                p[static_cast<size_t>(i)] = static_cast<double>(counts[static_cast<size_t>(i)]) / resolution;
            fn(p);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[static_cast<size_t>(idx)] = c;
            rec(idx + 1, remaining - c);
        }
    };
    rec(0, resolution);
}

long long simplex_point_count(int dim, int resolution) {
    // C(resolution + dim - 1, dim - 1)
    long long r = 1;
    for (int i = 1; i <= dim - 1; ++i) {
        r = r * (resolution + i) / i;
        if (r > (1LL << 40)) return r;
    }
    return r;
}

int pick_resolution(int dim, int requested) {
    if (dim <= 4) return requested;
    int res = requested;
    while (res > 2 && simplex_point_count(dim, res) > 3000000) --res;
    return std::max(res, 2);
}

double eval_objective(const Channel& w, const Distribution& p, int& best_x) {
    Distribution q = w.output_marginal(p);
    double best = -1.0;
    best_x = 0;
    for (int x = 0; x < w.input_size(); ++x) {
        double v = kl_divergence(q, w.row(x));
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    return best;
}

// Largest t in [0, t_cap] keeping I((1-t)P + t e_i) >= rate; the feasible set
// is an interval containing 0 because mutual information is concave in t.
double feasible_t_max(const Channel& w, const std::vector<double>& p, int vertex, double t_cap,
                      double rate) {
    auto info_at = [&](double t) {
        std::vector<double> pt(p);
        for (double& v : pt) v *= (1.0 - t);
        pt[static_cast<size_t>(vertex)] += t;
        return mutual_information(unchecked_distribution(std::move(pt)), w);
    };
    if (info_at(t_cap) >= rate) return t_cap;
    double lo = 0.0, hi = t_cap;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (info_at(mid) >= rate)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// One refinement pass pattern: the objective is convex along every segment,
// so each line search only needs the far feasible endpoint.
SingleLetterWitness polish_witness(const Channel& w, SingleLetterWitness s, double rate,
                                   int rounds) {
    const int nx = w.input_size();
    std::vector<double> p(s.input.probs());
    int cur_x = s.letter;
    double cur = s.value;
    for (int round = 0; round < rounds; ++round) {
        bool improved = false;
        for (int i = 0; i < nx; ++i) {
            // toward vertex i
            double t1 = feasible_t_max(w, p, i, 1.0, rate);
            if (t1 > 0.0) {
                std::vector<double> cand(p);
                for (double& v : cand) v *= (1.0 - t1);
                cand[static_cast<size_t>(i)] += t1;
                int bx;
                double val = eval_objective(w, unchecked_distribution(cand), bx);
                if (val > cur + 1e-14) {
                    p = std::move(cand);
                    cur = val;
                    cur_x = bx;
                    improved = true;
                    continue;
                }
            }
            // away from vertex i (negative t keeps the point in the simplex
            // as long as coordinate i stays non-negative)
            double pi = p[static_cast<size_t>(i)];
            if (pi > 0.0 && pi < 1.0) {
                double t_lo = -pi / (1.0 - pi);
                auto info_at = [&](double t) {
                    std::vector<double> pt(p);
                    for (double& v : pt) v *= (1.0 - t);
                    pt[static_cast<size_t>(i)] += t;
                    for (double& v : pt) v = std::max(v, 0.0);
                    return mutual_information(unchecked_distribution(std::move(pt)), w);
                };
                double lo = t_lo, hi = 0.0;
                if (info_at(lo) < rate) {
                    for (int it = 0; it < 60; ++it) {
                        double mid = 0.5 * (lo + hi);
                        if (info_at(mid) >= rate)
                            hi = mid;
                        else
                            lo = mid;
                    }
                    lo = hi;
                }
                if (lo < 0.0) {
                    std::vector<double> cand(p);
                    for (double& v : cand) v *= (1.0 - lo);
                    cand[static_cast<size_t>(i)] += lo;
                    for (double& v : cand) v = std::max(v, 0.0);
                    double norm = 0.0;
                    for (double v : cand) norm += v;
                    for (double& v : cand) v /= norm;
                    int bx;
                    double val = eval_objective(w, unchecked_distribution(cand), bx);
                    if (val > cur + 1e-14) {
                        p = std::move(cand);
                        cur = val;
                        cur_x = bx;
                        improved = true;
                    }
                }
            }
        }
        if (!improved) break;
    }
    SingleLetterWitness out;
    out.value = cur;
    out.letter = cur_x;
    out.input = unchecked_distribution(std::move(p));
    out.mutual_info = mutual_information(out.input, w);
    return out;
}

} // namespace

SingleLetterWitness j_single(const Channel& w, double rate, const JOptions& opt) {
    const double c = w.capacity_nats();
    if (rate < -1e-12)
        throw std::domain_error("j_single: rate must be non-negative");
    if (rate > c + opt.rate_slack)
        throw std::domain_error("j_single: rate exceeds capacity");
    rate = std::clamp(rate, 0.0, c);

    FastChannelView view(w);
    int res = pick_resolution(w.input_size(), opt.simplex_resolution);
    SingleLetterWitness best;
    best.value = -1.0;
    if (rate <= 1e-12) {
        // canonical zero-rate witness: point mass on the accept letter scored
        // against the reject letter attains D; strict improvements only, so
        // symmetric channels keep this deterministic choice
        best.value = w.d_max_nats();
        best.letter = w.reject_letter();
        best.input = Distribution::point_mass(w.input_size(), w.accept_letter());
        best.mutual_info = 0.0;
    }
    std::vector<double> q, lq;
    for_each_simplex_point(w.input_size(), res, [&](const std::vector<double>& p) {
        double info, v;
        int bx;
        view.evaluate(p, info, v, bx, q, lq);
        if (info + 1e-12 >= rate && v > best.value + 1e-13) {
            best.value = v;
            best.letter = bx;
            best.input = unchecked_distribution(p);
            best.mutual_info = info;
        }
    });
    // the capacity-achieving input is always feasible (up to solver gap)
    {
        const Distribution& pc = w.capacity_input();
        int bx;
        double v = eval_objective(w, pc, bx);
        if (best.value < 0.0 || (v > best.value && mutual_information(pc, w) + 1e-9 >= rate)) {
            best.value = v;
            best.letter = bx;
            best.input = pc;
            best.mutual_info = mutual_information(pc, w);
        }
    }
    return polish_witness(w, best, rate, opt.polish_rounds);
}

JCurve::JCurve(const Channel& w, const JOptions& opt) : w_(w) {
    c_ = w_.capacity_nats();
    d_ = w_.d_max_nats();
    rate_slack_ = opt.rate_slack;

    const int K = std::max(2, opt.table_points);
    rates_.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) rates_[static_cast<size_t>(k)] = c_ * k / (K - 1);

    struct Candidate {
        double value = -1.0;
        double info = 0.0;
        int letter = 0;
        std::vector<double> p;
    };
    std::vector<Candidate> best(static_cast<size_t>(K));

    FastChannelView view(w_);
    int res = pick_resolution(w_.input_size(), opt.simplex_resolution);
    std::vector<double> q, lq;
    for_each_simplex_point(w_.input_size(), res, [&](const std::vector<double>& p) {
        double info, v;
        int bx;
        view.evaluate(p, info, v, bx, q, lq);
        int k = 0;
        if (c_ > 0.0)
            k = std::min(K - 1, static_cast<int>(std::floor(info / c_ * (K - 1))));
        Candidate& c = best[static_cast<size_t>(k)];
        if (v > c.value) {
            c.value = v;
            c.info = info;
            c.letter = bx;
            c.p = p;
        }
    });
    { // the capacity input certifies the top bucket
        Candidate& cand = best[static_cast<size_t>(K - 1)];
        const Distribution& pc = w_.capacity_input();
        int bx;
        double v = eval_objective(w_, pc, bx);
        if (v > cand.value) {
            cand.value = v;
            cand.info = mutual_information(pc, w_);
            cand.letter = bx;
            cand.p = pc.probs();
        }
    }
    for (int k = K - 2; k >= 0; --k) {
        if (best[static_cast<size_t>(k + 1)].value > best[static_cast<size_t>(k)].value)
            best[static_cast<size_t>(k)] = best[static_cast<size_t>(k + 1)];
    }

    table_.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        const Candidate& c = best[static_cast<size_t>(k)];
        SingleLetterWitness s;
        s.value = c.value;
        s.letter = c.letter;
        s.input = unchecked_distribution(c.p);
        s.mutual_info = c.info;
        table_[static_cast<size_t>(k)] =
            polish_witness(w_, s, rates_[static_cast<size_t>(k)], opt.polish_rounds);
    }

    // upper hull over (rate, j) pairs; two-point mixtures on hull segments
    // realize the concave envelope
    hull_.clear();
    for (int k = 0; k < K; ++k) {
        if (c_ <= 0.0) break;
        while (hull_.size() >= 2) {
            int a = hull_[hull_.size() - 2], b = hull_.back();
            double ax = rates_[static_cast<size_t>(a)], ay = table_[static_cast<size_t>(a)].value;
            double bx = rates_[static_cast<size_t>(b)], by = table_[static_cast<size_t>(b)].value;
            double cx = rates_[static_cast<size_t>(k)], cy = table_[static_cast<size_t>(k)].value;
            double cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
            if (cross >= 0.0)
                hull_.pop_back();
            else
                break;
        }
        hull_.push_back(k);
    }
    if (hull_.empty()) hull_.push_back(0);
}

int JCurve::hull_segment(double rate) const {
    int lo = 0, hi = static_cast<int>(hull_.size()) - 1;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (rates_[static_cast<size_t>(hull_[static_cast<size_t>(mid)])] <= rate)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double JCurve::value(double rate) const {
    if (rate <= 0.0) return d_;
    if (rate > c_ + rate_slack_)
        throw std::domain_error("J: rate exceeds capacity");
    rate = std::min(rate, c_);
    if (hull_.size() == 1) return table_[static_cast<size_t>(hull_[0])].value;
    int s = hull_segment(rate);
    int a = hull_[static_cast<size_t>(s)], b = hull_[static_cast<size_t>(s + 1)];
    double ax = rates_[static_cast<size_t>(a)], bx = rates_[static_cast<size_t>(b)];
    double ay = table_[static_cast<size_t>(a)].value, by = table_[static_cast<size_t>(b)].value;
    if (bx <= ax) return std::max(ay, by);
    double tau = (bx - rate) / (bx - ax);
    return tau * ay + (1.0 - tau) * by;
}

JResult JCurve::with_plan(double rate) const {
    JResult r;
    if (rate <= 0.0) {
        r.value = d_;
        r.plan.tau = 1.0;
        r.plan.x1 = r.plan.x2 = w_.reject_letter();
        r.plan.p1 = r.plan.p2 = Distribution::point_mass(w_.input_size(), w_.accept_letter());
        return r;
    }
    if (rate > c_ + rate_slack_)
        throw std::domain_error("J: rate exceeds capacity");
    rate = std::min(rate, c_);
    if (hull_.size() == 1) {
        const SingleLetterWitness& s = table_[static_cast<size_t>(hull_[0])];
        r.value = s.value;
        r.plan.tau = 1.0;
        r.plan.x1 = r.plan.x2 = s.letter;
        r.plan.p1 = r.plan.p2 = s.input;
        return r;
    }
    int seg = hull_segment(rate);
    const SingleLetterWitness& s1 = table_[static_cast<size_t>(hull_[static_cast<size_t>(seg)])];
    const SingleLetterWitness& s2 = table_[static_cast<size_t>(hull_[static_cast<size_t>(seg + 1)])];
    double ax = rates_[static_cast<size_t>(hull_[static_cast<size_t>(seg)])];
    double bx = rates_[static_cast<size_t>(hull_[static_cast<size_t>(seg + 1)])];
    double tau = bx <= ax ? 1.0 : (bx - rate) / (bx - ax);
    r.plan.tau = tau;
    r.plan.x1 = s1.letter;
    r.plan.x2 = s2.letter;
    r.plan.p1 = s1.input;
    r.plan.p2 = s2.input;
    r.value = tau * s1.value + (1.0 - tau) * s2.value;
    return r;
}

double JCurve::plan_value(const TimeSharePlan& plan) const {
    double v1 = kl_divergence(w_.output_marginal(plan.p1), w_.row(plan.x1));
    double v2 = kl_divergence(w_.output_marginal(plan.p2), w_.row(plan.x2));
    return plan.tau * v1 + (1.0 - plan.tau) * v2;
}

double JCurve::plan_rate(const TimeSharePlan& plan) const {
    return plan.tau * mutual_information(plan.p1, w_) +
           (1.0 - plan.tau) * mutual_information(plan.p2, w_);
}

double burnashev(const Channel& w, double rate) {
    double c = w.capacity_nats();
    if (rate < -1e-12 || rate > c + 1e-9)
        throw std::domain_error("burnashev: rate outside [0, C]");
    if (c <= 0.0) return w.d_max_nats();
    rate = std::clamp(rate, 0.0, c);
    return (1.0 - rate / c) * w.d_max_nats();
}

double emd(const JCurve& j, double rate, double exponent) {
    const double c = j.capacity(), d = j.d_max();
    if (rate < -1e-12 || rate > c + 1e-9)
        throw std::domain_error("emd: rate outside [0, C]");
    rate = std::clamp(rate, 0.0, c);
    double emax = c > 0.0 ? (1.0 - rate / c) * d : d;
    if (exponent < -1e-12 || exponent > emax + 1e-9)
        throw std::domain_error("emd: exponent outside the Burnashev region");
    exponent = std::clamp(exponent, 0.0, emax);
    if (d <= 0.0) return 0.0;
    double t = 1.0 - exponent / d;
    if (t <= 0.0) return exponent; // only reachable at (rate=0, exponent=D)
    double u = rate / t;
    if (u > c) u = c;
    return exponent + t * j.value(u);
}

double optimal_e1(const JCurve& j, double r1, double r2, double e2) {
    const double c = j.capacity(), d = j.d_max();
    if (r1 < -1e-12 || r2 < -1e-12)
        throw std::domain_error("optimal_e1: rates must be non-negative");
    if (r1 + r2 > c + 1e-9)
        throw std::domain_error("optimal_e1: r1 + r2 exceeds capacity");
    r1 = std::max(r1, 0.0);
    r2 = std::max(r2, 0.0);
    double e2max = c > 0.0 ? (1.0 - std::min(1.0, (r1 + r2) / c)) * d : d;
    if (e2 < -1e-12 || e2 > e2max + 1e-9)
        throw std::domain_error("optimal_e1: e2 outside the admissible range");
    e2 = std::clamp(e2, 0.0, e2max);
    if (d <= 0.0 || c <= 0.0) return e2;
    double a = 1.0 - r1 / c - e2 / d;
    if (a <= 0.0) return e2; // degenerate corner (forces r2 = 0)
    double u = r2 / a;
    if (u > c) u = c;
    return e2 + a * j.value(u);
}

FeasibilityResult region_feasible(const JCurve& j, const RateExponentQuery& q, double tol) {
    size_t ell = q.rates.size();
    if (ell == 0 || q.exponents.size() != ell)
        throw std::invalid_argument("region_feasible: rate/exponent size mismatch");
    for (double r : q.rates)
        if (r < 0.0) throw std::invalid_argument("region_feasible: negative rate");
    for (double e : q.exponents)
        if (e < 0.0) throw std::invalid_argument("region_feasible: negative exponent");

    const double c = j.capacity();
    LayerSystem sys;
    sys.j_rates = q.rates;
    sys.exponents = q.exponents;
    sys.min_phi.resize(ell);
    for (size_t i = 0; i < ell; ++i) {
        if (q.rates[i] > 0.0 && c <= 0.0) return {false, -1.0, std::nullopt};
        sys.min_phi[i] = c > 0.0 ? q.rates[i] / c : 0.0;
    }
    return maximize_slack(j, sys, tol);
}

double boundary_e1_by_bisection(const JCurve& j, double r1, double r2, double e2, double tol) {
    RateExponentQuery q;
    q.rates = {r1, r2};
    auto feasible = [&](double e1) {
        q.exponents = {e1, e2};
        return region_feasible(j, q, tol).feasible;
    };
    double lo = 0.0, hi = j.d_max() + 1.0;
    if (!feasible(lo)) return 0.0;
    for (int it = 0; it < 64; ++it) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<CurvePoint> trace_curve(const JCurve& j, const TraceRequest& req) {
    if (req.n_points < 1)
        throw std::invalid_argument("trace_curve: need at least one point");
    const double c = j.capacity(), d = j.d_max();
    double lo = req.x_min, hi = req.x_max;
    bool natural_domain = hi < lo || (lo == 0.0 && hi == 0.0);
    if (natural_domain) {
        switch (req.kind) {
        case CurveKind::JOfRate:
            lo = 0.0;
            hi = c;
            break;
        case CurveKind::EmdOfRate:
            lo = 0.0;
            hi = d > 0.0 ? (1.0 - req.fixed_exponent / d) * c : 0.0;
            break;
        case CurveKind::E1Boundary:
            lo = 0.0;
            hi = d > 0.0 ? std::max(0.0, c * (1.0 - req.fixed_exponent / d) - req.fixed_rate)
                         : std::max(0.0, c - req.fixed_rate);
            break;
        case CurveKind::E1OfE2Boundary:
            lo = 0.0;
            hi = c > 0.0
                     ? std::max(0.0, (1.0 - (req.fixed_rate + req.fixed_rate2) / c) * d)
                     : 0.0;
            break;
        }
    }
    int n = req.n_points;
    if (hi <= lo) n = 1;
    std::vector<CurvePoint> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        CurvePoint pt;
        pt.x = x;
        switch (req.kind) {
        case CurveKind::JOfRate: {
            JResult r = j.with_plan(x);
            pt.y = r.value;
            pt.time_share = r.plan;
            break;
        }
        case CurveKind::EmdOfRate: {
            pt.y = emd(j, x, req.fixed_exponent);
            double t = d > 0.0 ? 1.0 - req.fixed_exponent / d : 0.0;
            if (t > 0.0) pt.time_share = j.with_plan(std::min(x / t, c)).plan;
            break;
        }
        case CurveKind::E1Boundary: {
            pt.y = boundary_e1_by_bisection(j, req.fixed_rate, x, req.fixed_exponent);
            RateExponentQuery q;
            q.rates = {req.fixed_rate, x};
            q.exponents = {std::max(0.0, pt.y - 1e-6), req.fixed_exponent};
            FeasibilityResult f = region_feasible(j, q);
            if (f.plan) pt.phases = f.plan;
            break;
        }
        case CurveKind::E1OfE2Boundary: {
            pt.y = boundary_e1_by_bisection(j, req.fixed_rate, req.fixed_rate2, x);
            RateExponentQuery q;
            q.rates = {req.fixed_rate, req.fixed_rate2};
            q.exponents = {std::max(0.0, pt.y - 1e-6), x};
            FeasibilityResult f = region_feasible(j, q);
            if (f.plan) pt.phases = f.plan;
            break;
        }
        }
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace uep
