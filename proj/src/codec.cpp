#include "uep/codec.hpp"

#include <algorithm>
#include <cmath>

#include "uep/rng.hpp"

namespace uep {
namespace {

std::vector<double> cdf_of(const Distribution& p) {
    std::vector<double> c(static_cast<size_t>(p.size()));
    double acc = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        acc += p[i];
        c[static_cast<size_t>(i)] = acc;
    }
    c.back() = 1.0;
    return c;
}

int sample_from_cdf(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<int>(it - cdf.begin());
}

double phase_threshold(const Channel& w, double factor, int phase_len, int total_len) {
    return w.input_size() * w.output_size() *
           std::sqrt(factor * phase_len * std::log(1.0 + total_len));
}

} // namespace

int MwCodeSpec::n_tau() const { return static_cast<int>(std::floor(tau * n + 1e-9)); }

double default_mw_threshold(const Channel& w, int n) { return phase_threshold(w, 1.0, n, n); }

double erasure_phase_threshold(const Channel& w, int phase_len, int total_len) {
    return phase_threshold(w, 5.0, phase_len, total_len);
}

double bitwise_phase_threshold(const Channel& w, int phase_len, int total_len) {
    return phase_threshold(w, 4.0, phase_len, total_len);
}

MwCodeSpec make_mw_spec(const Channel& w, const JCurve& j, int n, double rate, int msg_count,
                        std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("make_mw_spec: block length must be positive");
    if (msg_count < 2) throw std::invalid_argument("make_mw_spec: need at least two messages");
    JResult jr = j.with_plan(rate);
    MwCodeSpec spec;
    spec.n = n;
    spec.tau = jr.plan.tau;
    spec.x1 = jr.plan.x1;
    spec.x2 = jr.plan.x2;
    spec.p1 = jr.plan.p1;
    spec.p2 = jr.plan.p2;
    spec.msg_count = msg_count;
    spec.seed = seed;
    spec.threshold = default_mw_threshold(w, n);
    return spec;
}

Codebook build_mw_codebook(const Channel& w, const MwCodeSpec& spec) {
    if (spec.msg_count < 2)
        throw std::invalid_argument("build_mw_codebook: need at least two messages");
    if (spec.n < 1) throw std::invalid_argument("build_mw_codebook: empty block");
    if (spec.p1.size() != w.input_size() || spec.p2.size() != w.input_size())
        throw std::invalid_argument("build_mw_codebook: distribution dimension mismatch");
    if (spec.x1 < 0 || spec.x1 >= w.input_size() || spec.x2 < 0 || spec.x2 >= w.input_size())
        throw std::invalid_argument("build_mw_codebook: letter out of range");

    Codebook book;
    book.spec = spec;
    book.n_tau = spec.n_tau();
    book.q1 = w.output_marginal(spec.p1);
    book.q2 = w.output_marginal(spec.p2);
    book.joint1 = w.joint(spec.p1);
    book.joint2 = w.joint(spec.p2);
    book.cdf1 = cdf_of(spec.p1);
    book.cdf2 = cdf_of(spec.p2);

    book.words.assign(static_cast<size_t>(spec.msg_count) * spec.n, 0);
    int* first = &book.words[0];
    for (int t = 0; t < spec.n; ++t) first[t] = t < book.n_tau ? spec.x1 : spec.x2;
    for (int m = 2; m <= spec.msg_count; ++m) {
        CounterRng rng(spec.seed, static_cast<std::uint64_t>(m));
        int* word = &book.words[static_cast<size_t>(m - 1) * spec.n];
        for (int t = 0; t < spec.n; ++t) {
            double u = rng.next_unit();
            word[t] = sample_from_cdf(t < book.n_tau ? book.cdf1 : book.cdf2, u);
        }
    }
    return book;
}

double mw_marginal_statistic(const Codebook& book, const Channel& w, const std::vector<int>& y) {
    const int n = book.spec.n, nt = book.n_tau, ny = w.output_size();
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("mw_marginal_statistic: length mismatch");
    std::vector<double> c1(static_cast<size_t>(ny), 0.0), c2(static_cast<size_t>(ny), 0.0);
    for (int t = 0; t < n; ++t) (t < nt ? c1 : c2)[static_cast<size_t>(y[static_cast<size_t>(t)])] += 1.0;
    double s = 0.0;
    for (int v = 0; v < ny; ++v) {
        s += 0.5 * std::fabs(c1[static_cast<size_t>(v)] - nt * book.q1[v]);
        s += 0.5 * std::fabs(c2[static_cast<size_t>(v)] - (n - nt) * book.q2[v]);
    }
    return s;
}

double mw_joint_statistic(const Codebook& book, const Channel& w, int msg,
                          const std::vector<int>& y) {
    const int n = book.spec.n, nt = book.n_tau, ny = w.output_size(), nx = w.input_size();
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("mw_joint_statistic: length mismatch");
    if (msg < 1 || msg > book.spec.msg_count)
        throw std::invalid_argument("mw_joint_statistic: message out of range");
    const int* word = book.word(msg);
    std::vector<double> c1(static_cast<size_t>(nx) * ny, 0.0), c2(static_cast<size_t>(nx) * ny, 0.0);
    for (int t = 0; t < n; ++t) {
        size_t cell = static_cast<size_t>(word[t] * ny + y[static_cast<size_t>(t)]);
        (t < nt ? c1 : c2)[cell] += 1.0;
    }
    double s = 0.0;
    for (int cell = 0; cell < nx * ny; ++cell) {
        s += 0.5 * std::fabs(c1[static_cast<size_t>(cell)] - nt * book.joint1[cell]);
        s += 0.5 * std::fabs(c2[static_cast<size_t>(cell)] - (n - nt) * book.joint2[cell]);
    }
    return s;
}

std::optional<int> decode_mw(const Codebook& book, const Channel& w, const std::vector<int>& y) {
    if (mw_marginal_statistic(book, w, y) >= book.spec.threshold) return 1;
    int typical = 0, count = 0;
    for (int m = 1; m <= book.spec.msg_count; ++m) {
        if (mw_joint_statistic(book, w, m, y) < book.spec.threshold) {
            typical = m;
            if (++count > 1) return std::nullopt; // ambiguous: excluded from every region
        }
    }
    if (count == 1 && typical >= 2) return typical;
    return std::nullopt;
}

int decode_mw_total(const Codebook& book, const Channel& w, const std::vector<int>& y) {
    std::optional<int> d = decode_mw(book, w, y);
    return d ? *d : 2;
}

bool control_accepts(const std::vector<int>& y_ctrl, const Channel& w, int accept_letter,
                     double threshold) {
    if (y_ctrl.empty()) throw std::invalid_argument("control_accepts: empty segment");
    const int ny = w.output_size();
    std::vector<double> c(static_cast<size_t>(ny), 0.0);
    for (int v : y_ctrl) c[static_cast<size_t>(v)] += 1.0;
    double s = 0.0;
    double len = static_cast<double>(y_ctrl.size());
    for (int v = 0; v < ny; ++v)
        s += 0.5 * std::fabs(c[static_cast<size_t>(v)] - len * w.prob(accept_letter, v));
    return s < threshold;
}

ErasureCodeSpec make_erasure_spec(const Channel& w, const JCurve& j, int n, double rate,
                                  double exponent, int msg_count, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_erasure_spec: need at least two channel uses");
    const double d = j.d_max();
    if (!(d > 0.0)) throw std::invalid_argument("make_erasure_spec: channel has zero divergence");
    if (exponent < 0.0 || exponent > d)
        throw std::invalid_argument("make_erasure_spec: exponent outside [0, D]");
    int n1 = static_cast<int>(std::ceil((1.0 - exponent / d) * n - 1e-9));
    n1 = std::clamp(n1, 1, n);
    double boosted = rate * n / n1;
    if (boosted > j.capacity() + 1e-9)
        throw std::invalid_argument("make_erasure_spec: (rate, exponent) outside the region");
    boosted = std::min(boosted, j.capacity());

    ErasureCodeSpec spec;
    spec.inner = make_mw_spec(w, j, n1, boosted, msg_count, seed);
    spec.inner.threshold = erasure_phase_threshold(w, n1, n);
    spec.control_len = n - n1;
    spec.control_threshold = erasure_phase_threshold(w, n - n1, n);
    spec.accept_letter = w.accept_letter();
    spec.reject_letter = w.reject_letter();
    spec.design_rate = rate;
    spec.design_exponent = exponent;
    return spec;
}

std::vector<int> encode_erasure(const ErasureCodeSpec& spec, const Codebook& inner_book,
                                int message, std::optional<int> tentative) {
    if (message < 1 || message > spec.inner.msg_count)
        throw std::invalid_argument("encode_erasure: message out of range");
    std::vector<int> x(static_cast<size_t>(spec.total_len()));
    const int* word = inner_book.word(message);
    for (int t = 0; t < spec.inner.n; ++t) x[static_cast<size_t>(t)] = word[t];
    int ctrl = (tentative && *tentative == message) ? spec.accept_letter : spec.reject_letter;
    for (int t = spec.inner.n; t < spec.total_len(); ++t) x[static_cast<size_t>(t)] = ctrl;
    return x;
}

ErasureDecodeResult decode_erasure(const ErasureCodeSpec& spec, const Codebook& inner_book,
                                   const Channel& w, const std::vector<int>& y) {
    if (static_cast<int>(y.size()) != spec.total_len())
        throw std::invalid_argument("decode_erasure: length mismatch");
    ErasureDecodeResult r;
    std::vector<int> y1(y.begin(), y.begin() + spec.inner.n);
    std::vector<int> y2(y.begin() + spec.inner.n, y.end());
    r.tentative = decode_mw(inner_book, w, y1);
    r.accepted = y2.empty() || control_accepts(y2, w, spec.accept_letter, spec.control_threshold);
    if (r.accepted && r.tentative) r.message = r.tentative;
    return r;
}

int BitwiseCodeSpec::msg_vector_count() const {
    int c = 1;
    for (int m : msg_sizes) c *= m;
    return c;
}

BitwiseCodeSpec make_bitwise_spec(const Channel& w, const JCurve& j, int n,
                                  const std::vector<int>& msg_sizes,
                                  const std::vector<double>& phis, std::uint64_t seed) {
    const int ell = static_cast<int>(msg_sizes.size());
    if (ell < 1) throw std::invalid_argument("make_bitwise_spec: need at least one layer");
    if (static_cast<int>(phis.size()) != ell)
        throw std::invalid_argument("make_bitwise_spec: phi dimension mismatch");
    double total = 0.0;
    for (double f : phis) {
        if (f < 0.0) throw std::invalid_argument("make_bitwise_spec: negative phi");
        total += f;
    }
    if (total > 1.0 + 1e-12)
        throw std::invalid_argument("make_bitwise_spec: time-sharing fractions exceed 1");

    BitwiseCodeSpec spec;
    spec.n = n;
    spec.ell = ell;
    spec.msg_sizes = msg_sizes;
    spec.design_phis = phis;
    spec.accept_letter = w.accept_letter();
    spec.reject_letter = w.reject_letter();
    spec.phase_lens.resize(static_cast<size_t>(ell) + 1);
    int used = 0;
    for (int i = 0; i < ell; ++i) {
        int ni = static_cast<int>(std::floor(phis[static_cast<size_t>(i)] * n + 1e-9));
        ni = std::max(ni, 1);
        spec.phase_lens[static_cast<size_t>(i)] = ni;
        used += ni;
    }
    if (used >= n)
        throw std::invalid_argument("make_bitwise_spec: no room left for the control phase");
    spec.phase_lens[static_cast<size_t>(ell)] = n - used;

    for (int i = 0; i < ell; ++i) {
        if (msg_sizes[static_cast<size_t>(i)] < 1)
            throw std::invalid_argument("make_bitwise_spec: empty sub-message set");
        int ni = spec.phase_lens[static_cast<size_t>(i)];
        double fr = phis[static_cast<size_t>(i)];
        double rate_i = fr > 0.0
                            ? std::min(j.capacity(),
                                       std::log(static_cast<double>(msg_sizes[static_cast<size_t>(i)])) /
                                           std::max(1, ni))
                            : 0.0;
        MwCodeSpec sub = make_mw_spec(w, j, ni, rate_i, msg_sizes[static_cast<size_t>(i)] + 1,
                                      CounterRng::derive_key(seed, static_cast<std::uint64_t>(i)));
        sub.threshold = bitwise_phase_threshold(w, ni, n);
        spec.sub.push_back(std::move(sub));
    }
    spec.control_threshold = bitwise_phase_threshold(w, spec.phase_lens[static_cast<size_t>(ell)], n);
    return spec;
}

BitwiseBooks build_bitwise_books(const Channel& w, const BitwiseCodeSpec& spec) {
    BitwiseBooks books;
    books.sub.reserve(spec.sub.size());
    for (const MwCodeSpec& s : spec.sub) books.sub.push_back(build_mw_codebook(w, s));
    return books;
}

int bitwise_phase_tx(const BitwiseCodeSpec& spec, const std::vector<int>& message, int phase,
                     std::optional<int> prev_tentative, int prev_tx) {
    if (phase < 0 || phase > spec.ell) throw std::invalid_argument("bitwise_phase_tx: bad phase");
    bool matched = phase == 0 || (prev_tentative && *prev_tentative == prev_tx);
    int sub_msg = phase < spec.ell ? message[static_cast<size_t>(phase)] : 1;
    if (phase < spec.ell &&
        (sub_msg < 1 || sub_msg > spec.msg_sizes[static_cast<size_t>(phase)]))
        throw std::invalid_argument("bitwise_phase_tx: sub-message out of range");
    return matched ? 1 + sub_msg : 1;
}

std::vector<int> bitwise_phase_letters(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                                       int phase, int tx_index) {
    int len = spec.phase_lens[static_cast<size_t>(phase)];
    if (phase == spec.ell) {
        int letter = tx_index == 2 ? spec.accept_letter : spec.reject_letter;
        return std::vector<int>(static_cast<size_t>(len), letter);
    }
    const Codebook& book = books.sub[static_cast<size_t>(phase)];
    const int* word = book.word(tx_index);
    return std::vector<int>(word, word + len);
}

std::optional<int> bitwise_phase_tentative(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                                           const Channel& w, int phase,
                                           const std::vector<int>& y_block) {
    if (phase == spec.ell)
        return control_accepts(y_block, w, spec.accept_letter, spec.control_threshold) ? 2 : 1;
    return decode_mw(books.sub[static_cast<size_t>(phase)], w, y_block);
}

DecodeOutcome bitwise_outcome(const BitwiseCodeSpec& spec,
                              const std::vector<std::optional<int>>& tentatives) {
    if (static_cast<int>(tentatives.size()) != spec.ell + 1)
        throw std::invalid_argument("bitwise_outcome: tentative count mismatch");
    DecodeOutcome out;
    for (const auto& t : tentatives) {
        if (!t || *t == 1) {
            out.erasure = true;
            return out;
        }
    }
    out.message.resize(static_cast<size_t>(spec.ell));
    for (int i = 0; i < spec.ell; ++i)
        out.message[static_cast<size_t>(i)] = *tentatives[static_cast<size_t>(i)] - 1;
    return out;
}

DecodeOutcome decode_bitwise(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                             const Channel& w, const std::vector<int>& y) {
    if (static_cast<int>(y.size()) != spec.n)
        throw std::invalid_argument("decode_bitwise: length mismatch");
    std::vector<std::optional<int>> tents;
    tents.reserve(static_cast<size_t>(spec.ell) + 1);
    int pos = 0;
    for (int phase = 0; phase <= spec.ell; ++phase) {
        int len = spec.phase_lens[static_cast<size_t>(phase)];
        std::vector<int> block(y.begin() + pos, y.begin() + pos + len);
        tents.push_back(bitwise_phase_tentative(spec, books, w, phase, block));
        pos += len;
    }
    return bitwise_outcome(spec, tents);
}

SlackTerms slack_terms(int n, int ell, const Channel& w) {
    if (n < 1 || ell < 1) throw std::invalid_argument("slack_terms: n and ell must be positive");
    SlackTerms s;
    s.eps_n = 10.0 * w.input_size() * w.output_size() * std::log(std::exp(1.0) / w.min_entry()) *
              std::sqrt(std::log(1.0 + n)) / std::sqrt(static_cast<double>(n));
    s.eps_n_ell = s.eps_n * std::sqrt(1.0 + ell);
    return s;
}

} // namespace uep
