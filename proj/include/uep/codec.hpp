#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "uep/channel.hpp"
#include "uep/exponents.hpp"

namespace uep {

// Fixed-length message-wise code: codeword 1 is x1 repeated for the first
// floor(tau n) uses and x2 for the rest; codewords 2..msg_count are sampled
// i.i.d. from p1 / p2 per segment, reproducibly from the seed. Messages are
// 1-based throughout; input letters are 0-based alphabet indices.
struct MwCodeSpec {
    int n = 0;
    double tau = 1.0;
    int x1 = 0, x2 = 0;
    Distribution p1, p2;
    int msg_count = 2;
    std::uint64_t seed = 0;
    double threshold = 0.0;

    // floor(tau n), nudged so that exact products are not lost to rounding
    int n_tau() const;
};

// delta_r = |X||Y| sqrt(n ln(1+n))
double default_mw_threshold(const Channel& w, int n);
// delta_j = |X||Y| sqrt(5 n_j ln(1+n)) for the two-phase erasure construction
double erasure_phase_threshold(const Channel& w, int phase_len, int total_len);
// delta_i = |X||Y| sqrt(4 n_i ln(1+n)) for the multi-phase construction
double bitwise_phase_threshold(const Channel& w, int phase_len, int total_len);

// Fills the time-sharing plan from the J(rate)-optimal witness.
MwCodeSpec make_mw_spec(const Channel& w, const JCurve& j, int n, double rate, int msg_count,
                        std::uint64_t seed);

struct Codebook {
    MwCodeSpec spec;
    int n_tau = 0;
    std::vector<int> words; // msg_count x n, row-major
    Distribution q1, q2;    // output marginals of p1, p2
    Distribution joint1, joint2; // p_i(x) W(y|x) over X x Y, row-major
    std::vector<double> cdf1, cdf2;

    const int* word(int msg) const { return &words[static_cast<size_t>(msg - 1) * spec.n]; }
};

Codebook build_mw_codebook(const Channel& w, const MwCodeSpec& spec);

// Weighted two-segment total variation of the output empirical distributions
// against (q1, q2); the decoding region of message 1 is {statistic >= threshold}.
double mw_marginal_statistic(const Codebook& book, const Channel& w, const std::vector<int>& y);

// Weighted two-segment total variation of the joint (codeword, output)
// empirical distribution against (p1 W, p2 W); "typical" means < threshold.
double mw_joint_statistic(const Codebook& book, const Channel& w, int msg,
                          const std::vector<int>& y);

// Typicality decoder: message 1 iff the marginal statistic clears the
// threshold; otherwise the unique message whose codeword is jointly typical
// with y; otherwise no decision (nullopt).
std::optional<int> decode_mw(const Codebook& book, const Channel& w, const std::vector<int>& y);

// Total decoder for the erasure-free code: undecided outputs fall back to
// message 2 (any fixed choice preserves the error bounds).
int decode_mw_total(const Codebook& book, const Channel& w, const std::vector<int>& y);

// Control phase: accept iff len(y) * TV(emp(y), W_row(accept_letter)) < threshold.
bool control_accepts(const std::vector<int>& y_ctrl, const Channel& w, int accept_letter,
                     double threshold);

// Two-phase code with erasures: an inner message-wise code followed by a
// Yamamoto-Itoh style confirm/reject phase.
struct ErasureCodeSpec {
    MwCodeSpec inner;
    int control_len = 0;
    double control_threshold = 0.0;
    int accept_letter = 0, reject_letter = 0;
    double design_rate = 0.0;     // nats/use over the full block
    double design_exponent = 0.0; // target overall error exponent

    int total_len() const { return inner.n + control_len; }
};

// n1 = ceil((1 - E/D) n); the inner plan is the J-optimal witness at the
// boosted rate (n/n1) R; thresholds use the exact construction constants.
ErasureCodeSpec make_erasure_spec(const Channel& w, const JCurve& j, int n, double rate,
                                  double exponent, int msg_count, std::uint64_t seed);

// Transmitter side: inner codeword, then accept_letter if the tentative
// decision matches the message, reject_letter otherwise.
std::vector<int> encode_erasure(const ErasureCodeSpec& spec, const Codebook& inner_book,
                                int message, std::optional<int> tentative);

struct ErasureDecodeResult {
    std::optional<int> tentative; // inner decoder output (nullopt = no decision)
    bool accepted = false;
    std::optional<int> message; // nullopt = erasure
};

ErasureDecodeResult decode_erasure(const ErasureCodeSpec& spec, const Codebook& inner_book,
                                   const Channel& w, const std::vector<int>& y);

// Multi-phase bit-wise code: ell message phases with one reserved rejection
// symbol each (index 1), then a control phase.
struct BitwiseCodeSpec {
    int n = 0;
    int ell = 0;
    std::vector<int> msg_sizes;      // |M_i|
    std::vector<int> phase_lens;     // ell+1 entries, control phase last
    std::vector<MwCodeSpec> sub;     // per-phase codes with msg_count = |M_i|+1
    double control_threshold = 0.0;
    int accept_letter = 0, reject_letter = 0;
    std::vector<double> design_phis; // time-sharing fractions used at build

    int msg_vector_count() const;
};

// n_i = floor(phi_i n) for the message phases, the control phase takes the
// remainder; per-phase plans are J-optimal at rate_i / phi_i.
BitwiseCodeSpec make_bitwise_spec(const Channel& w, const JCurve& j, int n,
                                  const std::vector<int>& msg_sizes,
                                  const std::vector<double>& phis, std::uint64_t seed);

struct BitwiseBooks {
    std::vector<Codebook> sub;
};

BitwiseBooks build_bitwise_books(const Channel& w, const BitwiseCodeSpec& spec);

// Transmitted index of phase `phase` (0-based; phase == ell is the control
// phase): 1 + indicator(previous tentative matched the previously sent
// index) * m_phase, with the reserved index 1 signalling rejection.
int bitwise_phase_tx(const BitwiseCodeSpec& spec, const std::vector<int>& message, int phase,
                     std::optional<int> prev_tentative, int prev_tx);

// Letters transmitted in a phase given its transmitted index.
std::vector<int> bitwise_phase_letters(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                                       int phase, int tx_index);

// Receiver-side tentative decision of one phase.
std::optional<int> bitwise_phase_tentative(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                                           const Channel& w, int phase,
                                           const std::vector<int>& y_block);

struct DecodeOutcome {
    bool erasure = false;
    std::vector<int> message; // 1-based sub-messages; empty when erasure
};

// Erasure unless every tentative differs from the reserved index (and every
// phase actually decided); otherwise sub-message i is tentative_i - 1.
DecodeOutcome bitwise_outcome(const BitwiseCodeSpec& spec,
                              const std::vector<std::optional<int>>& tentatives);

// Decodes a full received block by recomputing the per-phase tentatives.
DecodeOutcome decode_bitwise(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                             const Channel& w, const std::vector<int>& y);

// Non-asymptotic slack terms of the achievability bounds:
// eps_n = 10 |X||Y| ln(e/lambda) sqrt(ln(1+n)) / sqrt(n),
// eps_{n,l} = eps_n sqrt(1+l).
struct SlackTerms {
    double eps_n = 0.0;
    double eps_n_ell = 0.0;
};

SlackTerms slack_terms(int n, int ell, const Channel& w);

} // namespace uep
