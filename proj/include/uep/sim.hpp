#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "uep/codec.hpp"
#include "uep/exact.hpp"

namespace uep {

// Variable-length wrapper: a fixed-length code with erasures repeated until a
// non-erasure decision. A plain message-wise spec simulates as a fixed-length
// code (single round, undecided outputs resolved by the fallback rule).
struct VlcScheme {
    std::variant<MwCodeSpec, ErasureCodeSpec, BitwiseCodeSpec> code;
    int max_rounds = 10000;

    int block_len() const;
    int message_count() const;
    int layer_count() const; // 1 unless bit-wise
};

struct ConfidenceInterval {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Wilson score interval at 95% (well behaved near zero counts).
ConfidenceInterval wilson_interval(std::uint64_t successes, std::uint64_t total);

struct MessageStats {
    std::uint64_t trials = 0;
    std::uint64_t completed = 0;
    std::uint64_t errors = 0;          // completed and decoded incorrectly
    std::uint64_t truncated = 0;       // gave up after max_rounds erasures
    std::uint64_t rounds_total = 0;    // all rounds including truncated trials
    std::uint64_t erased_rounds = 0;   // rounds_total - completed
    std::uint64_t completed_rounds = 0;     // rounds over completed trials
    std::uint64_t completed_rounds_sq = 0;  // squared rounds over completed trials
};

struct SimReport {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    int block_len = 0;
    int msg_count = 0;
    int layers = 1;
    int max_rounds = 0;
    std::uint64_t completed = 0;
    std::uint64_t truncated = 0;
    std::uint64_t errors = 0; // completed trials decoded incorrectly

    std::vector<MessageStats> per_message;
    std::vector<std::uint64_t> layer_errors; // completed trials, wrong prefix i+1
    std::vector<std::uint64_t> round_histogram; // rounds -> count, last slot overflow
    // raw decode tallies (slot 0: undecided, v: decoded v), kept when the
    // message set is small enough to audit against the exact oracle
    std::vector<std::vector<std::uint64_t>> decode_matrix;

    ConfidenceInterval error_ci() const;
    ConfidenceInterval message_error_ci(int msg) const;
    ConfidenceInterval message_erasure_ci(int msg) const; // per-round erasure
    ConfidenceInterval layer_error_ci(int layer) const;
    double mean_rounds(int msg) const;
    double mean_decode_time() const;
    double mean_decode_time_se() const;
    // empirical E[(lambda/(1-lambda))^T] over completed trials
    double empirical_t_transform(double lambda) const;
};

struct SimOptions {
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    int max_rounds = 10000;
    int matrix_limit = 64; // track the decode matrix up to this many messages
};

struct TrialResult {
    bool completed = false;
    int rounds = 0;
    // decoded message (linear index for bit-wise codes); 0 when undecided
    int decoded = 0;
    int wrong_prefix = 0; // first wrong layer (1-based), 0 if all correct
};

// Runs the repeat-until-non-erasure loop for one message with the trial's own
// counter-based randomness stream.
TrialResult run_vlc(const Channel& w, const VlcScheme& scheme, int message,
                    std::uint64_t seed, std::uint64_t trial_index);

// Monte Carlo over uniformly drawn messages; the report is a pure function of
// (spec, trials, seed) regardless of the thread count.
SimReport simulate(const Channel& w, const VlcScheme& scheme, const SimOptions& opt);

// Exact-oracle analogue of `simulate` for enumerable instances.
ExactOutcomeTable exact_table(const Channel& w, const VlcScheme& scheme);

} // namespace uep
