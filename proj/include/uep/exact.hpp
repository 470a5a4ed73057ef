#pragma once

#include <vector>

#include "uep/codec.hpp"

namespace uep {

// Exact conditional outcome probabilities of a fixed-length code, computed by
// summing channel products over all output strings (per phase). Outcome index
// v-1 for decoding to message v, then one slot for erasure and one for the
// undecided output of the erasure-free decoder.
struct ExactOutcomeTable {
    int msg_count = 0;
    int block_len = 0;
    std::vector<std::vector<double>> p; // [message-1][outcome]

    double prob(int msg, int decoded) const { return p[static_cast<size_t>(msg - 1)][static_cast<size_t>(decoded - 1)]; }
    double erasure(int msg) const { return p[static_cast<size_t>(msg - 1)][static_cast<size_t>(msg_count)]; }
    double no_decision(int msg) const { return p[static_cast<size_t>(msg - 1)][static_cast<size_t>(msg_count) + 1]; }
    // Probability of decoding to some wrong message (erasure and no-decision
    // excluded).
    double error(int msg) const;
};

// Guard shared by all enumerations: |Y|^len blocks must stay enumerable.
bool enumerable(const Channel& w, int len, double limit = 1e7);

// Distribution of the message-wise tentative decision over all output blocks
// given the transmitted letters; index 0 is "no decision", v >= 1 decodes v.
std::vector<double> mw_decision_dist(const Codebook& book, const Channel& w,
                                     const std::vector<int>& tx);

// Exact acceptance probability of the control test under a constant input
// letter, via multinomial enumeration of output compositions.
double control_accept_prob(const Channel& w, int input_letter, int len, int accept_letter,
                           double threshold);

ExactOutcomeTable exact_enumerate_mw(const Codebook& book, const Channel& w);
ExactOutcomeTable exact_enumerate_erasure(const ErasureCodeSpec& spec, const Codebook& inner_book,
                                          const Channel& w);
ExactOutcomeTable exact_enumerate_bitwise(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                                          const Channel& w);

// Mixed-radix packing of 1-based sub-message vectors, first layer most
// significant; results are 1-based message indices.
int bitwise_linear_index(const BitwiseCodeSpec& spec, const std::vector<int>& msg);
std::vector<int> bitwise_message_of_index(const BitwiseCodeSpec& spec, int index);

// Exact P(est^layer wrong, est != erasure | msg) for a bit-wise table.
double exact_prefix_error(const ExactOutcomeTable& table, const BitwiseCodeSpec& spec,
                          int msg_index, int layer);

// Repeat-until-non-erasure characteristics derived exactly from a fixed-length
// erasure table: geometric rounds with success probability 1 - P_era(m).
struct VlcExact {
    int msg_count = 0;
    int block_len = 0;
    std::vector<double> pera_m;
    std::vector<double> pe_m;       // final conditional error probabilities
    std::vector<double> expected_t; // n / (1 - P_era(m))
    std::vector<std::vector<double>> final_p; // final decode distribution per message
    double pe_overall = 0.0;        // uniform average
    double expected_t_overall = 0.0;
};

VlcExact vlc_exact_from_table(const ExactOutcomeTable& table);

// E[(lambda/(1-lambda))^T] for geometric rounds of length block_len.
double vlc_t_transform(const std::vector<double>& pera_m, int block_len, double lambda);

} // namespace uep
