#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uep/distribution.hpp"

namespace uep {

struct CapacityResult {
    double capacity_nats = 0.0;
    Distribution input; // a maximizing input distribution
    double gap = 0.0;   // certified duality gap at termination
};

struct MaxDivergenceResult {
    double value_nats = 0.0;
    int accept_letter = 0; // x whose output row is the KL numerator
    int reject_letter = 0; // x-tilde in the denominator
};

// Discrete memoryless channel with strictly positive transition matrix.
// Rows are renormalized to machine precision at construction; the raw row
// sums must already be within 1e-9 of 1. Alphabets are limited to [2, 64].
class Channel {
public:
    Channel(int input_size, int output_size, std::vector<double> row_major);

    int input_size() const { return nx_; }
    int output_size() const { return ny_; }

    double prob(int x, int y) const { return m_[static_cast<size_t>(x * ny_ + y)]; }
    const Distribution& row(int x) const { return rows_[static_cast<size_t>(x)]; }

    double min_entry() const { return lambda_; }
    double capacity_nats() const { return capacity_.capacity_nats; }
    const Distribution& capacity_input() const { return capacity_.input; }
    double d_max_nats() const { return dmax_.value_nats; }
    int accept_letter() const { return dmax_.accept_letter; }
    int reject_letter() const { return dmax_.reject_letter; }

    // Output marginal q(y) = sum_x p(x) W(y|x).
    Distribution output_marginal(const Distribution& input) const;

    // Joint distribution over X x Y (row-major), as a flat Distribution.
    Distribution joint(const Distribution& input) const;

    static constexpr int kMaxAlphabet = 64;

private:
    int nx_ = 0, ny_ = 0;
    std::vector<double> m_; // row-major, renormalized
    std::vector<Distribution> rows_;
    double lambda_ = 0.0;
    MaxDivergenceResult dmax_;
    CapacityResult capacity_;
};

// Mutual information I(P;W) in nats.
double mutual_information(const Distribution& input, const Channel& w);

// Channel capacity by alternating maximization with a certified duality-gap
// stopping rule: returns C with |C - C*| <= tol/2 and a maximizing input.
CapacityResult capacity(const Channel& w, double tol = 1e-10);

// D = max over ordered input pairs of KL(row_x || row_xtilde); ties broken by
// the lexicographically smallest (x, xtilde).
MaxDivergenceResult max_divergence(const Channel& w);

// Binary symmetric channel with crossover probability p in (0,1).
Channel make_bsc(double crossover);

} // namespace uep
