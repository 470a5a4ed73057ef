#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace uep {

// Probability vector on a finite alphabet. Entries may be zero (point masses
// and empirical distributions are legal); channels impose stricter positivity
// on their rows separately.
class Distribution {
public:
    Distribution() = default;

    // Validates: no negative entries, total mass 1 within kMassTol.
    explicit Distribution(std::vector<double> probs);

    // Divides by the current total; rejects non-positive totals.
    static Distribution normalized(std::vector<double> weights);

    // Point mass on `letter` over an alphabet of `size` symbols.
    static Distribution point_mass(int size, int letter);

    static Distribution uniform(int size);

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[static_cast<size_t>(i)]; }
    const std::vector<double>& probs() const { return p_; }

    static constexpr double kMassTol = 1e-12;

private:
    struct Unchecked {};
    Distribution(std::vector<double> probs, Unchecked) : p_(std::move(probs)) {}

    std::vector<double> p_;

    friend Distribution unchecked_distribution(std::vector<double>);
};

// Internal fast path for vectors already known to be valid (marginals,
// mixtures of valid distributions). Skips the mass check.
Distribution unchecked_distribution(std::vector<double> probs);

// Symbol counts over an alphabet; length is the sequence length.
struct EmpiricalDist {
    std::vector<std::int64_t> counts;
    std::int64_t length = 0;

    Distribution normalized() const;
};

// Counts symbol occurrences of `seq` over an alphabet of `alphabet_size`
// symbols. Rejects empty sequences and out-of-range symbols.
EmpiricalDist empirical(const std::vector<int>& seq, int alphabet_size);

// Total variation distance: (1/2) sum |p - q|, in [0,1].
double total_variation(const Distribution& p, const Distribution& q);

// Kullback-Leibler divergence sum p ln(p/q) in nats, with 0 ln 0 = 0.
// Throws std::domain_error if q vanishes where p does not.
double kl_divergence(const Distribution& p, const Distribution& q);

// Binary entropy -s ln s - (1-s) ln(1-s),0 at both endpoints.
double binary_entropy(double s);

// Shannon entropy of p in nats.
double entropy(const Distribution& p);

} // namespace uep
