#include "uep/distribution.hpp"

#include <cmath>
#include <numeric>

namespace uep {

Distribution::Distribution(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty())
        throw std::invalid_argument("distribution: empty alphabet");
    double sum = 0.0;
    for (double v : p_) {
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("distribution: negative or non-finite entry");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > kMassTol)
        throw std::invalid_argument("distribution: mass differs from 1 beyond tolerance");
}

Distribution Distribution::normalized(std::vector<double> weights) {
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(sum > 0.0))
        throw std::invalid_argument("distribution: non-positive total mass");
    for (double& v : weights) v /= sum;
    return unchecked_distribution(std::move(weights));
}

Distribution Distribution::point_mass(int size, int letter) {
    if (size < 1 || letter < 0 || letter >= size)
        throw std::invalid_argument("point_mass: letter out of range");
    std::vector<double> p(static_cast<size_t>(size), 0.0);
    p[static_cast<size_t>(letter)] = 1.0;
    return unchecked_distribution(std::move(p));
}

Distribution Distribution::uniform(int size) {
    if (size < 1)
        throw std::invalid_argument("uniform: empty alphabet");
    return unchecked_distribution(std::vector<double>(static_cast<size_t>(size), 1.0 / size));
}

Distribution unchecked_distribution(std::vector<double> probs) {
    return Distribution(std::move(probs), Distribution::Unchecked{});
}

Distribution EmpiricalDist::normalized() const {
    if (length <= 0)
        throw std::domain_error("empirical: zero-length sequence");
    std::vector<double> p(counts.size());
    for (size_t i = 0; i < counts.size(); ++i)
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(length);
    return unchecked_distribution(std::move(p));
}

EmpiricalDist empirical(const std::vector<int>& seq, int alphabet_size) {
    if (seq.empty())
        throw std::invalid_argument("empirical: empty sequence");
    if (alphabet_size < 1)
        throw std::invalid_argument("empirical: empty alphabet");
    EmpiricalDist e;
    e.counts.assign(static_cast<size_t>(alphabet_size), 0);
    for (int s : seq) {
        if (s < 0 || s >= alphabet_size)
            throw std::invalid_argument("empirical: symbol out of range");
        ++e.counts[static_cast<size_t>(s)];
    }
    e.length = static_cast<std::int64_t>(seq.size());
    return e;
}

double total_variation(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("total_variation: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
    return 0.5 * s;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0)
            throw std::domain_error("kl_divergence: q vanishes on the support of p");
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s < 0.0 ? 0.0 : s; // clip float noise; KL is non-negative
}

double binary_entropy(double s) {
    if (s < 0.0 || s > 1.0)
        throw std::domain_error("binary_entropy: argument outside [0,1]");
    double h = 0.0;
    if (s > 0.0) h -= s * std::log(s);
    if (s < 1.0) h -= (1.0 - s) * std::log(1.0 - s);
    return h;
}

double entropy(const Distribution& p) {
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h;
}

} // namespace uep
