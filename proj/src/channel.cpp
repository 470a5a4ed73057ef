#include "uep/channel.hpp"

#include <algorithm>
#include <cmath>

namespace uep {

Channel::Channel(int input_size, int output_size, std::vector<double> row_major)
    : nx_(input_size), ny_(output_size), m_(std::move(row_major)) {
    if (nx_ < 2 || nx_ > kMaxAlphabet || ny_ < 2 || ny_ > kMaxAlphabet)
        throw std::invalid_argument("channel: alphabet sizes must be in [2, 64]");
    if (m_.size() != static_cast<size_t>(nx_) * static_cast<size_t>(ny_))
        throw std::invalid_argument("channel: matrix size mismatch");
    for (int x = 0; x < nx_; ++x) {
        double sum = 0.0;
        for (int y = 0; y < ny_; ++y) {
            double v = m_[static_cast<size_t>(x * ny_ + y)];
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument("channel: transition probabilities must be strictly positive");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("channel: row sum differs from 1 beyond 1e-9");
        for (int y = 0; y < ny_; ++y) m_[static_cast<size_t>(x * ny_ + y)] /= sum;
    }
    lambda_ = *std::min_element(m_.begin(), m_.end());
    rows_.reserve(static_cast<size_t>(nx_));
    for (int x = 0; x < nx_; ++x)
        rows_.push_back(unchecked_distribution(std::vector<double>(
            m_.begin() + static_cast<long>(x) * ny_, m_.begin() + static_cast<long>(x + 1) * ny_)));
    dmax_ = max_divergence(*this);
    capacity_ = capacity(*this, 1e-11);
}

Distribution Channel::output_marginal(const Distribution& input) const {
    if (input.size() != nx_)
        throw std::invalid_argument("output_marginal: dimension mismatch");
    std::vector<double> q(static_cast<size_t>(ny_), 0.0);
    for (int x = 0; x < nx_; ++x) {
        double px = input[x];
        if (px == 0.0) continue;
        for (int y = 0; y < ny_; ++y) q[static_cast<size_t>(y)] += px * prob(x, y);
    }
    return unchecked_distribution(std::move(q));
}

Distribution Channel::joint(const Distribution& input) const {
    if (input.size() != nx_)
        throw std::invalid_argument("joint: dimension mismatch");
    std::vector<double> j(static_cast<size_t>(nx_) * ny_, 0.0);
    for (int x = 0; x < nx_; ++x)
        for (int y = 0; y < ny_; ++y)
            j[static_cast<size_t>(x * ny_ + y)] = input[x] * prob(x, y);
    return unchecked_distribution(std::move(j));
}

double mutual_information(const Distribution& input, const Channel& w) {
    if (input.size() != w.input_size())
        throw std::invalid_argument("mutual_information: dimension mismatch");
    Distribution q = w.output_marginal(input);
    double info = 0.0;
    for (int x = 0; x < w.input_size(); ++x) {
        if (input[x] == 0.0) continue;
        info += input[x] * kl_divergence(w.row(x), q);
    }
    return info < 0.0 ? 0.0 : info;
}

CapacityResult capacity(const Channel& w, double tol) {
    if (!(tol > 0.0))
        throw std::invalid_argument("capacity: tolerance must be positive");
    const int nx = w.input_size();
    std::vector<double> p(static_cast<size_t>(nx), 1.0 / nx);
    std::vector<double> d(static_cast<size_t>(nx), 0.0);
    double lower = 0.0, upper = 0.0;
    const int max_iters = 200000;
    for (int it = 0; it < max_iters; ++it) {
        Distribution q = w.output_marginal(unchecked_distribution(p));
        lower = 0.0;
        upper = 0.0;
        for (int x = 0; x < nx; ++x) {
            d[static_cast<size_t>(x)] = kl_divergence(w.row(x), q);
            lower += p[static_cast<size_t>(x)] * d[static_cast<size_t>(x)];
            upper = std::max(upper, d[static_cast<size_t>(x)]);
        }
        if (upper - lower <= tol) break;
        double norm = 0.0;
        for (int x = 0; x < nx; ++x) {
            p[static_cast<size_t>(x)] *= std::exp(d[static_cast<size_t>(x)] - upper);
            norm += p[static_cast<size_t>(x)];
        }
        for (double& v : p) v /= norm;
    }
    CapacityResult r;
    r.gap = upper - lower;
    r.capacity_nats = std::max(0.0, 0.5 * (upper + lower));
    r.input = Distribution::normalized(std::move(p));
    return r;
}

MaxDivergenceResult max_divergence(const Channel& w) {
    MaxDivergenceResult best{0.0, 0, w.input_size() > 1 ? 1 : 0};
    bool first = true;
    for (int x = 0; x < w.input_size(); ++x) {
        for (int xt = 0; xt < w.input_size(); ++xt) {
            if (x == xt) continue;
            double v = kl_divergence(w.row(x), w.row(xt));
            if (first || v > best.value_nats) {
                best = {v, x, xt};
                first = false;
            }
        }
    }
    return best;
}

Channel make_bsc(double crossover) {
    if (!(crossover > 0.0) || !(crossover < 1.0))
        throw std::invalid_argument("make_bsc: crossover must be in (0,1)");
    return Channel(2, 2, {1.0 - crossover, crossover, crossover, 1.0 - crossover});
}

} // namespace uep
