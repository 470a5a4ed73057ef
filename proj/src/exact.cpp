#include "uep/exact.hpp"

#include <cmath>
#include <functional>

namespace uep {
namespace {

// Iterates all output blocks of the given length with their probability under
// the transmitted letters.
void for_each_output_block(const Channel& w, const std::vector<int>& tx,
                           const std::function<void(const std::vector<int>&, double)>& fn) {
    const int len = static_cast<int>(tx.size());
    std::vector<int> y(static_cast<size_t>(len), 0);
    std::vector<double> prefix(static_cast<size_t>(len) + 1, 1.0);
    for (int t = 0; t < len; ++t)
        prefix[static_cast<size_t>(t) + 1] =
            prefix[static_cast<size_t>(t)] * w.prob(tx[static_cast<size_t>(t)], 0);
    while (true) {
        fn(y, prefix[static_cast<size_t>(len)]);
        int t = len - 1;
        while (t >= 0 && y[static_cast<size_t>(t)] == w.output_size() - 1) --t;
        if (t < 0) break;
        ++y[static_cast<size_t>(t)];
        for (int u = t; u < len; ++u) {
            if (u > t) y[static_cast<size_t>(u)] = 0;
            prefix[static_cast<size_t>(u) + 1] =
                prefix[static_cast<size_t>(u)] *
                w.prob(tx[static_cast<size_t>(u)], y[static_cast<size_t>(u)]);
        }
    }
}

void check_enumerable(const Channel& w, int len) {
    if (!enumerable(w, len))
        throw std::invalid_argument("exact enumeration: instance too large");
}

} // namespace

double ExactOutcomeTable::error(int msg) const {
    double e = 0.0;
    for (int v = 1; v <= msg_count; ++v)
        if (v != msg) e += prob(msg, v);
    return e;
}

bool enumerable(const Channel& w, int len, double limit) {
    return len * std::log(static_cast<double>(w.output_size())) <= std::log(limit) + 1e-12;
}

std::vector<double> mw_decision_dist(const Codebook& book, const Channel& w,
                                     const std::vector<int>& tx) {
    check_enumerable(w, book.spec.n);
    std::vector<double> dist(static_cast<size_t>(book.spec.msg_count) + 1, 0.0);
    for_each_output_block(w, tx, [&](const std::vector<int>& y, double prob) {
        std::optional<int> d = decode_mw(book, w, y);
        dist[static_cast<size_t>(d ? *d : 0)] += prob;
    });
    return dist;
}

double control_accept_prob(const Channel& w, int input_letter, int len, int accept_letter,
                           double threshold) {
    if (len == 0) return 1.0;
    const int ny = w.output_size();
    // Enumerate output compositions; the statistic depends only on counts.
    std::vector<int> counts(static_cast<size_t>(ny), 0);
    std::vector<double> log_fact(static_cast<size_t>(len) + 1, 0.0);
    for (int i = 2; i <= len; ++i)
        log_fact[static_cast<size_t>(i)] = log_fact[static_cast<size_t>(i) - 1] + std::log(i);
    double accept = 0.0;
    std::function<void(int, int)> rec = [&](int sym, int remaining) {
        if (sym == ny - 1) {
            counts[static_cast<size_t>(sym)] = remaining;
            double stat = 0.0, logp = log_fact[static_cast<size_t>(len)];
            for (int v = 0; v < ny; ++v) {
                int c = counts[static_cast<size_t>(v)];
                stat += 0.5 * std::fabs(c - len * w.prob(accept_letter, v));
                logp -= log_fact[static_cast<size_t>(c)];
                logp += c * std::log(w.prob(input_letter, v));
            }
            if (stat < threshold) accept += std::exp(logp);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[static_cast<size_t>(sym)] = c;
            rec(sym + 1, remaining - c);
        }
    };
    rec(0, len);
    return std::min(accept, 1.0);
}

ExactOutcomeTable exact_enumerate_mw(const Codebook& book, const Channel& w) {
    check_enumerable(w, book.spec.n);
    const int M = book.spec.msg_count;
    ExactOutcomeTable table;
    table.msg_count = M;
    table.block_len = book.spec.n;
    table.p.assign(static_cast<size_t>(M), std::vector<double>(static_cast<size_t>(M) + 2, 0.0));
    for (int m = 1; m <= M; ++m) {
        std::vector<int> tx(book.word(m), book.word(m) + book.spec.n);
        for_each_output_block(w, tx, [&](const std::vector<int>& y, double prob) {
            std::optional<int> d = decode_mw(book, w, y);
            size_t slot = d ? static_cast<size_t>(*d - 1) : static_cast<size_t>(M) + 1;
            table.p[static_cast<size_t>(m - 1)][slot] += prob;
        });
    }
    return table;
}

ExactOutcomeTable exact_enumerate_erasure(const ErasureCodeSpec& spec, const Codebook& inner_book,
                                          const Channel& w) {
    check_enumerable(w, spec.inner.n);
    const int M = spec.inner.msg_count;
    double accept_a = control_accept_prob(w, spec.accept_letter, spec.control_len,
                                          spec.accept_letter, spec.control_threshold);
    double accept_r = control_accept_prob(w, spec.reject_letter, spec.control_len,
                                          spec.accept_letter, spec.control_threshold);
    ExactOutcomeTable table;
    table.msg_count = M;
    table.block_len = spec.total_len();
    table.p.assign(static_cast<size_t>(M), std::vector<double>(static_cast<size_t>(M) + 2, 0.0));
    for (int m = 1; m <= M; ++m) {
        std::vector<int> tx(inner_book.word(m), inner_book.word(m) + spec.inner.n);
        std::vector<double> tent = mw_decision_dist(inner_book, w, tx);
        auto& row = table.p[static_cast<size_t>(m - 1)];
        double erase = tent[0]; // undecided tentative always ends in erasure
        for (int v = 1; v <= M; ++v) {
            double acc = v == m ? accept_a : accept_r;
            row[static_cast<size_t>(v - 1)] += tent[static_cast<size_t>(v)] * acc;
            erase += tent[static_cast<size_t>(v)] * (1.0 - acc);
        }
        row[static_cast<size_t>(M)] = erase;
    }
    return table;
}

int bitwise_linear_index(const BitwiseCodeSpec& spec, const std::vector<int>& msg) {
    int idx = 0;
    for (int i = 0; i < spec.ell; ++i)
        idx = idx * spec.msg_sizes[static_cast<size_t>(i)] + (msg[static_cast<size_t>(i)] - 1);
    return idx + 1;
}

std::vector<int> bitwise_message_of_index(const BitwiseCodeSpec& spec, int index) {
    std::vector<int> msg(static_cast<size_t>(spec.ell), 1);
    int rem = index - 1;
    for (int i = spec.ell - 1; i >= 0; --i) {
        int m = spec.msg_sizes[static_cast<size_t>(i)];
        msg[static_cast<size_t>(i)] = rem % m + 1;
        rem /= m;
    }
    return msg;
}

ExactOutcomeTable exact_enumerate_bitwise(const BitwiseCodeSpec& spec, const BitwiseBooks& books,
                                          const Channel& w) {
    for (int i = 0; i < spec.ell; ++i) check_enumerable(w, spec.phase_lens[static_cast<size_t>(i)]);
    const int M = spec.msg_vector_count();

    // Per-phase tentative distributions for every possible transmitted index.
    std::vector<std::vector<std::vector<double>>> dists(static_cast<size_t>(spec.ell));
    for (int i = 0; i < spec.ell; ++i) {
        const Codebook& book = books.sub[static_cast<size_t>(i)];
        dists[static_cast<size_t>(i)].resize(static_cast<size_t>(book.spec.msg_count) + 1);
        for (int tx = 1; tx <= book.spec.msg_count; ++tx) {
            std::vector<int> letters(book.word(tx), book.word(tx) + book.spec.n);
            dists[static_cast<size_t>(i)][static_cast<size_t>(tx)] =
                mw_decision_dist(book, w, letters);
        }
    }
    double accept_a = control_accept_prob(w, spec.accept_letter,
                                          spec.phase_lens[static_cast<size_t>(spec.ell)],
                                          spec.accept_letter, spec.control_threshold);
    double accept_r = control_accept_prob(w, spec.reject_letter,
                                          spec.phase_lens[static_cast<size_t>(spec.ell)],
                                          spec.accept_letter, spec.control_threshold);

    ExactOutcomeTable table;
    table.msg_count = M;
    table.block_len = spec.n;
    table.p.assign(static_cast<size_t>(M), std::vector<double>(static_cast<size_t>(M) + 2, 0.0));

    for (int mi = 1; mi <= M; ++mi) {
        std::vector<int> msg = bitwise_message_of_index(spec, mi);
        auto& row = table.p[static_cast<size_t>(mi - 1)];
        std::vector<int> est(static_cast<size_t>(spec.ell), 0);
        // Once some tentative hits the reserved index (or no decision), the
        // final outcome is an erasure no matter what follows; the remaining
        // branches sum to one and can be folded immediately.
        std::function<void(int, std::optional<int>, int, double)> walk =
            [&](int phase, std::optional<int> prev_tent, int prev_tx, double prob) {
                int tx = bitwise_phase_tx(spec, msg, phase, prev_tent, prev_tx);
                if (phase == spec.ell) {
                    double acc = tx == 2 ? accept_a : accept_r;
                    row[static_cast<size_t>(M)] += prob * (1.0 - acc); // control rejects
                    // control accepts: tentative = 2, erasure only if tx was 1
                    double fin = prob * acc;
                    std::vector<int> decoded(est);
                    row[static_cast<size_t>(bitwise_linear_index(spec, decoded) - 1)] += fin;
                    return;
                }
                const std::vector<double>& dist = dists[static_cast<size_t>(phase)][static_cast<size_t>(tx)];
                int sub_count = spec.msg_sizes[static_cast<size_t>(phase)] + 1;
                // undecided or reserved tentative: erasure regardless of the rest
                row[static_cast<size_t>(M)] += prob * (dist[0] + dist[1]);
                for (int v = 2; v <= sub_count; ++v) {
                    double pv = dist[static_cast<size_t>(v)];
                    if (pv == 0.0) continue;
                    est[static_cast<size_t>(phase)] = v - 1;
                    walk(phase + 1, v, tx, prob * pv);
                }
                est[static_cast<size_t>(phase)] = 0;
            };
        walk(0, std::nullopt, 0, 1.0);
    }
    return table;
}

double exact_prefix_error(const ExactOutcomeTable& table, const BitwiseCodeSpec& spec,
                          int msg_index, int layer) {
    std::vector<int> msg = bitwise_message_of_index(spec, msg_index);
    double e = 0.0;
    for (int v = 1; v <= table.msg_count; ++v) {
        std::vector<int> dec = bitwise_message_of_index(spec, v);
        bool prefix_wrong = false;
        for (int i = 0; i < layer; ++i)
            if (dec[static_cast<size_t>(i)] != msg[static_cast<size_t>(i)]) {
                prefix_wrong = true;
                break;
            }
        if (prefix_wrong) e += table.prob(msg_index, v);
    }
    return e;
}

VlcExact vlc_exact_from_table(const ExactOutcomeTable& table) {
    VlcExact v;
    v.msg_count = table.msg_count;
    v.block_len = table.block_len;
    v.pera_m.resize(static_cast<size_t>(table.msg_count));
    v.pe_m.resize(static_cast<size_t>(table.msg_count));
    v.expected_t.resize(static_cast<size_t>(table.msg_count));
    v.final_p.assign(static_cast<size_t>(table.msg_count),
                     std::vector<double>(static_cast<size_t>(table.msg_count), 0.0));
    for (int m = 1; m <= table.msg_count; ++m) {
        double pera = table.erasure(m) + table.no_decision(m);
        if (pera >= 1.0 - 1e-15)
            throw std::domain_error("vlc_exact_from_table: code never leaves the erasure state");
        v.pera_m[static_cast<size_t>(m - 1)] = pera;
        double err = 0.0;
        for (int d = 1; d <= table.msg_count; ++d) {
            double q = table.prob(m, d) / (1.0 - pera);
            v.final_p[static_cast<size_t>(m - 1)][static_cast<size_t>(d - 1)] = q;
            if (d != m) err += q;
        }
        v.pe_m[static_cast<size_t>(m - 1)] = err;
        v.expected_t[static_cast<size_t>(m - 1)] = table.block_len / (1.0 - pera);
        v.pe_overall += err / table.msg_count;
        v.expected_t_overall += v.expected_t[static_cast<size_t>(m - 1)] / table.msg_count;
    }
    return v;
}

double vlc_t_transform(const std::vector<double>& pera_m, int block_len, double lambda) {
    double rho = lambda / (1.0 - lambda);
    double rn = std::pow(rho, block_len);
    double total = 0.0;
    for (double pera : pera_m) total += (1.0 - pera) * rn / (1.0 - pera * rn);
    return total / static_cast<double>(pera_m.size());
}

} // namespace uep
