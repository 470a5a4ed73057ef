#include "uep/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "uep/rng.hpp"

namespace uep {
namespace {

struct RowSampler {
    std::vector<std::vector<double>> cdf;

    explicit RowSampler(const Channel& w) {
        cdf.resize(static_cast<size_t>(w.input_size()));
        for (int x = 0; x < w.input_size(); ++x) {
            auto& c = cdf[static_cast<size_t>(x)];
            c.resize(static_cast<size_t>(w.output_size()));
            double acc = 0.0;
            for (int y = 0; y < w.output_size(); ++y) {
                acc += w.prob(x, y);
                c[static_cast<size_t>(y)] = acc;
            }
            c.back() = 1.0;
        }
    }

    int sample(int x, double u) const {
        const auto& c = cdf[static_cast<size_t>(x)];
        return static_cast<int>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
    }
};

struct BuiltScheme {
    const Channel* w = nullptr;
    const VlcScheme* scheme = nullptr;
    RowSampler sampler;
    std::optional<Codebook> mw_book;
    std::optional<Codebook> erasure_book;
    std::optional<BitwiseBooks> bitwise_books;

    BuiltScheme(const Channel& ch, const VlcScheme& s) : w(&ch), scheme(&s), sampler(ch) {
        if (const auto* mw = std::get_if<MwCodeSpec>(&s.code)) {
            mw_book = build_mw_codebook(ch, *mw);
        } else if (const auto* er = std::get_if<ErasureCodeSpec>(&s.code)) {
            erasure_book = build_mw_codebook(ch, er->inner);
        } else {
            bitwise_books = build_bitwise_books(ch, std::get<BitwiseCodeSpec>(s.code));
        }
    }
};

void sample_block(const RowSampler& sampler, CounterRng& rng, const int* letters, int len,
                  std::vector<int>& y) {
    y.resize(static_cast<size_t>(len));
    for (int t = 0; t < len; ++t)
        y[static_cast<size_t>(t)] = sampler.sample(letters[t], rng.next_unit());
}

TrialResult run_trial(const BuiltScheme& built, int message, CounterRng& rng) {
    const Channel& w = *built.w;
    const VlcScheme& scheme = *built.scheme;
    TrialResult res;
    std::vector<int> y;

    if (const auto* mw = std::get_if<MwCodeSpec>(&scheme.code)) {
        const Codebook& book = *built.mw_book;
        sample_block(built.sampler, rng, book.word(message), mw->n, y);
        std::optional<int> d = decode_mw(book, w, y);
        res.completed = true;
        res.rounds = 1;
        res.decoded = d ? *d : 0;
        int resolved = d ? *d : 2; // fallback rule for the erasure-free code
        res.wrong_prefix = resolved == message ? 0 : 1;
        return res;
    }

    if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code)) {
        const Codebook& book = *built.erasure_book;
        std::vector<int> y2;
        for (int round = 1; round <= scheme.max_rounds; ++round) {
            res.rounds = round;
            sample_block(built.sampler, rng, book.word(message), er->inner.n, y);
            std::optional<int> tent = decode_mw(book, w, y);
            int ctrl = (tent && *tent == message) ? er->accept_letter : er->reject_letter;
            bool accepted = true;
            if (er->control_len > 0) {
                std::vector<int> ctrl_word(static_cast<size_t>(er->control_len), ctrl);
                sample_block(built.sampler, rng, ctrl_word.data(), er->control_len, y2);
                accepted = control_accepts(y2, w, er->accept_letter, er->control_threshold);
            }
            if (accepted && tent) {
                res.completed = true;
                res.decoded = *tent;
                res.wrong_prefix = *tent == message ? 0 : 1;
                return res;
            }
        }
        return res; // truncated
    }

    const BitwiseCodeSpec& spec = std::get<BitwiseCodeSpec>(scheme.code);
    const BitwiseBooks& books = *built.bitwise_books;
    std::vector<int> msg = bitwise_message_of_index(spec, message);
    std::vector<std::optional<int>> tents(static_cast<size_t>(spec.ell) + 1);
    std::vector<int> ctrl_word;
    for (int round = 1; round <= scheme.max_rounds; ++round) {
        res.rounds = round;
        std::optional<int> prev_tent;
        int prev_tx = 0;
        for (int phase = 0; phase <= spec.ell; ++phase) {
            int tx = bitwise_phase_tx(spec, msg, phase, prev_tent, prev_tx);
            int len = spec.phase_lens[static_cast<size_t>(phase)];
            const int* letters;
            if (phase == spec.ell) {
                ctrl_word.assign(static_cast<size_t>(len),
                                 tx == 2 ? spec.accept_letter : spec.reject_letter);
                letters = ctrl_word.data();
            } else {
                letters = books.sub[static_cast<size_t>(phase)].word(tx);
            }
            sample_block(built.sampler, rng, letters, len, y);
            std::optional<int> tent = bitwise_phase_tentative(spec, books, w, phase, y);
            tents[static_cast<size_t>(phase)] = tent;
            prev_tent = tent;
            prev_tx = tx;
        }
        DecodeOutcome out = bitwise_outcome(spec, tents);
        if (!out.erasure) {
            res.completed = true;
            res.decoded = bitwise_linear_index(spec, out.message);
            res.wrong_prefix = 0;
            for (int i = 0; i < spec.ell; ++i) {
                if (out.message[static_cast<size_t>(i)] != msg[static_cast<size_t>(i)]) {
                    res.wrong_prefix = i + 1;
                    break;
                }
            }
            return res;
        }
    }
    return res; // truncated
}

} // namespace

int VlcScheme::block_len() const {
    if (const auto* mw = std::get_if<MwCodeSpec>(&code)) return mw->n;
    if (const auto* er = std::get_if<ErasureCodeSpec>(&code)) return er->total_len();
    return std::get<BitwiseCodeSpec>(code).n;
}

int VlcScheme::message_count() const {
    if (const auto* mw = std::get_if<MwCodeSpec>(&code)) return mw->msg_count;
    if (const auto* er = std::get_if<ErasureCodeSpec>(&code)) return er->inner.msg_count;
    return std::get<BitwiseCodeSpec>(code).msg_vector_count();
}

int VlcScheme::layer_count() const {
    if (const auto* bw = std::get_if<BitwiseCodeSpec>(&code)) return bw->ell;
    return 1;
}

ConfidenceInterval wilson_interval(std::uint64_t successes, std::uint64_t total) {
    ConfidenceInterval ci;
    if (total == 0) {
        ci.upper = 1.0;
        return ci;
    }
    const double z = 1.959963984540054; // 95%
    double n = static_cast<double>(total);
    double phat = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    ci.estimate = phat;
    ci.lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
    ci.upper = successes == total ? 1.0 : std::min(1.0, center + half);
    return ci;
}

ConfidenceInterval SimReport::error_ci() const { return wilson_interval(errors, completed); }

ConfidenceInterval SimReport::message_error_ci(int msg) const {
    const MessageStats& s = per_message[static_cast<size_t>(msg - 1)];
    return wilson_interval(s.errors, s.completed);
}

ConfidenceInterval SimReport::message_erasure_ci(int msg) const {
    const MessageStats& s = per_message[static_cast<size_t>(msg - 1)];
    return wilson_interval(s.erased_rounds, s.rounds_total);
}

ConfidenceInterval SimReport::layer_error_ci(int layer) const {
    return wilson_interval(layer_errors[static_cast<size_t>(layer - 1)], completed);
}

double SimReport::mean_rounds(int msg) const {
    const MessageStats& s = per_message[static_cast<size_t>(msg - 1)];
    if (s.completed == 0) return 0.0;
    return static_cast<double>(s.completed_rounds) / static_cast<double>(s.completed);
}

double SimReport::mean_decode_time() const {
    std::uint64_t rounds = 0, n = 0;
    for (const auto& s : per_message) {
        rounds += s.completed_rounds;
        n += s.completed;
    }
    if (n == 0) return 0.0;
    return static_cast<double>(rounds) / static_cast<double>(n) * block_len;
}

double SimReport::mean_decode_time_se() const {
    long double sum = 0.0L, sq = 0.0L;
    std::uint64_t n = 0;
    for (const auto& s : per_message) {
        sum += static_cast<long double>(s.completed_rounds);
        sq += static_cast<long double>(s.completed_rounds_sq);
        n += s.completed;
    }
    if (n < 2) return 0.0;
    long double mean = sum / n;
    long double var = (sq - n * mean * mean) / (n - 1);
    if (var < 0.0L) var = 0.0L;
    return static_cast<double>(std::sqrt(var / n)) * block_len;
}

double SimReport::empirical_t_transform(double lambda) const {
    double rho = lambda / (1.0 - lambda);
    double total = 0.0;
    std::uint64_t n = 0;
    for (size_t r = 0; r < round_histogram.size(); ++r) {
        std::uint64_t c = round_histogram[r];
        if (c == 0) continue;
        double rounds = static_cast<double>(r + 1);
        total += static_cast<double>(c) * std::pow(rho, rounds * block_len);
        n += c;
    }
    return n == 0 ? 0.0 : total / static_cast<double>(n);
}

TrialResult run_vlc(const Channel& w, const VlcScheme& scheme, int message, std::uint64_t seed,
                    std::uint64_t trial_index) {
    if (message < 1 || message > scheme.message_count())
        throw std::invalid_argument("run_vlc: message out of range");
    if (scheme.max_rounds < 1) throw std::invalid_argument("run_vlc: max_rounds must be >= 1");
    BuiltScheme built(w, scheme);
    CounterRng rng(seed, trial_index);
    return run_trial(built, message, rng);
}

SimReport simulate(const Channel& w, const VlcScheme& scheme, const SimOptions& opt) {
    if (opt.trials < 1) throw std::invalid_argument("simulate: need at least one trial");
    if (opt.threads < 1) throw std::invalid_argument("simulate: need at least one thread");
    VlcScheme local = scheme;
    local.max_rounds = opt.max_rounds;
    BuiltScheme built(w, local);
    const int M = scheme.message_count();
    const int layers = scheme.layer_count();
    const bool matrix = M <= opt.matrix_limit;
    const size_t hist_slots = 128; // last slot aggregates longer runs

    struct Accum {
        std::vector<MessageStats> per_message;
        std::vector<std::uint64_t> layer_errors;
        std::vector<std::uint64_t> hist;
        std::vector<std::vector<std::uint64_t>> matrix;
    };
    auto make_accum = [&]() {
        Accum a;
        a.per_message.resize(static_cast<size_t>(M));
        a.layer_errors.assign(static_cast<size_t>(layers), 0);
        a.hist.assign(hist_slots, 0);
        if (matrix)
            a.matrix.assign(static_cast<size_t>(M),
                            std::vector<std::uint64_t>(static_cast<size_t>(M) + 1, 0));
        return a;
    };

    auto run_range = [&](std::uint64_t lo, std::uint64_t hi, Accum& acc) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            // the trial's own stream supplies the uniform message draw first
            CounterRng rng(opt.seed, t);
            int message = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(M)));
            TrialResult r = run_trial(built, message, rng);
            MessageStats& s = acc.per_message[static_cast<size_t>(message - 1)];
            ++s.trials;
            s.rounds_total += static_cast<std::uint64_t>(r.rounds);
            if (r.completed) {
                ++s.completed;
                s.erased_rounds += static_cast<std::uint64_t>(r.rounds - 1);
                s.completed_rounds += static_cast<std::uint64_t>(r.rounds);
                s.completed_rounds_sq +=
                    static_cast<std::uint64_t>(r.rounds) * static_cast<std::uint64_t>(r.rounds);
                if (r.wrong_prefix > 0) {
                    ++s.errors;
                    // prefix errors are nested: layers wrong_prefix..layers all count
                    for (int i = r.wrong_prefix; i <= layers; ++i)
                        ++acc.layer_errors[static_cast<size_t>(i - 1)];
                }
                size_t slot = std::min<size_t>(static_cast<size_t>(r.rounds - 1), hist_slots - 1);
                ++acc.hist[slot];
                if (matrix) ++acc.matrix[static_cast<size_t>(message - 1)][static_cast<size_t>(r.decoded)];
            } else {
                ++s.truncated;
                s.erased_rounds += static_cast<std::uint64_t>(r.rounds);
            }
        }
    };

    int threads = std::min<std::uint64_t>(static_cast<std::uint64_t>(opt.threads), opt.trials);
    std::vector<Accum> accums;
    accums.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) accums.push_back(make_accum());
    if (threads == 1) {
        run_range(0, opt.trials, accums[0]);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = opt.trials / threads;
        for (int i = 0; i < threads; ++i) {
            std::uint64_t lo = chunk * static_cast<std::uint64_t>(i);
            std::uint64_t hi = i + 1 == threads ? opt.trials : lo + chunk;
            pool.emplace_back([&, lo, hi, i]() { run_range(lo, hi, accums[static_cast<size_t>(i)]); });
        }
        for (auto& th : pool) th.join();
    }

    SimReport rep;
    rep.trials = opt.trials;
    rep.seed = opt.seed;
    rep.block_len = scheme.block_len();
    rep.msg_count = M;
    rep.layers = layers;
    rep.max_rounds = opt.max_rounds;
    rep.per_message.resize(static_cast<size_t>(M));
    rep.layer_errors.assign(static_cast<size_t>(layers), 0);
    rep.round_histogram.assign(hist_slots, 0);
    if (matrix)
        rep.decode_matrix.assign(static_cast<size_t>(M),
                                 std::vector<std::uint64_t>(static_cast<size_t>(M) + 1, 0));
    for (const Accum& a : accums) {
        for (int m = 0; m < M; ++m) {
            MessageStats& dst = rep.per_message[static_cast<size_t>(m)];
            const MessageStats& src = a.per_message[static_cast<size_t>(m)];
            dst.trials += src.trials;
            dst.completed += src.completed;
            dst.errors += src.errors;
            dst.truncated += src.truncated;
            dst.rounds_total += src.rounds_total;
            dst.erased_rounds += src.erased_rounds;
            dst.completed_rounds += src.completed_rounds;
            dst.completed_rounds_sq += src.completed_rounds_sq;
        }
        for (int i = 0; i < layers; ++i) rep.layer_errors[static_cast<size_t>(i)] += a.layer_errors[static_cast<size_t>(i)];
        for (size_t i = 0; i < hist_slots; ++i) rep.round_histogram[i] += a.hist[i];
        if (matrix)
            for (int m = 0; m < M; ++m)
                for (int v = 0; v <= M; ++v)
                    rep.decode_matrix[static_cast<size_t>(m)][static_cast<size_t>(v)] +=
                        a.matrix[static_cast<size_t>(m)][static_cast<size_t>(v)];
    }
    for (const MessageStats& s : rep.per_message) {
        rep.completed += s.completed;
        rep.truncated += s.truncated;
        rep.errors += s.errors;
    }
    return rep;
}

ExactOutcomeTable exact_table(const Channel& w, const VlcScheme& scheme) {
    if (const auto* mw = std::get_if<MwCodeSpec>(&scheme.code)) {
        Codebook book = build_mw_codebook(w, *mw);
        return exact_enumerate_mw(book, w);
    }
    if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code)) {
        Codebook book = build_mw_codebook(w, er->inner);
        return exact_enumerate_erasure(*er, book, w);
    }
    const BitwiseCodeSpec& spec = std::get<BitwiseCodeSpec>(scheme.code);
    BitwiseBooks books = build_bitwise_books(w, spec);
    return exact_enumerate_bitwise(spec, books, w);
}

} // namespace uep
