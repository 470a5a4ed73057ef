#include <cmath>
#include <doctest.h>

#include "uep/io.hpp"
#include "uep/sim.hpp"

using namespace uep;

namespace {

const Channel& bsc10() {
    static Channel w = make_bsc(0.1);
    return w;
}

MwCodeSpec inner_spec(int n, int msg_count, std::uint64_t seed, double threshold) {
    MwCodeSpec s;
    s.n = n;
    s.tau = 0.5;
    s.x1 = 0;
    s.x2 = 1;
    s.p1 = Distribution({0.5, 0.5});
    s.p2 = Distribution({0.3, 0.7});
    s.msg_count = msg_count;
    s.seed = seed;
    s.threshold = threshold;
    return s;
}

// tiny erasure code with enough noise that every outcome is visited
VlcScheme noisy_scheme() {
    ErasureCodeSpec spec;
    spec.inner = inner_spec(4, 3, 11, 1.8);
    spec.control_len = 2;
    spec.control_threshold = 1.0;
    spec.accept_letter = bsc10().accept_letter();
    spec.reject_letter = bsc10().reject_letter();
    spec.design_rate = std::log(3.0) / 6.0;
    spec.design_exponent = 0.2;
    VlcScheme s;
    s.code = spec;
    return s;
}

} // namespace

TEST_CASE("run_vlc: degenerate no-erasure configuration always stops at one round") {
    // inner threshold zero puts every output in the first decoding region and
    // an unreachable control threshold always accepts
    ErasureCodeSpec spec;
    spec.inner = inner_spec(3, 2, 5, 0.0);
    spec.control_len = 2;
    spec.control_threshold = 1e9;
    spec.accept_letter = 0;
    spec.reject_letter = 1;
    VlcScheme scheme;
    scheme.code = spec;
    for (std::uint64_t t = 0; t < 50; ++t) {
        TrialResult r = run_vlc(bsc10(), scheme, 1 + static_cast<int>(t % 2), 9, t);
        CHECK(r.completed);
        CHECK(r.rounds == 1);
        CHECK(r.decoded == 1); // everything decodes to the first message
    }
}

TEST_CASE("run_vlc: always-erasing configuration reports truncation") {
    ErasureCodeSpec spec;
    spec.inner = inner_spec(3, 2, 5, 0.0);
    spec.control_len = 2;
    spec.control_threshold = 0.0; // statistic is never below zero: always reject
    spec.accept_letter = 0;
    spec.reject_letter = 1;
    VlcScheme scheme;
    scheme.code = spec;
    scheme.max_rounds = 7;
    TrialResult r = run_vlc(bsc10(), scheme, 1, 3, 0);
    CHECK_FALSE(r.completed);
    CHECK(r.rounds == 7);

    SimOptions opt;
    opt.trials = 25;
    opt.seed = 3;
    opt.max_rounds = 7;
    SimReport rep = simulate(bsc10(), scheme, opt);
    CHECK(rep.truncated == 25);
    CHECK(rep.completed == 0);
}

TEST_CASE("simulate: single trial gives a degenerate report") {
    SimOptions opt;
    opt.trials = 1;
    opt.seed = 42;
    SimReport rep = simulate(bsc10(), noisy_scheme(), opt);
    CHECK(rep.trials == 1);
    CHECK(rep.completed + rep.truncated == 1);
    std::uint64_t total = 0;
    for (const auto& s : rep.per_message) total += s.trials;
    CHECK(total == 1);
}

TEST_CASE("simulate: report is identical for 1 and 8 threads") {
    SimOptions a;
    a.trials = 20000;
    a.seed = 777;
    a.threads = 1;
    SimOptions b = a;
    b.threads = 8;
    SimReport ra = simulate(bsc10(), noisy_scheme(), a);
    SimReport rb = simulate(bsc10(), noisy_scheme(), b);
    CHECK(report_to_json(ra).dump() == report_to_json(rb).dump());
}

TEST_CASE("exact oracle: normalization and equivalence with Monte Carlo") {
    VlcScheme scheme = noisy_scheme();
    ExactOutcomeTable table = exact_table(bsc10(), scheme);
    for (int m = 1; m <= table.msg_count; ++m) {
        double total = 0.0;
        for (double v : table.p[static_cast<size_t>(m - 1)]) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    SimOptions opt;
    opt.trials = 1000000;
    opt.seed = 2024;
    SimReport rep = simulate(bsc10(), scheme, opt);
    VlcExact vlc = vlc_exact_from_table(table);
    for (int m = 1; m <= table.msg_count; ++m) {
        const MessageStats& s = rep.per_message[static_cast<size_t>(m - 1)];
        // final conditional error vs exact VLC error
        double pe = vlc.pe_m[static_cast<size_t>(m - 1)];
        double se = std::sqrt(pe * (1.0 - pe) / static_cast<double>(s.completed));
        double herr = static_cast<double>(s.errors) / static_cast<double>(s.completed);
        CHECK(std::fabs(herr - pe) <= 4.0 * se + 1e-9);
        // per-round erasure vs exact table erasure
        double pera = vlc.pera_m[static_cast<size_t>(m - 1)];
        double se2 = std::sqrt(pera * (1.0 - pera) / static_cast<double>(s.rounds_total));
        double hera = static_cast<double>(s.erased_rounds) / static_cast<double>(s.rounds_total);
        CHECK(std::fabs(hera - pera) <= 4.0 * se2);
    }
}

TEST_CASE("vlc identities: geometric rounds and the error quotient") {
    VlcScheme scheme = noisy_scheme();
    ExactOutcomeTable table = exact_table(bsc10(), scheme);
    VlcExact vlc = vlc_exact_from_table(table);

    SimOptions opt;
    opt.trials = 400000;
    opt.seed = 555;
    SimReport rep = simulate(bsc10(), scheme, opt);
    for (int m = 1; m <= table.msg_count; ++m) {
        const MessageStats& s = rep.per_message[static_cast<size_t>(m - 1)];
        double pera = vlc.pera_m[static_cast<size_t>(m - 1)];
        double expect_rounds = 1.0 / (1.0 - pera);
        double mean_rounds = rep.mean_rounds(m);
        // SD of the geometric round count, then a 4-sigma band on the mean
        double sd = std::sqrt(pera) / (1.0 - pera);
        CHECK(std::fabs(mean_rounds - expect_rounds) <=
              4.0 * sd / std::sqrt(static_cast<double>(s.completed)) + 1e-9);

        // P(error | m) = Pem_fixed / (1 - Pera | m) from the fixed-code table
        double fixed_err = table.error(m);
        CHECK(vlc.pe_m[static_cast<size_t>(m - 1)] ==
              doctest::Approx(fixed_err / (1.0 - pera)).epsilon(1e-12));
    }

    // E[T] identity on the expected decoding time
    double expect_t = vlc.expected_t_overall;
    CHECK(std::fabs(rep.mean_decode_time() - expect_t) <=
          5.0 * rep.mean_decode_time_se() + 1e-9);
}

TEST_CASE("prefix monotonicity of layer errors in bit-wise reports") {
    const Channel& w = bsc10();
    JCurve j(w);
    BitwiseCodeSpec spec = make_bitwise_spec(w, j, 9, {2, 2}, {0.34, 0.34}, 13);
    // loosen thresholds so that errors and erasures both occur
    spec.sub[0].threshold = 1.4;
    spec.sub[1].threshold = 1.4;
    spec.control_threshold = 1.2;
    VlcScheme scheme;
    scheme.code = spec;
    SimOptions opt;
    opt.trials = 50000;
    opt.seed = 99;
    SimReport rep = simulate(w, scheme, opt);
    REQUIRE(rep.layers == 2);
    CHECK(rep.layer_errors[0] <= rep.layer_errors[1]);
    CHECK(rep.completed > 0);

    // exact bit-wise table agrees with the simulated final outcomes
    ExactOutcomeTable table = exact_table(w, scheme);
    VlcExact vlc = vlc_exact_from_table(table);
    for (int m = 1; m <= table.msg_count; ++m) {
        const MessageStats& s = rep.per_message[static_cast<size_t>(m - 1)];
        if (s.completed < 1000) continue;
        double pe = vlc.pe_m[static_cast<size_t>(m - 1)];
        double se = std::sqrt(pe * (1.0 - pe) / static_cast<double>(s.completed));
        double hat = static_cast<double>(s.errors) / static_cast<double>(s.completed);
        CHECK(std::fabs(hat - pe) <= 4.0 * se + 1e-9);
    }
}

TEST_CASE("exact enumeration: near-noiseless channel decodes essentially perfectly") {
    std::vector<double> m{1.0 - 1e-9, 1e-9, 1e-9, 1.0 - 1e-9};
    Channel w(2, 2, std::move(m));
    MwCodeSpec s = inner_spec(4, 2, 3, default_mw_threshold(w, 4));
    s.p1 = Distribution({0.5, 0.5});
    s.p2 = Distribution({0.5, 0.5});
    s.tau = 0.0; // single segment
    Codebook book = build_mw_codebook(w, s);
    ExactOutcomeTable table = exact_enumerate_mw(book, w);
    // message 2's own codeword is decoded correctly up to vanishing noise
    CHECK(table.error(2) <= 1e-6);
}

TEST_CASE("exact enumeration guard rejects oversized instances") {
    MwCodeSpec s = inner_spec(40, 2, 3, 10.0);
    Codebook book = build_mw_codebook(bsc10(), s);
    CHECK_THROWS_AS(exact_enumerate_mw(book, bsc10()), std::invalid_argument);
    CHECK(enumerable(bsc10(), 6));
    CHECK_FALSE(enumerable(bsc10(), 40));
}

TEST_CASE("wilson interval behaves near zero and one") {
    ConfidenceInterval zero = wilson_interval(0, 1000);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper > 0.0);
    CHECK(zero.upper < 0.01);
    ConfidenceInterval all = wilson_interval(1000, 1000);
    CHECK(all.upper == 1.0);
    CHECK(all.lower > 0.99);
    ConfidenceInterval none = wilson_interval(0, 0);
    CHECK(none.lower == 0.0);
    CHECK(none.upper == 1.0);
}

TEST_CASE("mean decoding time is at least the block length") {
    SimOptions opt;
    opt.trials = 5000;
    opt.seed = 31;
    SimReport rep = simulate(bsc10(), noisy_scheme(), opt);
    CHECK(rep.mean_decode_time() >= rep.block_len - 1e-9);
}

namespace {

// Full-string brute-force oracle: walks every output string of length n,
// reproduces the transmitter's feedback behaviour prefix by prefix, and
// accumulates exact outcome probabilities. Independent of the per-phase
// factorization used by exact_table.
std::vector<std::vector<double>> brute_force_outcomes(const Channel& w, const VlcScheme& scheme) {
    const int n = scheme.block_len();
    const int M = scheme.message_count();
    std::vector<std::vector<double>> out(static_cast<size_t>(M),
                                         std::vector<double>(static_cast<size_t>(M) + 1, 0.0));
    std::vector<int> y(static_cast<size_t>(n), 0);
    std::optional<Codebook> er_book;
    std::optional<BitwiseBooks> bw_books;
    if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code))
        er_book = build_mw_codebook(w, er->inner);
    else
        bw_books = build_bitwise_books(w, std::get<BitwiseCodeSpec>(scheme.code));
    auto classify = [&](int msg, const std::vector<int>& ys) {
        // transmitted letters depend on the receiver's tentative decisions,
        // which the transmitter tracks through the feedback link
        double prob = 1.0;
        if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code)) {
            const Codebook& book = *er_book;
            const int* word = book.word(msg);
            for (int t = 0; t < er->inner.n; ++t)
                prob *= w.prob(word[t], ys[static_cast<size_t>(t)]);
            std::vector<int> y1(ys.begin(), ys.begin() + er->inner.n);
            std::optional<int> tent = decode_mw(book, w, y1);
            int ctrl = (tent && *tent == msg) ? er->accept_letter : er->reject_letter;
            for (int t = er->inner.n; t < n; ++t)
                prob *= w.prob(ctrl, ys[static_cast<size_t>(t)]);
            std::vector<int> y2(ys.begin() + er->inner.n, ys.end());
            bool acc = y2.empty() || control_accepts(y2, w, er->accept_letter, er->control_threshold);
            int slot = (acc && tent) ? *tent : 0; // 0 = erasure
            out[static_cast<size_t>(msg - 1)][static_cast<size_t>(slot)] += prob;
            return;
        }
        const auto& bw = std::get<BitwiseCodeSpec>(scheme.code);
        const BitwiseBooks& books = *bw_books;
        std::vector<int> mv = bitwise_message_of_index(bw, msg);
        std::vector<std::optional<int>> tents;
        std::optional<int> prev;
        int prev_tx = 0, pos = 0;
        for (int phase = 0; phase <= bw.ell; ++phase) {
            int tx = bitwise_phase_tx(bw, mv, phase, prev, prev_tx);
            std::vector<int> letters = bitwise_phase_letters(bw, books, phase, tx);
            int len = bw.phase_lens[static_cast<size_t>(phase)];
            for (int t = 0; t < len; ++t)
                prob *= w.prob(letters[static_cast<size_t>(t)], ys[static_cast<size_t>(pos + t)]);
            std::vector<int> block(ys.begin() + pos, ys.begin() + pos + len);
            std::optional<int> tent = bitwise_phase_tentative(bw, books, w, phase, block);
            tents.push_back(tent);
            prev = tent;
            prev_tx = tx;
            pos += len;
        }
        DecodeOutcome o = bitwise_outcome(bw, tents);
        int slot = o.erasure ? 0 : bitwise_linear_index(bw, o.message);
        out[static_cast<size_t>(msg - 1)][static_cast<size_t>(slot)] += prob;
    };
    for (int msg = 1; msg <= M; ++msg) {
        std::fill(y.begin(), y.end(), 0);
        while (true) {
            classify(msg, y);
            int t = n - 1;
            while (t >= 0 && y[static_cast<size_t>(t)] == w.output_size() - 1) {
                y[static_cast<size_t>(t)] = 0;
                --t;
            }
            if (t < 0) break;
            ++y[static_cast<size_t>(t)];
        }
    }
    return out;
}

} // namespace

TEST_CASE("phase-factorized tables equal the full-string brute force (erasure)") {
    VlcScheme scheme = noisy_scheme();
    ExactOutcomeTable table = exact_table(bsc10(), scheme);
    std::vector<std::vector<double>> brute = brute_force_outcomes(bsc10(), scheme);
    for (int m = 1; m <= table.msg_count; ++m) {
        double era = table.erasure(m) + table.no_decision(m);
        CHECK(era == doctest::Approx(brute[static_cast<size_t>(m - 1)][0]).epsilon(1e-12));
        for (int v = 1; v <= table.msg_count; ++v)
            CHECK(table.prob(m, v) ==
                  doctest::Approx(brute[static_cast<size_t>(m - 1)][static_cast<size_t>(v)])
                      .epsilon(1e-12));
    }
}

TEST_CASE("phase-factorized tables equal the full-string brute force (bitwise)") {
    const Channel& w = bsc10();
    JCurve j(w);
    BitwiseCodeSpec spec = make_bitwise_spec(w, j, 8, {2, 2}, {0.3, 0.3}, 41);
    spec.sub[0].threshold = 1.3;
    spec.sub[1].threshold = 1.3;
    spec.control_threshold = 1.0;
    VlcScheme scheme;
    scheme.code = spec;
    ExactOutcomeTable table = exact_table(w, scheme);
    std::vector<std::vector<double>> brute = brute_force_outcomes(w, scheme);
    for (int m = 1; m <= table.msg_count; ++m) {
        double era = table.erasure(m) + table.no_decision(m);
        CHECK(era == doctest::Approx(brute[static_cast<size_t>(m - 1)][0]).epsilon(1e-12));
        for (int v = 1; v <= table.msg_count; ++v)
            CHECK(table.prob(m, v) ==
                  doctest::Approx(brute[static_cast<size_t>(m - 1)][static_cast<size_t>(v)])
                      .epsilon(1e-12));
    }
}

TEST_CASE("report counts stay consistent with the trial total") {
    SimOptions opt;
    opt.trials = 30000;
    opt.seed = 12;
    SimReport rep = simulate(bsc10(), noisy_scheme(), opt);
    std::uint64_t trials = 0, completed = 0, hist = 0;
    for (const auto& s : rep.per_message) {
        trials += s.trials;
        completed += s.completed;
        CHECK(s.completed + s.truncated == s.trials);
        CHECK(s.erased_rounds + s.completed == s.rounds_total);
    }
    for (std::uint64_t c : rep.round_histogram) hist += c;
    CHECK(trials == rep.trials);
    CHECK(completed == rep.completed);
    CHECK(hist == rep.completed);
    CHECK(rep.error_ci().estimate >= 0.0);
    CHECK(rep.error_ci().upper <= 1.0);
}
