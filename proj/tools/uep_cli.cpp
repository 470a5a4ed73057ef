// Command-line front end: channel analysis, exponent curves, region queries,
// Monte Carlo campaigns and bound verification for variable-length feedback
// codes with unequal error protection.

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "uep/io.hpp"

namespace {

using namespace uep;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;

// Data files stay timestamp-free so reruns are byte-identical; provenance
// goes into a sidecar.
void write_with_sidecar(const std::string& path, const std::string& content,
                        const std::string& command) {
    write_file(path, content);
    auto now = std::chrono::system_clock::now();
    std::ostringstream meta;
    meta << "command: " << command << "\n"
         << "written_unix_ms: "
         << std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count()
         << "\n";
    write_file(path + ".meta", meta.str());
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

int cmd_analyze(const std::string& channel_path, const std::string& out_path, double tol,
                const std::string& cmdline) {
    Channel w = load_channel(channel_path);
    CapacityResult cap = capacity(w, tol);
    json out{{"capacity_nats", cap.capacity_nats},
             {"capacity_gap", cap.gap},
             {"capacity_input", distribution_to_json(cap.input)},
             {"d_max_nats", w.d_max_nats()},
             {"accept_letter", w.accept_letter()},
             {"reject_letter", w.reject_letter()},
             {"lambda", w.min_entry()}};
    std::cout << "C = " << format_sig(cap.capacity_nats) << " nats/use\n"
              << "D = " << format_sig(w.d_max_nats()) << " nats/use\n"
              << "x_a = " << w.accept_letter() << ", x_r = " << w.reject_letter() << "\n"
              << "lambda = " << format_sig(w.min_entry()) << "\n";
    if (!out_path.empty()) write_with_sidecar(out_path, out.dump(2) + "\n", cmdline);
    return kExitOk;
}

int cmd_jcurve(const std::string& channel_path, const std::string& out_path, int points,
               double rmin, double rmax, const std::string& cmdline) {
    Channel w = load_channel(channel_path);
    JCurve j(w);
    TraceRequest req;
    req.kind = CurveKind::JOfRate;
    req.n_points = points;
    req.x_min = rmin;
    req.x_max = rmax;
    std::vector<CurvePoint> curve = trace_curve(j, req);
    std::string csv = curve_to_csv(curve);
    if (out_path.empty())
        std::cout << csv;
    else
        write_with_sidecar(out_path, csv, cmdline);
    return kExitOk;
}

int cmd_emd(const std::string& channel_path, const std::string& out_path, double exponent,
            int points, const std::string& cmdline) {
    Channel w = load_channel(channel_path);
    JCurve j(w);
    if (exponent < 0.0 || exponent > j.d_max() + 1e-9)
        throw std::domain_error("emd: exponent outside [0, D]");
    TraceRequest req;
    req.kind = CurveKind::EmdOfRate;
    req.fixed_exponent = exponent;
    req.n_points = points;
    std::vector<CurvePoint> curve = trace_curve(j, req);
    std::string csv = curve_to_csv(curve);
    if (out_path.empty())
        std::cout << csv;
    else
        write_with_sidecar(out_path, csv, cmdline);
    return kExitOk;
}

int cmd_region(const std::string& channel_path, const std::string& query_path,
               const std::string& rates_csv, const std::string& exps_csv,
               const std::string& out_path, double tol, bool sweep_e1, bool sweep_e2, int points,
               const std::string& cmdline) {
    Channel w = load_channel(channel_path);
    JCurve j(w);
    RateExponentQuery q;
    if (!query_path.empty()) {
        q = query_from_json(read_json_file(query_path));
    } else {
        q.rates = parse_list(rates_csv);
        q.exponents = parse_list(exps_csv);
    }
    if (sweep_e1 || sweep_e2) {
        if (q.rates.size() != 2 || q.exponents.size() != 2)
            throw std::invalid_argument("region sweeps expect two layers");
        TraceRequest req;
        req.n_points = points;
        if (sweep_e1) {
            // optimal E1 as the second-layer rate varies, E2 held fixed
            req.kind = CurveKind::E1Boundary;
            req.fixed_rate = q.rates[0];
            req.fixed_exponent = q.exponents[1];
            req.x_min = 0.0;
            req.x_max = q.rates[1];
        } else {
            // optimal E1 as the second-layer exponent varies, rates held fixed
            req.kind = CurveKind::E1OfE2Boundary;
            req.fixed_rate = q.rates[0];
            req.fixed_rate2 = q.rates[1];
        }
        std::vector<CurvePoint> curve = trace_curve(j, req);
        std::string csv = curve_to_csv(curve);
        if (out_path.empty())
            std::cout << csv;
        else
            write_with_sidecar(out_path, csv, cmdline);
        return kExitOk;
    }
    for (double r : q.rates)
        if (r > j.capacity() + 1e-9) throw std::domain_error("region: rate exceeds capacity");
    FeasibilityResult res = region_feasible(j, q, tol);
    json out{{"feasible", res.feasible}, {"margin", res.margin}};
    if (res.plan) out["phis"] = res.plan->phis;
    std::cout << (res.feasible ? "feasible" : "infeasible")
              << " (margin = " << format_sig(res.margin) << ")\n";
    if (!out_path.empty()) write_with_sidecar(out_path, out.dump(2) + "\n", cmdline);
    return kExitOk;
}

int cmd_simulate(const std::string& channel_path, const std::string& spec_path,
                 std::uint64_t trials, std::uint64_t seed, int threads, int max_rounds,
                 bool exact, const std::string& out_path, const std::string& csv_path,
                 const std::string& emit_spec, const std::string& dump_codebook,
                 const std::string& cmdline) {
    Channel w = load_channel(channel_path);
    JCurve j(w);
    VlcScheme scheme = load_scheme(spec_path, w, j);
    if (!emit_spec.empty())
        write_with_sidecar(emit_spec, scheme_to_json(scheme).dump(2) + "\n", cmdline);
    if (!dump_codebook.empty()) {
        std::string csv;
        if (const auto* mw = std::get_if<MwCodeSpec>(&scheme.code))
            csv = codebook_to_csv(build_mw_codebook(w, *mw));
        else if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code))
            csv = codebook_to_csv(build_mw_codebook(w, er->inner));
        else {
            const auto& bw = std::get<BitwiseCodeSpec>(scheme.code);
            BitwiseBooks books = build_bitwise_books(w, bw);
            for (const Codebook& b : books.sub) csv += codebook_to_csv(b);
        }
        write_with_sidecar(dump_codebook, csv, cmdline);
    }

    if (exact) {
        ExactOutcomeTable table = exact_table(w, scheme);
        json out = table_to_json(table);
        std::cout << "exact table over " << table.msg_count << " messages, block length "
                  << table.block_len << "\n";
        if (!out_path.empty()) write_with_sidecar(out_path, out.dump(2) + "\n", cmdline);
        return kExitOk;
    }

    SimOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    opt.threads = threads;
    opt.max_rounds = max_rounds;
    SimReport rep = simulate(w, scheme, opt);
    std::cout << "trials = " << rep.trials << ", completed = " << rep.completed
              << ", truncated = " << rep.truncated << "\n"
              << "P(error) = " << format_sig(rep.error_ci().estimate) << " ["
              << format_sig(rep.error_ci().lower) << ", " << format_sig(rep.error_ci().upper)
              << "]\n"
              << "E[T] = " << format_sig(rep.mean_decode_time()) << " +- "
              << format_sig(rep.mean_decode_time_se()) << "\n";
    if (!out_path.empty()) write_with_sidecar(out_path, report_to_json(rep).dump(2) + "\n", cmdline);
    if (!csv_path.empty()) write_with_sidecar(csv_path, report_to_csv(rep), cmdline);
    return kExitOk;
}

int cmd_verify(const std::string& channel_path, const std::string& spec_path,
               const std::string& report_path, std::uint64_t trials, std::uint64_t seed,
               int threads, int max_rounds, bool exact, const std::string& out_path,
               const std::string& cmdline) {
    Channel w = load_channel(channel_path);
    JCurve j(w);
    VlcScheme scheme = load_scheme(spec_path, w, j);

    std::vector<Verdict> verdicts;
    if (exact) {
        ExactOutcomeTable table = exact_table(w, scheme);
        FixedCodeObservations obs = fixed_observations(table, scheme);
        verdicts = verify_achievability(obs, scheme, w, j);
        std::vector<Verdict> con = verify_converse(table, scheme, w, j);
        verdicts.insert(verdicts.end(), con.begin(), con.end());
    } else {
        SimReport rep;
        if (!report_path.empty()) {
            rep = report_from_json(read_json_file(report_path));
            if (rep.msg_count != scheme.message_count() || rep.block_len != scheme.block_len())
                throw std::invalid_argument("verify: report does not match the spec");
        } else {
            SimOptions opt;
            opt.trials = trials;
            opt.seed = seed;
            opt.threads = threads;
            opt.max_rounds = max_rounds;
            rep = simulate(w, scheme, opt);
        }
        FixedCodeObservations obs = fixed_observations(rep);
        verdicts = verify_achievability(obs, scheme, w, j);
        std::vector<Verdict> con = verify_converse(rep, scheme, w, j);
        verdicts.insert(verdicts.end(), con.begin(), con.end());
    }

    bool ok = all_pass(verdicts);
    for (const Verdict& v : verdicts) {
        std::cout << v.bound_name << ": " << to_string(v.status)
                  << " (bound = " << format_sig(v.bound_value)
                  << ", observed = " << format_sig(v.observed) << ")";
        if (!v.note.empty()) std::cout << " -- " << v.note;
        std::cout << "\n";
    }
    if (!out_path.empty())
        write_with_sidecar(out_path, verdicts_to_json(verdicts).dump(2) + "\n", cmdline);
    return ok ? kExitOk : kExitVerifyFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exponent regions and coding simulations for variable-length feedback codes"};
    app.require_subcommand(1);

    std::string channel_path, out_path, csv_path, query_path, spec_path, report_path;
    std::string rates_csv, exps_csv, emit_spec, dump_codebook;
    double tol = 1e-9, exponent = 0.0, rmin = 0.0, rmax = 0.0, region_tol = 1e-6;
    int points = 200, threads = 1, max_rounds = 10000;
    std::uint64_t trials = 100000, seed = 1;
    bool exact = false, sweep_e1 = false, sweep_e2 = false;

    CLI::App* analyze = app.add_subcommand("analyze", "channel constants C, D, x_a, x_r");
    analyze->add_option("--channel", channel_path)->required();
    analyze->add_option("--out", out_path);
    analyze->add_option("--tol", tol);

    CLI::App* jcurve = app.add_subcommand("jcurve", "exponent trade-off curve J(R)");
    jcurve->add_option("--channel", channel_path)->required();
    jcurve->add_option("--out", out_path);
    jcurve->add_option("--points", points);
    jcurve->add_option("--rmin", rmin);
    jcurve->add_option("--rmax", rmax);

    CLI::App* emd_cmd = app.add_subcommand("emd", "missed-detection exponent curve");
    emd_cmd->add_option("--channel", channel_path)->required();
    emd_cmd->add_option("--exponent", exponent)->required();
    emd_cmd->add_option("--out", out_path);
    emd_cmd->add_option("--points", points);

    CLI::App* region = app.add_subcommand("region", "bit-wise exponent region queries");
    region->add_option("--channel", channel_path)->required();
    region->add_option("--query", query_path);
    region->add_option("--rates", rates_csv);
    region->add_option("--exponents", exps_csv);
    region->add_option("--out", out_path);
    region->add_option("--tol", region_tol);
    region->add_flag("--sweep-e1", sweep_e1, "trace the optimal E1 over the second-layer rate");
    region->add_flag("--sweep-e2", sweep_e2, "trace the optimal E1 over the second-layer exponent");
    region->add_option("--points", points);

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo or exact-oracle runs");
    simulate->add_option("--channel", channel_path)->required();
    simulate->add_option("--spec", spec_path)->required();
    simulate->add_option("--trials", trials);
    simulate->add_option("--seed", seed);
    simulate->add_option("--threads", threads);
    simulate->add_option("--max-rounds", max_rounds);
    simulate->add_flag("--exact", exact, "exhaustive oracle table instead of Monte Carlo");
    simulate->add_option("--out", out_path);
    simulate->add_option("--csv", csv_path);
    simulate->add_option("--emit-spec", emit_spec, "write the materialized spec JSON");
    simulate->add_option("--dump-codebook", dump_codebook, "audit dump of codeword letters");

    CLI::App* verify = app.add_subcommand("verify", "achievability and converse bound checks");
    verify->add_option("--channel", channel_path)->required();
    verify->add_option("--spec", spec_path)->required();
    verify->add_option("--report", report_path);
    verify->add_option("--trials", trials);
    verify->add_option("--seed", seed);
    verify->add_option("--threads", threads);
    verify->add_option("--max-rounds", max_rounds);
    verify->add_flag("--exact", exact, "use the exhaustive oracle instead of Monte Carlo");
    verify->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::ostringstream cmdline;
    for (int i = 0; i < argc; ++i) cmdline << (i ? " " : "") << argv[i];

    try {
        if (app.got_subcommand(analyze))
            return cmd_analyze(channel_path, out_path, tol, cmdline.str());
        if (app.got_subcommand(jcurve))
            return cmd_jcurve(channel_path, out_path, points, rmin, rmax, cmdline.str());
        if (app.got_subcommand(emd_cmd))
            return cmd_emd(channel_path, out_path, exponent, points, cmdline.str());
        if (app.got_subcommand(region))
            return cmd_region(channel_path, query_path, rates_csv, exps_csv, out_path, region_tol,
                              sweep_e1, sweep_e2, points, cmdline.str());
        if (app.got_subcommand(simulate))
            return cmd_simulate(channel_path, spec_path, trials, seed, threads, max_rounds, exact,
                                out_path, csv_path, emit_spec, dump_codebook, cmdline.str());
        if (app.got_subcommand(verify))
            return cmd_verify(channel_path, spec_path, report_path, trials, seed, threads,
                              max_rounds, exact, out_path, cmdline.str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
