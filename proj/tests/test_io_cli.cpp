#include <cstdio>
#include <cstdlib>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uep/io.hpp"

using namespace uep;
namespace fs = std::filesystem;

namespace {

const Channel& bsc10() {
    static Channel w = make_bsc(0.1);
    return w;
}

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "uep_io_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

const char* cli_path() { return std::getenv("UEP_CLI"); }

int run_cli(const std::string& args, std::string* out = nullptr) {
    std::string cmd = std::string(cli_path()) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string captured;
    char buf[4096];
    while (size_t got = fread(buf, 1, sizeof buf, pipe)) captured.append(buf, got);
    int status = pclose(pipe);
    if (out) *out = captured;
    return WEXITSTATUS(status);
}

fs::path write_channel(double crossover, const std::string& name) {
    fs::path p = temp_dir() / name;
    write_file(p.string(), channel_to_json(make_bsc(crossover)).dump(2) + "\n");
    return p;
}

} // namespace

TEST_CASE("channel json round trip and validation") {
    json j = channel_to_json(bsc10());
    Channel w = channel_from_json(j);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) CHECK(w.prob(x, y) == doctest::Approx(bsc10().prob(x, y)));

    json bad = {{"input_size", 2}, {"output_size", 2}, {"rows", {{1.0, 0.0}, {0.5, 0.5}}}};
    CHECK_THROWS_AS(channel_from_json(bad), std::invalid_argument);
    json off = {{"input_size", 2}, {"output_size", 2}, {"rows", {{0.9, 0.2}, {0.5, 0.5}}}};
    CHECK_THROWS_AS(channel_from_json(off), std::invalid_argument);
}

TEST_CASE("code spec json round trips preserve every field") {
    JCurve j(bsc10());
    ErasureCodeSpec spec = make_erasure_spec(bsc10(), j, 18, 0.04, 0.5, 5, 12345);
    json js = erasure_spec_to_json(spec);
    ErasureCodeSpec back = erasure_spec_from_json(json::parse(js.dump()));
    CHECK(back.inner.n == spec.inner.n);
    CHECK(back.inner.tau == spec.inner.tau);
    CHECK(back.inner.seed == spec.inner.seed);
    CHECK(back.inner.threshold == spec.inner.threshold);
    CHECK(back.inner.p1.probs() == spec.inner.p1.probs());
    CHECK(back.control_len == spec.control_len);
    CHECK(back.control_threshold == spec.control_threshold);
    CHECK(back.design_rate == spec.design_rate);

    BitwiseCodeSpec bw = make_bitwise_spec(bsc10(), j, 16, {2, 3}, {0.25, 0.3}, 99);
    BitwiseCodeSpec bw2 = bitwise_spec_from_json(json::parse(bitwise_spec_to_json(bw).dump()));
    CHECK(bw2.phase_lens == bw.phase_lens);
    CHECK(bw2.msg_sizes == bw.msg_sizes);
    CHECK(bw2.sub[1].seed == bw.sub[1].seed);
    CHECK(bw2.sub[1].threshold == bw.sub[1].threshold);
    CHECK(bw2.control_threshold == bw.control_threshold);

    // identical codebooks after the round trip
    Codebook a = build_mw_codebook(bsc10(), spec.inner);
    Codebook b = build_mw_codebook(bsc10(), back.inner);
    CHECK(a.words == b.words);
}

TEST_CASE("scheme build form materializes constructions") {
    JCurve j(bsc10());
    json build{{"type", "erasure"},
               {"build",
                {{"n", 12}, {"rate", 0.05}, {"exponent", 0.4}, {"msg_count", 3}, {"seed", 4}}}};
    VlcScheme scheme = scheme_from_json(build, bsc10(), j);
    const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code);
    REQUIRE(er != nullptr);
    CHECK(er->inner.msg_count == 3);
    CHECK(er->total_len() == 12);
    // overrides land in the materialized spec
    json build2 = build;
    build2["build"]["control_threshold"] = 0.75;
    VlcScheme s2 = scheme_from_json(build2, bsc10(), j);
    CHECK(std::get<ErasureCodeSpec>(s2.code).control_threshold == 0.75);

    json q{{"rates", {0.1, 0.2}}, {"exponents", {0.5, 0.25}}};
    RateExponentQuery query = query_from_json(q);
    CHECK(query.rates == std::vector<double>{0.1, 0.2});
    CHECK(query.exponents == std::vector<double>{0.5, 0.25});
}

TEST_CASE("curve csv format") {
    JCurve j(bsc10());
    TraceRequest req;
    req.kind = CurveKind::JOfRate;
    req.n_points = 3;
    std::string csv = curve_to_csv(trace_curve(j, req));
    CHECK(csv.rfind("x,y,witness_json\n", 0) == 0);
    CHECK(csv.find("\"{\"\"kind\"\"") != std::string::npos); // embedded JSON quoting
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 4);
}

TEST_CASE("cli: analyze matches the library bit for bit") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.01, "bsc01.json");
    fs::path out = temp_dir() / "analyze.json";
    std::string printed;
    int code = run_cli("analyze --channel " + ch.string() + " --out " + out.string(), &printed);
    CHECK(code == 0);
    CHECK(printed.find("C = 0.637146") != std::string::npos);
    json j = read_json_file(out.string());
    Channel w = load_channel(ch.string());
    CHECK(j.at("d_max_nats").get<double>() == w.d_max_nats());
    CHECK(j.at("lambda").get<double>() == w.min_entry());
    CapacityResult cap = capacity(w, 1e-9);
    CHECK(j.at("capacity_nats").get<double>() == doctest::Approx(cap.capacity_nats).epsilon(1e-9));
}

TEST_CASE("cli: malformed channel file exits with the usage code") {
    REQUIRE(cli_path() != nullptr);
    fs::path bad = temp_dir() / "bad_channel.json";
    write_file(bad.string(), "{\"input_size\": 2, \"output_size\": 2, \"rows\": [[1.0, 0.0], [0.5, 0.5]]}\n");
    std::string out;
    CHECK(run_cli("analyze --channel " + bad.string(), &out) == 2);
    CHECK(out.find("error:") != std::string::npos);
}

TEST_CASE("cli: jcurve output is deterministic and timestamp-free") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.05, "bsc05.json");
    fs::path a = temp_dir() / "curve_a.csv";
    fs::path b = temp_dir() / "curve_b.csv";
    CHECK(run_cli("jcurve --channel " + ch.string() + " --points 20 --out " + a.string()) == 0);
    CHECK(run_cli("jcurve --channel " + ch.string() + " --points 20 --out " + b.string()) == 0);
    std::string ca = slurp(a), cb = slurp(b);
    CHECK(ca == cb);
    CHECK(ca.rfind("x,y,witness_json\n", 0) == 0);
    CHECK(fs::exists(a.string() + ".meta")); // provenance lives in the sidecar
}

TEST_CASE("cli: region verdict for a feasible and an infeasible query") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.01, "bsc01b.json");
    std::string out;
    int code = run_cli("region --channel " + ch.string() + " --rates 0.1,0.1 --exponents 0.5,0.2",
                       &out);
    CHECK(code == 0);
    CHECK(out.find("feasible") != std::string::npos);
    code = run_cli("region --channel " + ch.string() + " --rates 0.1,0.1 --exponents 9.9,9.9",
                   &out);
    CHECK(code == 0);
    CHECK(out.find("infeasible") != std::string::npos);
}

TEST_CASE("cli: simulate is byte-identical across reruns and thread counts") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.1, "bsc10.json");
    JCurve j(bsc10());
    json spec{{"type", "erasure"},
              {"build",
               {{"n", 6},
                {"rate", 0.05},
                {"exponent", 0.3},
                {"msg_count", 3},
                {"seed", 21},
                {"inner_threshold", 1.8},
                {"control_threshold", 1.0}}}};
    fs::path sp = temp_dir() / "spec.json";
    write_file(sp.string(), spec.dump(2) + "\n");
    fs::path r1 = temp_dir() / "rep1.json";
    fs::path r8 = temp_dir() / "rep8.json";
    fs::path c1 = temp_dir() / "sum1.csv";
    fs::path c8 = temp_dir() / "sum8.csv";
    std::string base = "simulate --channel " + ch.string() + " --spec " + sp.string() +
                       " --trials 30000 --seed 9 ";
    CHECK(run_cli(base + "--threads 1 --out " + r1.string() + " --csv " + c1.string()) == 0);
    CHECK(run_cli(base + "--threads 8 --out " + r8.string() + " --csv " + c8.string()) == 0);
    CHECK(slurp(r1) == slurp(r8));
    CHECK(slurp(c1) == slurp(c8));

    // --exact dispatches to the oracle table
    fs::path ex = temp_dir() / "exact.json";
    std::string printed;
    CHECK(run_cli("simulate --channel " + ch.string() + " --spec " + sp.string() +
                      " --exact --out " + ex.string(),
                  &printed) == 0);
    CHECK(printed.find("exact table") != std::string::npos);
    json table = read_json_file(ex.string());
    CHECK(table.at("msg_count").get<int>() == 3);
}

TEST_CASE("cli: emit-spec round trips through the loader") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.1, "bsc10c.json");
    json spec{{"type", "bitwise"},
              {"build",
               {{"n", 10},
                {"msg_sizes", {2, 2}},
                {"phis", {0.3, 0.3}},
                {"seed", 77},
                {"thresholds", {1.6, 1.6, 1.2}}}}};
    fs::path sp = temp_dir() / "bw_spec.json";
    write_file(sp.string(), spec.dump(2) + "\n");
    fs::path emitted = temp_dir() / "bw_materialized.json";
    CHECK(run_cli("simulate --channel " + ch.string() + " --spec " + sp.string() +
                  " --trials 10 --seed 1 --emit-spec " + emitted.string()) == 0);
    JCurve j(bsc10());
    VlcScheme scheme = load_scheme(emitted.string(), bsc10(), j);
    CHECK(scheme_to_json(scheme).dump() == read_json_file(emitted.string()).dump());
}

TEST_CASE("cli: verify exits 1 when a non-vacuous bound fails") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.4, "bsc40.json");
    Channel w = make_bsc(0.4);
    JCurve j(w);
    MwCodeSpec bad = make_mw_spec(w, j, 75000, 0.01, 3, 7);
    bad.threshold = 0.0;
    fs::path sp = temp_dir() / "broken.json";
    json js = mw_spec_to_json(bad);
    write_file(sp.string(), js.dump(2) + "\n");
    std::string out;
    int code = run_cli("verify --channel " + ch.string() + " --spec " + sp.string() +
                           " --trials 150 --seed 5",
                       &out);
    CHECK(code == 1);
    CHECK(out.find("fail") != std::string::npos);

    // the exact path on a tiny instance passes
    fs::path ch10 = write_channel(0.1, "bsc10d.json");
    json good{{"type", "erasure"},
              {"build",
               {{"n", 6},
                {"rate", 0.05},
                {"exponent", 0.3},
                {"msg_count", 3},
                {"seed", 21},
                {"inner_threshold", 1.8},
                {"control_threshold", 1.0}}}};
    fs::path gp = temp_dir() / "good.json";
    write_file(gp.string(), good.dump(2) + "\n");
    CHECK(run_cli("verify --channel " + ch10.string() + " --spec " + gp.string() + " --exact",
                  &out) == 0);
}

TEST_CASE("cli: emd at zero exponent reproduces the jcurve column") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.01, "bsc01c.json");
    fs::path a = temp_dir() / "jc.csv";
    fs::path b = temp_dir() / "emd0.csv";
    CHECK(run_cli("jcurve --channel " + ch.string() + " --points 40 --out " + a.string()) == 0);
    CHECK(run_cli("emd --channel " + ch.string() + " --exponent 0 --points 40 --out " +
                  b.string()) == 0);
    CHECK(slurp(a) == slurp(b)); // identical sweep, identical values
}

TEST_CASE("cli: analyze on a 3x3 channel equals direct library calls") {
    REQUIRE(cli_path() != nullptr);
    std::vector<double> rows{0.7, 0.2, 0.1, 0.15, 0.7, 0.15, 0.05, 0.25, 0.7};
    Channel w(3, 3, rows);
    fs::path ch = temp_dir() / "ch3.json";
    write_file(ch.string(), channel_to_json(w).dump(2) + "\n");
    fs::path out = temp_dir() / "ch3_analysis.json";
    CHECK(run_cli("analyze --channel " + ch.string() + " --out " + out.string()) == 0);
    json j = read_json_file(out.string());
    Channel loaded = load_channel(ch.string()); // what the CLI actually analyzed
    CHECK(j.at("d_max_nats").get<double>() == loaded.d_max_nats());
    CHECK(j.at("accept_letter").get<int>() == loaded.accept_letter());
    CHECK(j.at("reject_letter").get<int>() == loaded.reject_letter());
    CHECK(j.at("lambda").get<double>() == loaded.min_entry());
    CapacityResult cap = capacity(loaded, 1e-9);
    CHECK(std::fabs(j.at("capacity_nats").get<double>() - cap.capacity_nats) <= 2e-9);
}

TEST_CASE("cli: verify can re-read a saved report") {
    REQUIRE(cli_path() != nullptr);
    fs::path ch = write_channel(0.1, "bsc10e.json");
    json spec{{"type", "erasure"},
              {"build",
               {{"n", 6},
                {"rate", 0.05},
                {"exponent", 0.3},
                {"msg_count", 3},
                {"seed", 21},
                {"inner_threshold", 1.8},
                {"control_threshold", 1.0}}}};
    fs::path sp = temp_dir() / "spec_verify.json";
    write_file(sp.string(), spec.dump(2) + "\n");
    fs::path rp = temp_dir() / "saved_report.json";
    CHECK(run_cli("simulate --channel " + ch.string() + " --spec " + sp.string() +
                  " --trials 20000 --seed 4 --out " + rp.string()) == 0);
    std::string out;
    CHECK(run_cli("verify --channel " + ch.string() + " --spec " + sp.string() + " --report " +
                      rp.string(),
                  &out) == 0);
    CHECK(out.find("floor.pe") != std::string::npos);

    // the round trip preserves every count
    json j = read_json_file(rp.string());
    SimReport rep = report_from_json(j);
    CHECK(report_to_json(rep).dump() == j.dump());
}
