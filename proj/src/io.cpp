#include "uep/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace uep {
namespace {

std::vector<double> doubles_from(const json& j) {
    std::vector<double> v;
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

std::vector<int> ints_from(const json& j) {
    std::vector<int> v;
    for (const auto& e : j) v.push_back(e.get<int>());
    return v;
}

} // namespace

Channel channel_from_json(const json& j) {
    int nx = j.at("input_size").get<int>();
    int ny = j.at("output_size").get<int>();
    const json& rows = j.at("rows");
    if (static_cast<int>(rows.size()) != nx)
        throw std::invalid_argument("channel: row count mismatch");
    std::vector<double> m;
    m.reserve(static_cast<size_t>(nx) * ny);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != ny)
            throw std::invalid_argument("channel: column count mismatch");
        for (const auto& e : row) m.push_back(e.get<double>());
    }
    return Channel(nx, ny, std::move(m));
}

json channel_to_json(const Channel& w) {
    json rows = json::array();
    for (int x = 0; x < w.input_size(); ++x) {
        json row = json::array();
        for (int y = 0; y < w.output_size(); ++y) row.push_back(w.prob(x, y));
        rows.push_back(std::move(row));
    }
    return json{{"input_size", w.input_size()}, {"output_size", w.output_size()}, {"rows", rows}};
}

Channel load_channel(const std::string& path) { return channel_from_json(read_json_file(path)); }

json distribution_to_json(const Distribution& d) {
    json a = json::array();
    for (int i = 0; i < d.size(); ++i) a.push_back(d[i]);
    return a;
}

Distribution distribution_from_json(const json& j) { return Distribution(doubles_from(j)); }

json mw_spec_to_json(const MwCodeSpec& s) {
    return json{{"type", "mw"},
                {"n", s.n},
                {"tau", s.tau},
                {"x1", s.x1},
                {"x2", s.x2},
                {"p1", distribution_to_json(s.p1)},
                {"p2", distribution_to_json(s.p2)},
                {"msg_count", s.msg_count},
                {"seed", s.seed},
                {"threshold", s.threshold}};
}

MwCodeSpec mw_spec_from_json(const json& j) {
    MwCodeSpec s;
    s.n = j.at("n").get<int>();
    s.tau = j.at("tau").get<double>();
    s.x1 = j.at("x1").get<int>();
    s.x2 = j.at("x2").get<int>();
    s.p1 = distribution_from_json(j.at("p1"));
    s.p2 = distribution_from_json(j.at("p2"));
    s.msg_count = j.at("msg_count").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.threshold = j.at("threshold").get<double>();
    return s;
}

json erasure_spec_to_json(const ErasureCodeSpec& s) {
    json inner = mw_spec_to_json(s.inner);
    inner.erase("type");
    return json{{"type", "erasure"},
                {"inner", inner},
                {"control_len", s.control_len},
                {"control_threshold", s.control_threshold},
                {"accept_letter", s.accept_letter},
                {"reject_letter", s.reject_letter},
                {"rate", s.design_rate},
                {"exponent", s.design_exponent}};
}

ErasureCodeSpec erasure_spec_from_json(const json& j) {
    ErasureCodeSpec s;
    s.inner = mw_spec_from_json(j.at("inner"));
    s.control_len = j.at("control_len").get<int>();
    s.control_threshold = j.at("control_threshold").get<double>();
    s.accept_letter = j.at("accept_letter").get<int>();
    s.reject_letter = j.at("reject_letter").get<int>();
    s.design_rate = j.at("rate").get<double>();
    s.design_exponent = j.at("exponent").get<double>();
    return s;
}

json bitwise_spec_to_json(const BitwiseCodeSpec& s) {
    json subs = json::array();
    for (const auto& sub : s.sub) {
        json js = mw_spec_to_json(sub);
        js.erase("type");
        subs.push_back(std::move(js));
    }
    return json{{"type", "bitwise"},
                {"n", s.n},
                {"ell", s.ell},
                {"msg_sizes", s.msg_sizes},
                {"phase_lens", s.phase_lens},
                {"sub", subs},
                {"control_threshold", s.control_threshold},
                {"accept_letter", s.accept_letter},
                {"reject_letter", s.reject_letter},
                {"phis", s.design_phis}};
}

BitwiseCodeSpec bitwise_spec_from_json(const json& j) {
    BitwiseCodeSpec s;
    s.n = j.at("n").get<int>();
    s.ell = j.at("ell").get<int>();
    s.msg_sizes = ints_from(j.at("msg_sizes"));
    s.phase_lens = ints_from(j.at("phase_lens"));
    for (const auto& sub : j.at("sub")) s.sub.push_back(mw_spec_from_json(sub));
    s.control_threshold = j.at("control_threshold").get<double>();
    s.accept_letter = j.at("accept_letter").get<int>();
    s.reject_letter = j.at("reject_letter").get<int>();
    s.design_phis = doubles_from(j.at("phis"));
    return s;
}

json scheme_to_json(const VlcScheme& scheme) {
    json j;
    if (const auto* mw = std::get_if<MwCodeSpec>(&scheme.code))
        j = mw_spec_to_json(*mw);
    else if (const auto* er = std::get_if<ErasureCodeSpec>(&scheme.code))
        j = erasure_spec_to_json(*er);
    else
        j = bitwise_spec_to_json(std::get<BitwiseCodeSpec>(scheme.code));
    j["max_rounds"] = scheme.max_rounds;
    return j;
}

namespace {

VlcScheme scheme_from_build(const json& j, const Channel& w, const JCurve& curve) {
    const json& b = j.at("build");
    std::string type = j.at("type").get<std::string>();
    VlcScheme scheme;
    std::uint64_t seed = b.value("seed", 0ULL);
    if (type == "mw") {
        MwCodeSpec s = make_mw_spec(w, curve, b.at("n").get<int>(), b.at("rate").get<double>(),
                                    b.at("msg_count").get<int>(), seed);
        if (b.contains("threshold")) s.threshold = b.at("threshold").get<double>();
        scheme.code = std::move(s);
    } else if (type == "erasure") {
        ErasureCodeSpec s =
            make_erasure_spec(w, curve, b.at("n").get<int>(), b.at("rate").get<double>(),
                              b.at("exponent").get<double>(), b.at("msg_count").get<int>(), seed);
        if (b.contains("inner_threshold")) s.inner.threshold = b.at("inner_threshold").get<double>();
        if (b.contains("control_threshold"))
            s.control_threshold = b.at("control_threshold").get<double>();
        scheme.code = std::move(s);
    } else if (type == "bitwise") {
        BitwiseCodeSpec s =
            make_bitwise_spec(w, curve, b.at("n").get<int>(), ints_from(b.at("msg_sizes")),
                              doubles_from(b.at("phis")), seed);
        if (b.contains("thresholds")) {
            std::vector<double> th = doubles_from(b.at("thresholds"));
            if (th.size() != s.sub.size() + 1)
                throw std::invalid_argument("build: need one threshold per phase");
            for (size_t i = 0; i < s.sub.size(); ++i) s.sub[i].threshold = th[i];
            s.control_threshold = th.back();
        }
        scheme.code = std::move(s);
    } else {
        throw std::invalid_argument("build: unknown code type " + type);
    }
    return scheme;
}

} // namespace

VlcScheme scheme_from_json(const json& j, const Channel& w, const JCurve& curve) {
    VlcScheme scheme;
    if (j.contains("build")) {
        scheme = scheme_from_build(j, w, curve);
    } else {
        std::string type = j.at("type").get<std::string>();
        if (type == "mw")
            scheme.code = mw_spec_from_json(j);
        else if (type == "erasure")
            scheme.code = erasure_spec_from_json(j);
        else if (type == "bitwise")
            scheme.code = bitwise_spec_from_json(j);
        else
            throw std::invalid_argument("scheme: unknown code type " + type);
    }
    scheme.max_rounds = j.value("max_rounds", 10000);
    if (scheme.max_rounds < 1) throw std::invalid_argument("scheme: max_rounds must be >= 1");
    return scheme;
}

VlcScheme load_scheme(const std::string& path, const Channel& w, const JCurve& curve) {
    return scheme_from_json(read_json_file(path), w, curve);
}

json report_to_json(const SimReport& rep) {
    json per = json::array();
    for (int m = 1; m <= rep.msg_count; ++m) {
        const MessageStats& s = rep.per_message[static_cast<size_t>(m - 1)];
        ConfidenceInterval err = rep.message_error_ci(m);
        ConfidenceInterval era = rep.message_erasure_ci(m);
        per.push_back(json{{"message", m},
                           {"trials", s.trials},
                           {"completed", s.completed},
                           {"errors", s.errors},
                           {"truncated", s.truncated},
                           {"rounds_total", s.rounds_total},
                           {"erased_rounds", s.erased_rounds},
                           {"completed_rounds", s.completed_rounds},
                           {"completed_rounds_sq", s.completed_rounds_sq},
                           {"error_est", err.estimate},
                           {"error_lo", err.lower},
                           {"error_hi", err.upper},
                           {"erasure_est", era.estimate},
                           {"erasure_lo", era.lower},
                           {"erasure_hi", era.upper},
                           {"mean_rounds", rep.mean_rounds(m)}});
    }
    json layers = json::array();
    for (int i = 1; i <= rep.layers; ++i) {
        ConfidenceInterval ci = rep.layer_error_ci(i);
        layers.push_back(json{{"layer", i},
                              {"errors", rep.layer_errors[static_cast<size_t>(i - 1)]},
                              {"est", ci.estimate},
                              {"lo", ci.lower},
                              {"hi", ci.upper}});
    }
    json out{{"trials", rep.trials},
             {"seed", rep.seed},
             {"block_len", rep.block_len},
             {"msg_count", rep.msg_count},
             {"layers", rep.layers},
             {"max_rounds", rep.max_rounds},
             {"completed", rep.completed},
             {"truncated", rep.truncated},
             {"errors", rep.errors},
             {"error_est", rep.error_ci().estimate},
             {"error_lo", rep.error_ci().lower},
             {"error_hi", rep.error_ci().upper},
             {"mean_decode_time", rep.mean_decode_time()},
             {"mean_decode_time_se", rep.mean_decode_time_se()},
             {"per_message", per},
             {"per_layer", layers},
             {"round_histogram", rep.round_histogram}};
    if (!rep.decode_matrix.empty()) out["decode_matrix"] = rep.decode_matrix;
    return out;
}

SimReport report_from_json(const json& j) {
    SimReport rep;
    rep.trials = j.at("trials").get<std::uint64_t>();
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.block_len = j.at("block_len").get<int>();
    rep.msg_count = j.at("msg_count").get<int>();
    rep.layers = j.at("layers").get<int>();
    rep.max_rounds = j.at("max_rounds").get<int>();
    rep.completed = j.at("completed").get<std::uint64_t>();
    rep.truncated = j.at("truncated").get<std::uint64_t>();
    rep.errors = j.at("errors").get<std::uint64_t>();
    for (const auto& pm : j.at("per_message")) {
        MessageStats s;
        s.trials = pm.at("trials").get<std::uint64_t>();
        s.completed = pm.at("completed").get<std::uint64_t>();
        s.errors = pm.at("errors").get<std::uint64_t>();
        s.truncated = pm.at("truncated").get<std::uint64_t>();
        s.rounds_total = pm.at("rounds_total").get<std::uint64_t>();
        s.erased_rounds = pm.at("erased_rounds").get<std::uint64_t>();
        s.completed_rounds = pm.at("completed_rounds").get<std::uint64_t>();
        s.completed_rounds_sq = pm.at("completed_rounds_sq").get<std::uint64_t>();
        rep.per_message.push_back(s);
    }
    for (const auto& pl : j.at("per_layer"))
        rep.layer_errors.push_back(pl.at("errors").get<std::uint64_t>());
    for (const auto& h : j.at("round_histogram")) rep.round_histogram.push_back(h.get<std::uint64_t>());
    if (j.contains("decode_matrix"))
        rep.decode_matrix = j.at("decode_matrix").get<std::vector<std::vector<std::uint64_t>>>();
    if (static_cast<int>(rep.per_message.size()) != rep.msg_count ||
        static_cast<int>(rep.layer_errors.size()) != rep.layers)
        throw std::invalid_argument("report: inconsistent counts");
    return rep;
}

std::string report_to_csv(const SimReport& rep) {
    std::ostringstream os;
    os << "metric,message,count,total,estimate,lower,upper\n";
    ConfidenceInterval overall = rep.error_ci();
    os << "error,all," << rep.errors << "," << rep.completed << "," << format_sig(overall.estimate)
       << "," << format_sig(overall.lower) << "," << format_sig(overall.upper) << "\n";
    for (int m = 1; m <= rep.msg_count; ++m) {
        const MessageStats& s = rep.per_message[static_cast<size_t>(m - 1)];
        ConfidenceInterval err = rep.message_error_ci(m);
        os << "error," << m << "," << s.errors << "," << s.completed << ","
           << format_sig(err.estimate) << "," << format_sig(err.lower) << ","
           << format_sig(err.upper) << "\n";
        ConfidenceInterval era = rep.message_erasure_ci(m);
        os << "erasure," << m << "," << s.erased_rounds << "," << s.rounds_total << ","
           << format_sig(era.estimate) << "," << format_sig(era.lower) << ","
           << format_sig(era.upper) << "\n";
    }
    for (int i = 1; i <= rep.layers; ++i) {
        ConfidenceInterval ci = rep.layer_error_ci(i);
        os << "layer_error," << i << "," << rep.layer_errors[static_cast<size_t>(i - 1)] << ","
           << rep.completed << "," << format_sig(ci.estimate) << "," << format_sig(ci.lower) << ","
           << format_sig(ci.upper) << "\n";
    }
    os << "mean_decode_time,all,,," << format_sig(rep.mean_decode_time()) << ",,"
       << "\n";
    return os.str();
}

json table_to_json(const ExactOutcomeTable& table) {
    json rows = json::array();
    for (int m = 1; m <= table.msg_count; ++m) {
        json row{{"message", m},
                 {"error", table.error(m)},
                 {"erasure", table.erasure(m)},
                 {"no_decision", table.no_decision(m)},
                 {"outcomes", table.p[static_cast<size_t>(m - 1)]}};
        rows.push_back(std::move(row));
    }
    return json{{"msg_count", table.msg_count}, {"block_len", table.block_len}, {"rows", rows}};
}

json verdicts_to_json(const std::vector<Verdict>& verdicts) {
    json arr = json::array();
    for (const Verdict& v : verdicts) {
        json jv{{"bound_name", v.bound_name},
                {"bound_value", v.bound_value},
                {"observed", v.observed},
                {"margin", v.margin},
                {"status", to_string(v.status)}};
        if (!v.note.empty()) jv["note"] = v.note;
        arr.push_back(std::move(jv));
    }
    return arr;
}

json time_share_to_json(const TimeSharePlan& plan) {
    return json{{"kind", "time_share"},
                {"tau", plan.tau},
                {"x1", plan.x1},
                {"x2", plan.x2},
                {"p1", distribution_to_json(plan.p1)},
                {"p2", distribution_to_json(plan.p2)}};
}

json phase_plan_to_json(const PhasePlan& plan) {
    return json{{"kind", "phases"}, {"phis", plan.phis}};
}

std::string curve_to_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream os;
    os << "x,y,witness_json\n";
    for (const CurvePoint& p : points) {
        json witness;
        if (p.time_share)
            witness = time_share_to_json(*p.time_share);
        else if (p.phases)
            witness = phase_plan_to_json(*p.phases);
        std::string w = witness.is_null() ? std::string() : witness.dump();
        std::string quoted = "\"";
        for (char c : w) {
            if (c == '"') quoted += "\"\"";
            else quoted += c;
        }
        quoted += "\"";
        os << format_sig(p.x) << "," << format_sig(p.y) << "," << (w.empty() ? "" : quoted) << "\n";
    }
    return os.str();
}

RateExponentQuery query_from_json(const json& j) {
    RateExponentQuery q;
    q.rates = doubles_from(j.at("rates"));
    q.exponents = doubles_from(j.at("exponents"));
    return q;
}

std::string codebook_to_csv(const Codebook& book) {
    std::ostringstream os;
    for (int m = 1; m <= book.spec.msg_count; ++m) {
        const int* word = book.word(m);
        for (int t = 0; t < book.spec.n; ++t) {
            if (t) os << ",";
            os << word[t];
        }
        os << "\n";
    }
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << content;
    if (!f) throw std::runtime_error("failed writing " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    json j;
    f >> j;
    return j;
}

std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
}

} // namespace uep
