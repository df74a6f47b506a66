#include "blowtime/report_io.hpp"

#include "blowtime/errors.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <ostream>
#include <sstream>

namespace {

using nlohmann::json;

// NaN and infinities dump as null; read them back as NaN.
double num(const json& j, const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
void get_opt(const json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key) && !j.at(key).is_null())
        v = j.at(key).get<T>();
    else
        v.reset();
}

json vec(blowtime::Vec3 p) { return json::array({p.x, p.y, p.z}); }

blowtime::Vec3 vec(const json& j) {
    if (!j.is_array() || j.size() != 3) throw blowtime::InvalidInput("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

namespace blowtime::geometry {

void to_json(json& j, const QuadratureSpec& v) {
    j = {{"boundary_nodes", v.boundary_nodes},
         {"volume_nodes", v.volume_nodes},
         {"time_nodes", v.time_nodes},
         {"refinement_limit", v.refinement_limit},
         {"tolerance", v.tolerance}};
}

void from_json(const json& j, QuadratureSpec& v) {
    j.at("boundary_nodes").get_to(v.boundary_nodes);
    j.at("volume_nodes").get_to(v.volume_nodes);
    j.at("time_nodes").get_to(v.time_nodes);
    j.at("refinement_limit").get_to(v.refinement_limit);
    v.tolerance = num(j, "tolerance");
}

}  // namespace blowtime::geometry

namespace blowtime::kernel {

void to_json(json& j, const MassGrid& v) {
    j = {{"x_samples", v.x_samples}, {"t_count", v.t_count}, {"t_min", v.t_min}};
}

void from_json(const json& j, MassGrid& v) {
    j.at("x_samples").get_to(v.x_samples);
    j.at("t_count").get_to(v.t_count);
    v.t_min = num(j, "t_min");
}

void to_json(json& j, const GaussianGrid& v) {
    j = {{"x_samples", v.x_samples}, {"tau_count", v.tau_count}, {"tau_min", v.tau_min}, {"tau_max", v.tau_max}};
}

void from_json(const json& j, GaussianGrid& v) {
    j.at("x_samples").get_to(v.x_samples);
    j.at("tau_count").get_to(v.tau_count);
    v.tau_min = num(j, "tau_min");
    v.tau_max = num(j, "tau_max");
}

void to_json(json& j, const MassEstimate& v) {
    j = {{"value", v.value},       {"error", v.error},       {"grid_min", v.grid_min},
         {"argmin_s", v.argmin_s}, {"argmin_t", v.argmin_t}, {"t0_value", v.t0_value},
         {"grid", v.grid}};
}

void from_json(const json& j, MassEstimate& v) {
    v.value = num(j, "value");
    v.error = num(j, "error");
    v.grid_min = num(j, "grid_min");
    v.argmin_s = num(j, "argmin_s");
    v.argmin_t = num(j, "argmin_t");
    v.t0_value = num(j, "t0_value");
    j.at("grid").get_to(v.grid);
}

void to_json(json& j, const GaussianEstimate& v) {
    j = {{"value", v.value},       {"error", v.error},           {"grid_sup", v.grid_sup},
         {"tail_limit", v.tail_limit}, {"argmax_s", v.argmax_s}, {"argmax_tau", v.argmax_tau},
         {"grid", v.grid}};
}

void from_json(const json& j, GaussianEstimate& v) {
    v.value = num(j, "value");
    v.error = num(j, "error");
    v.grid_sup = num(j, "grid_sup");
    v.tail_limit = num(j, "tail_limit");
    v.argmax_s = num(j, "argmax_s");
    v.argmax_tau = num(j, "argmax_tau");
    j.at("grid").get_to(v.grid);
}

void to_json(json& j, const KernelConstants& v) {
    j = {{"dim", v.dim},           {"b1", v.b1}, {"b1_err", v.b1_err}, {"B1", v.B1},
         {"B1_err", v.B1_err},     {"b1_detail", v.b1_detail},         {"B1_detail", v.B1_detail},
         {"quadrature", v.spec},
         {"grid", {{"b1", v.b1_detail.grid}, {"B1", v.B1_detail.grid}}}};
}

void from_json(const json& j, KernelConstants& v) {
    j.at("dim").get_to(v.dim);
    v.b1 = num(j, "b1");
    v.b1_err = num(j, "b1_err");
    v.B1 = num(j, "B1");
    v.B1_err = num(j, "B1_err");
    j.at("b1_detail").get_to(v.b1_detail);
    j.at("B1_detail").get_to(v.B1_detail);
    j.at("quadrature").get_to(v.spec);
}

void to_json(json& j, const IdentityTerms& v) {
    j = {{"volume", v.volume},
         {"layer", v.layer},
         {"signed_layer", v.signed_layer},
         {"residual", v.residual},
         {"signed_residual", v.signed_residual},
         {"boundary_nodes", v.boundary_nodes}};
}

void from_json(const json& j, IdentityTerms& v) {
    v.volume = num(j, "volume");
    v.layer = num(j, "layer");
    v.signed_layer = num(j, "signed_layer");
    v.residual = num(j, "residual");
    v.signed_residual = num(j, "signed_residual");
    j.at("boundary_nodes").get_to(v.boundary_nodes);
}

}  // namespace blowtime::kernel

namespace blowtime::bounds {

void to_json(json& j, const BoundsInput& v) {
    j = {{"q", v.q},         {"M0", v.M0},   {"gamma1_area", v.gamma1_area}, {"alpha", v.alpha},
         {"dim", v.dim},     {"b1", v.b1},   {"B1", v.B1}};
}

void from_json(const json& j, BoundsInput& v) {
    v.q = num(j, "q");
    v.M0 = num(j, "M0");
    v.gamma1_area = num(j, "gamma1_area");
    v.alpha = num(j, "alpha");
    j.at("dim").get_to(v.dim);
    v.b1 = num(j, "b1");
    v.B1 = num(j, "B1");
}

void to_json(json& j, const DerivedConstants& v) {
    j = {{"b1", v.b1}, {"B1", v.B1},           {"C", v.C},    {"C1", v.C1},
         {"C2", v.C2}, {"N_alpha", v.N_alpha}, {"E_q", v.E_q}};
}

void from_json(const json& j, DerivedConstants& v) {
    v.b1 = num(j, "b1");
    v.B1 = num(j, "B1");
    v.C = num(j, "C");
    v.C1 = num(j, "C1");
    v.C2 = num(j, "C2");
    v.N_alpha = num(j, "N_alpha");
    v.E_q = num(j, "E_q");
}

void to_json(json& j, const LogBound& v) {
    j = {{"applicable", v.applicable},
         {"value", v.value},
         {"bracket", v.bracket},
         {"C_free", v.C_free},
         {"label", v.label}};
}

void from_json(const json& j, LogBound& v) {
    j.at("applicable").get_to(v.applicable);
    v.value = num(j, "value");
    v.bracket = num(j, "bracket");
    v.C_free = num(j, "C_free");
    j.at("label").get_to(v.label);
}

void to_json(json& j, const BoundsReport& v) {
    j = {{"input", v.input},
         {"lower_log", v.lower_log},
         {"lower_new_closed", v.lower_new_closed},
         {"lower_new_constructive", v.lower_new_constructive},
         {"constructive_t_star", v.constructive_t_star},
         {"constructive_L", v.constructive_L},
         {"constructive_from_step_bound", v.constructive_from_step_bound},
         {"constants_used", v.constants_used}};
    put_opt(j, "upper", v.upper);
    put_opt(j, "u0_integral", v.u0_integral);
}

void from_json(const json& j, BoundsReport& v) {
    j.at("input").get_to(v.input);
    j.at("lower_log").get_to(v.lower_log);
    v.lower_new_closed = num(j, "lower_new_closed");
    v.lower_new_constructive = num(j, "lower_new_constructive");
    v.constructive_t_star = num(j, "constructive_t_star");
    j.at("constructive_L").get_to(v.constructive_L);
    j.at("constructive_from_step_bound").get_to(v.constructive_from_step_bound);
    j.at("constants_used").get_to(v.constants_used);
    get_opt(j, "upper", v.upper);
    get_opt(j, "u0_integral", v.u0_integral);
}

void to_json(json& j, const TraceEntry& v) {
    j = {{"k", v.k}, {"M", v.M}, {"lambda", v.lambda}, {"x", v.x}};
}

void from_json(const json& j, TraceEntry& v) {
    j.at("k").get_to(v.k);
    v.M = num(j, "M");
    v.lambda = num(j, "lambda");
    v.x = num(j, "x");
}

void to_json(json& j, const SequenceTrace& v) {
    j = {{"q", v.q},
         {"M0", v.M0},
         {"delta1", v.delta1},
         {"t_star", v.t_star},
         {"L", v.L},
         {"L_times_t_star", v.product()},
         {"M_last", v.M_last},
         {"x_last", v.x_last},
         {"x_before_last", v.x_before_last},
         {"recorded", v.recorded},
         {"entries", v.entries}};
}

void from_json(const json& j, SequenceTrace& v) {
    v.q = num(j, "q");
    v.M0 = num(j, "M0");
    v.delta1 = num(j, "delta1");
    v.t_star = num(j, "t_star");
    j.at("L").get_to(v.L);
    v.M_last = num(j, "M_last");
    v.x_last = num(j, "x_last");
    v.x_before_last = num(j, "x_before_last");
    j.at("recorded").get_to(v.recorded);
    j.at("entries").get_to(v.entries);
}

}  // namespace blowtime::bounds

namespace blowtime::sim {

void to_json(json& j, const HistorySample& v) { j = json::array({v.t, v.max}); }

void from_json(const json& j, HistorySample& v) {
    v.t = j.at(0).get<double>();
    v.max = j.at(1).get<double>();
}

void to_json(json& j, const BlowupEstimate& v) {
    j = {{"status", v.status},
         {"M0", v.M0},
         {"thresholds", v.thresholds},
         {"crossing_times", v.crossing_times},
         {"model", v.model},
         {"final_time", v.final_time},
         {"final_max", v.final_max},
         {"steps", v.steps},
         {"dt_underflow", v.dt_underflow},
         {"max_on_gamma1", v.max_on_gamma1},
         {"argmax", vec(v.argmax)},
         {"resolution", v.resolution},
         {"history", v.history}};
    put_opt(j, "t_star", v.t_star);
    put_opt(j, "error_estimate", v.error_estimate);
    put_opt(j, "t_star_half", v.t_star_half);
}

void from_json(const json& j, BlowupEstimate& v) {
    j.at("status").get_to(v.status);
    v.M0 = num(j, "M0");
    j.at("thresholds").get_to(v.thresholds);
    j.at("crossing_times").get_to(v.crossing_times);
    j.at("model").get_to(v.model);
    v.final_time = num(j, "final_time");
    v.final_max = num(j, "final_max");
    j.at("steps").get_to(v.steps);
    j.at("dt_underflow").get_to(v.dt_underflow);
    j.at("max_on_gamma1").get_to(v.max_on_gamma1);
    v.argmax = vec(j.at("argmax"));
    j.at("resolution").get_to(v.resolution);
    j.at("history").get_to(v.history);
    get_opt(j, "t_star", v.t_star);
    get_opt(j, "error_estimate", v.error_estimate);
    get_opt(j, "t_star_half", v.t_star_half);
}

void to_json(json& j, const RepresentationResult& v) {
    j = {{"x", vec(v.x)},         {"s", v.s},         {"lhs", v.lhs},
         {"volume", v.volume},    {"layer", v.layer}, {"single", v.single},
         {"rhs", v.rhs},          {"residual", v.residual}, {"relative", v.relative}};
}

void from_json(const json& j, RepresentationResult& v) {
    v.x = vec(j.at("x"));
    v.s = num(j, "s");
    v.lhs = num(j, "lhs");
    v.volume = num(j, "volume");
    v.layer = num(j, "layer");
    v.single = num(j, "single");
    v.rhs = num(j, "rhs");
    v.residual = num(j, "residual");
    v.relative = num(j, "relative");
}

}  // namespace blowtime::sim

namespace blowtime::study {

void to_json(json& j, const SlopeFit& v) {
    j = {{"x_column", v.x_column}, {"y_column", v.y_column}, {"regime", v.regime},
         {"slope", v.slope},       {"intercept", v.intercept}, {"residual", v.residual},
         {"x_min", v.x_min},       {"x_max", v.x_max},       {"n", v.n}};
}

void from_json(const json& j, SlopeFit& v) {
    j.at("x_column").get_to(v.x_column);
    j.at("y_column").get_to(v.y_column);
    j.at("regime").get_to(v.regime);
    v.slope = num(j, "slope");
    v.intercept = num(j, "intercept");
    v.residual = num(j, "residual");
    v.x_min = num(j, "x_min");
    v.x_max = num(j, "x_max");
    j.at("n").get_to(v.n);
}

void to_json(json& j, const SweepRow& v) {
    j = {{"value", v.value},
         {"q", v.q},
         {"M0", v.M0},
         {"gamma1_area", v.gamma1_area},
         {"alpha", v.alpha},
         {"min_clause_arg", v.min_clause_arg},
         {"regime", v.regime()},
         {"constructive_from_step_bound", v.constructive_from_step_bound},
         {"status", v.status}};
    put_opt(j, "closed", v.closed);
    put_opt(j, "constructive", v.constructive);
    put_opt(j, "log", v.log_bound);
    put_opt(j, "upper", v.upper);
    put_opt(j, "t_sim", v.t_sim);
    put_opt(j, "t_sim_error", v.t_sim_error);
}

void from_json(const json& j, SweepRow& v) {
    v.value = num(j, "value");
    v.q = num(j, "q");
    v.M0 = num(j, "M0");
    v.gamma1_area = num(j, "gamma1_area");
    v.alpha = num(j, "alpha");
    v.min_clause_arg = num(j, "min_clause_arg");
    j.at("constructive_from_step_bound").get_to(v.constructive_from_step_bound);
    j.at("status").get_to(v.status);
    get_opt(j, "closed", v.closed);
    get_opt(j, "constructive", v.constructive);
    get_opt(j, "log", v.log_bound);
    get_opt(j, "upper", v.upper);
    get_opt(j, "t_sim", v.t_sim);
    get_opt(j, "t_sim_error", v.t_sim_error);
}

}  // namespace blowtime::study

namespace blowtime::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

namespace {

std::string iso_time(std::time_t t) {
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunManifest RunManifest::make(std::string subcommand, std::map<std::string, std::string> args) {
    RunManifest m;
    m.subcommand = std::move(subcommand);
    m.args = std::move(args);
    std::time_t now = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(epoch, &end, 10);
        if (end && *end == '\0' && end != epoch) now = static_cast<std::time_t>(v);
    }
    m.timestamp = iso_time(now);
    std::string canon = m.subcommand;
    for (const auto& [k, v] : m.args) canon += "\n" + k + "=" + v;
    m.input_hash = fnv1a_hex(canon);
    return m;
}

void to_json(json& j, const RunManifest& v) {
    j = {{"subcommand", v.subcommand},
         {"args", v.args},
         {"version", v.version},
         {"timestamp", v.timestamp},
         {"input_hash", v.input_hash}};
}

void from_json(const json& j, RunManifest& v) {
    j.at("subcommand").get_to(v.subcommand);
    j.at("args").get_to(v.args);
    j.at("version").get_to(v.version);
    j.at("timestamp").get_to(v.timestamp);
    j.at("input_hash").get_to(v.input_hash);
}

std::string document(json body, const RunManifest& manifest) {
    if (!body.is_object()) body = json{{"result", std::move(body)}};
    body["manifest"] = manifest;
    return body.dump(2) + "\n";
}

const std::vector<std::string>& sweep_csv_header() {
    static const std::vector<std::string> h{
        "value",  "q",     "m0",    "gamma1",      "alpha",  "q_minus_1", "min_clause_arg", "regime",
        "closed", "constructive", "constructive_from_step_bound", "log", "upper", "t_sim", "t_sim_error",
        "status"};
    return h;
}

void write_sweep_csv(std::ostream& out, const study::SweepTable& table, const RunManifest& manifest) {
    out << "# manifest " << json(manifest).dump() << "\n";
    const auto& header = sweep_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : table.rows) {
        std::string status = r.status;
        // keep the status a single field
        for (char& c : status)
            if (c == ',' || c == '\n' || c == '"') c = ' ';
        out << format_double(r.value) << ',' << format_double(r.q) << ',' << format_double(r.M0) << ','
            << format_double(r.gamma1_area) << ',' << format_double(r.alpha) << ',' << format_double(r.q - 1.0)
            << ',' << format_double(r.min_clause_arg) << ',' << r.regime() << ',' << opt(r.closed) << ','
            << opt(r.constructive) << ',' << (r.constructive_from_step_bound ? 1 : 0) << ','
            << opt(r.log_bound) << ',' << opt(r.upper) << ',' << opt(r.t_sim) << ',' << opt(r.t_sim_error)
            << ',' << status << "\n";
    }
}

std::string sweep_csv(const study::SweepTable& table, const RunManifest& manifest) {
    std::ostringstream os;
    write_sweep_csv(os, table, manifest);
    return os.str();
}

}  // namespace blowtime::io
