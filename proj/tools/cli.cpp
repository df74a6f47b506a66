#include "cli.hpp"

#include "blowtime/bounds.hpp"
#include "blowtime/errors.hpp"
#include "blowtime/geometry.hpp"
#include "blowtime/heat_kernel.hpp"
#include "blowtime/report_io.hpp"
#include "blowtime/simulator.hpp"
#include "blowtime/study.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace blowtime::cli {

namespace {

using io::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kGrammar = R"(
Domains (--domain):
  disk:R            disk of radius R centred at the origin
  ellipse:a,b       ellipse with semi-axes a along x and b along y
  rect:w,h          rectangle [0,w] x [0,h]
  ball:R            ball of radius R in three dimensions

Gamma_1 partitions (--gamma1), in the boundary parameter s:
  full              the whole boundary
  arcs:s0-s1,...    union of half-open arcs [s0,s1)
                    disk, ellipse: arc length from (a,0), counter-clockwise
                    rect: arc length from (0,0) along bottom, right, top, left
                    ball: polar arc length s in [0, pi R]; arcs are latitude bands
  none              empty Gamma_1 (simulate only)

Initial data (--u0):
  const:c | affine:c,gx,gy | gaussian:base,amplitude,width

Environment:
  BLOWTIME_THREADS   worker threads (default: hardware concurrency)
  SOURCE_DATE_EPOCH  fixes the manifest timestamp

Exit status: 0 success, 1 computation failure, 2 usage error.
)";

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

std::map<std::string, std::string> collect_args(const CLI::App* sc) {
    std::map<std::string, std::string> m;
    for (const CLI::Option* o : sc->get_options()) {
        if (o->count() == 0) continue;
        const std::string name = o->get_name();
        if (name == "--help") continue;
        std::string joined;
        for (const auto& r : o->results()) joined += (joined.empty() ? "" : ",") + r;
        m[name] = joined;
    }
    return m;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        out.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("failed writing '" + path + "'");
}

struct Quadrature {
    int boundary = geometry::QuadratureSpec{}.boundary_nodes;
    int volume = geometry::QuadratureSpec{}.volume_nodes;
    int time = geometry::QuadratureSpec{}.time_nodes;

    void attach(CLI::App* sc) {
        sc->add_option("--boundary-nodes", boundary, "boundary quadrature nodes")->capture_default_str();
        sc->add_option("--volume-nodes", volume, "volume quadrature order")->capture_default_str();
        sc->add_option("--time-nodes", time, "time quadrature order")->capture_default_str();
    }

    geometry::QuadratureSpec spec() const {
        geometry::QuadratureSpec s;
        s.boundary_nodes = boundary;
        s.volume_nodes = volume;
        s.time_nodes = time;
        try {
            s.validate();
        } catch (const InvalidInput& e) {
            throw UsageError(e.what());
        }
        return s;
    }
};

struct Constants {
    double b1 = 0.0;
    double B1 = 0.0;
    std::string source;
    std::optional<kernel::KernelConstants> estimate;
};

Constants resolve_constants(const geometry::ConvexDomain& domain, const geometry::QuadratureSpec& spec,
                            const std::optional<double>& b1, const std::optional<double>& B1) {
    require(b1.has_value() == B1.has_value(), "--b1 and --B1 must be given together");
    Constants c;
    if (b1) {
        require(*b1 > 0.0 && *b1 <= 0.5, "--b1 must lie in (0, 1/2]");
        require(*B1 > 0.0, "--B1 must be positive");
        c.b1 = *b1;
        c.B1 = *B1;
        c.source = "given";
        return c;
    }
    c.estimate = kernel::estimate_constants(domain, spec);
    c.b1 = c.estimate->b1;
    c.B1 = c.estimate->B1;
    c.source = "estimated";
    return c;
}

void check_q(double q) { require(q > 1.0 && std::isfinite(q), "--q: q > 1 is required, got " + io::format_double(q)); }
void check_m0(double m0) { require(m0 > 0.0 && std::isfinite(m0), "--m0: M0 > 0 is required"); }
void check_alpha(double alpha, int dim) {
    const double hi = 1.0 / (dim - 1);
    require(alpha >= 0.0 && alpha < hi,
            "--alpha must lie in [0, " + io::format_double(hi) + ") for dimension " + std::to_string(dim));
}

json constants_json(const Constants& c) {
    json j{{"b1", c.b1}, {"B1", c.B1}, {"source", c.source}};
    if (c.estimate) {
        j["b1_err"] = c.estimate->b1_err;
        j["B1_err"] = c.estimate->B1_err;
    }
    return j;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"blowtime: blow-up time bounds for the heat equation with a nonlinear boundary flux"};
    app.name(args.empty() ? "blowtime" : std::filesystem::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.footer(kGrammar);
    app.set_version_flag("--version", std::string(BLOWTIME_VERSION));

    std::string output = "-";
    auto add_output = [&](CLI::App* sc) {
        sc->add_option("-o,--output", output, "output path, '-' for standard output")->capture_default_str();
    };

    // constants
    auto* c_cmd = app.add_subcommand("constants", "kernel constants b1 and B1 for a domain");
    std::string c_domain;
    Quadrature c_quad;
    c_cmd->add_option("--domain", c_domain, "domain, e.g. disk:1")->required();
    c_quad.attach(c_cmd);
    add_output(c_cmd);

    // bounds
    auto* b_cmd = app.add_subcommand("bounds", "lower and upper bounds on the blow-up time");
    std::string b_domain = "disk:1", b_gamma1 = "full", b_u0;
    double b_q = 0.0, b_m0 = 0.0, b_alpha = 0.0, b_cfree = 1.0;
    std::optional<double> b_b1, b_B1;
    std::int64_t b_cap = bounds::kDefaultCap;
    Quadrature b_quad;
    b_cmd->add_option("--domain", b_domain, "domain")->capture_default_str();
    b_cmd->add_option("--gamma1", b_gamma1, "Gamma_1 partition")->capture_default_str();
    b_cmd->add_option("--q", b_q, "flux exponent, q > 1")->required();
    b_cmd->add_option("--m0", b_m0, "sup of the initial data, M0 > 0")->required();
    b_cmd->add_option("--alpha", b_alpha, "Hoelder exponent alpha in [0, 1/(N-1))")->capture_default_str();
    b_cmd->add_option("--b1", b_b1, "use this b1 instead of estimating it");
    b_cmd->add_option("--B1", b_B1, "use this B1 instead of estimating it");
    b_cmd->add_option("--u0", b_u0, "initial data for the upper bound (default const:M0)");
    b_cmd->add_option("--c-free", b_cfree, "free constant of the shape-only log bound")->capture_default_str();
    b_cmd->add_option("--cap", b_cap, "step cap for the constructive bound")->capture_default_str();
    b_quad.attach(b_cmd);
    add_output(b_cmd);

    // trace
    auto* t_cmd = app.add_subcommand("trace", "the multiplicative sequence M_k behind the lower bound");
    double t_q = 0.0, t_m0 = 0.0, t_alpha = 0.0;
    std::optional<double> t_delta1, t_tstar, t_b1, t_B1;
    std::string t_domain = "disk:1", t_gamma1 = "full";
    std::int64_t t_cap = bounds::kDefaultCap;
    bool t_summary = false;
    std::string t_format = "csv";
    Quadrature t_quad;
    t_cmd->add_option("--q", t_q, "flux exponent, q > 1")->required();
    t_cmd->add_option("--m0", t_m0, "starting level M0 > 0")->required();
    auto* t_d1 = t_cmd->add_option("--delta1", t_delta1, "per-step target delta_1");
    t_cmd->add_option("--t-star", t_tstar, "step time t* in (0, 1]; delta_1 follows from the domain")
        ->excludes(t_d1);
    t_cmd->add_option("--domain", t_domain, "domain (with --t-star)")->capture_default_str();
    t_cmd->add_option("--gamma1", t_gamma1, "Gamma_1 partition (with --t-star)")->capture_default_str();
    t_cmd->add_option("--alpha", t_alpha, "Hoelder exponent (with --t-star)")->capture_default_str();
    t_cmd->add_option("--b1", t_b1, "use this b1 instead of estimating it");
    t_cmd->add_option("--B1", t_B1, "use this B1 instead of estimating it");
    t_cmd->add_option("--cap", t_cap, "maximum number of steps")->capture_default_str();
    t_cmd->add_flag("--summary", t_summary, "omit the per-step entries (json only)");
    t_cmd->add_option("--format", t_format, "csv (k,M_k,lambda_k,x_k) or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    t_quad.attach(t_cmd);
    add_output(t_cmd);

    // simulate
    auto* s_cmd = app.add_subcommand("simulate", "finite-difference run to blow-up");
    std::string s_domain = "disk:1", s_gamma1 = "full", s_u0 = "const:1", s_stepper = "semi-implicit";
    double s_q = 0.0;
    sim::SimConfig s_cfg;
    bool s_no_err = false, s_no_history = false;
    std::string s_history_csv;
    s_cmd->add_option("--domain", s_domain, "disk:R or rect:w,h")->capture_default_str();
    s_cmd->add_option("--gamma1", s_gamma1, "Gamma_1 partition or none")->capture_default_str();
    s_cmd->add_option("--q", s_q, "flux exponent, q > 1")->required();
    s_cmd->add_option("--u0", s_u0, "initial data")->capture_default_str();
    s_cmd->add_option("--n1", s_cfg.n1, "radial rings (disk) or nodes along x (rect)")->capture_default_str();
    s_cmd->add_option("--n2", s_cfg.n2, "angular nodes (disk) or nodes along y (rect)")->capture_default_str();
    s_cmd->add_option("--safety", s_cfg.safety, "time-step safety factor in (0, 1]")->capture_default_str();
    s_cmd->add_option("--horizon", s_cfg.horizon, "final time if no blow-up")->capture_default_str();
    s_cmd->add_option("--thresholds", s_cfg.threshold_factors, "blow-up thresholds as multiples of M0")
        ->delimiter(',');
    s_cmd->add_option("--stepper", s_stepper, "semi-implicit or explicit")
        ->check(CLI::IsMember({"semi-implicit", "explicit"}))
        ->capture_default_str();
    s_cmd->add_option("--budget", s_cfg.wall_budget, "wall-clock budget in seconds, 0 for none")
        ->capture_default_str();
    s_cmd->add_flag("--no-error-estimate", s_no_err, "skip the half-resolution rerun");
    s_cmd->add_flag("--no-history", s_no_history, "omit the sup-norm history from the JSON");
    s_cmd->add_option("--history-csv", s_history_csv, "write the M(t) history as CSV (time,maxval)");
    add_output(s_cmd);

    // sweep
    auto* w_cmd = app.add_subcommand("sweep", "parameter sweep of the bounds, optionally with simulation");
    std::string w_axis, w_domain = "disk:1", w_gamma1 = "full", w_outputs = "bounds", w_sidecar;
    std::vector<double> w_values, w_range;
    std::vector<std::string> w_fits;
    double w_q = 2.0, w_m0 = 1.0, w_alpha = 0.0, w_budget = 120.0;
    std::optional<double> w_b1, w_B1;
    std::int64_t w_cap = 100'000;
    sim::SimConfig w_sim;
    Quadrature w_quad;
    w_cmd->add_option("--axis", w_axis, "gamma1, q or m0")
        ->required()
        ->check(CLI::IsMember({"gamma1", "q", "m0"}));
    auto* w_vals = w_cmd->add_option("--values", w_values, "comma-separated values")->delimiter(',');
    w_cmd->add_option("--range", w_range, "lo,hi,count for log-spaced values")
        ->delimiter(',')
        ->expected(3)
        ->excludes(w_vals);
    w_cmd->add_option("--domain", w_domain, "domain")->capture_default_str();
    w_cmd->add_option("--gamma1", w_gamma1, "Gamma_1 when the axis is not gamma1")->capture_default_str();
    w_cmd->add_option("--q", w_q, "fixed q")->capture_default_str();
    w_cmd->add_option("--m0", w_m0, "fixed M0")->capture_default_str();
    w_cmd->add_option("--alpha", w_alpha, "Hoelder exponent")->capture_default_str();
    w_cmd->add_option("--b1", w_b1, "use this b1 instead of estimating it");
    w_cmd->add_option("--B1", w_B1, "use this B1 instead of estimating it");
    w_cmd->add_option("--outputs", w_outputs, "bounds, simulation or both")
        ->check(CLI::IsMember({"bounds", "simulation", "both"}))
        ->capture_default_str();
    w_cmd->add_option("--row-budget", w_budget, "wall-clock seconds per simulated row")->capture_default_str();
    w_cmd->add_option("--cap", w_cap, "step cap for the constructive bound")->capture_default_str();
    w_cmd->add_option("--n1", w_sim.n1, "simulation resolution, first axis")->capture_default_str();
    w_cmd->add_option("--n2", w_sim.n2, "simulation resolution, second axis")->capture_default_str();
    w_cmd->add_option("--safety", w_sim.safety, "simulation time-step safety factor")->capture_default_str();
    w_cmd->add_option("--fit", w_fits, "x:y column pair to fit (repeatable)");
    w_cmd->add_option("--sidecar", w_sidecar, "JSON file for the slope fits");
    w_quad.attach(w_cmd);
    add_output(w_cmd);

    // verify-identity
    auto* v_cmd = app.add_subcommand("verify-identity", "check the convex heat-kernel identity on the boundary");
    std::string v_domain = "disk:1";
    std::vector<double> v_s{0.3}, v_t{0.05, 0.1, 0.2, 0.5, 0.75, 1.0};
    double v_tol = 1e-3;
    bool v_refine = false;
    Quadrature v_quad;
    v_cmd->add_option("--domain", v_domain, "domain")->capture_default_str();
    v_cmd->add_option("--s", v_s, "boundary parameters")->delimiter(',')->capture_default_str();
    v_cmd->add_option("--t", v_t, "times in (0, 1]")->delimiter(',')->capture_default_str();
    v_cmd->add_option("--tolerance", v_tol, "largest acceptable residual")->capture_default_str();
    v_cmd->add_flag("--refine", v_refine, "repeat with doubled quadrature and report the ratio");
    v_quad.attach(v_cmd);
    add_output(v_cmd);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    CLI::App* sc = app.get_subcommands().front();
    const auto manifest = io::RunManifest::make(sc->get_name(), collect_args(sc));

    try {
        if (sc == c_cmd) {
            const auto domain = geometry::parse_domain(c_domain);
            const auto k = kernel::estimate_constants(domain, c_quad.spec());
            json body = k;
            body["domain"] = domain.to_string();
            emit(io::document(body, manifest), output, out);
        } else if (sc == b_cmd) {
            check_q(b_q);
            check_m0(b_m0);
            const auto domain = geometry::parse_domain(b_domain);
            check_alpha(b_alpha, domain.dimension());
            require(b_cap >= 1, "--cap must be positive");
            const auto part = geometry::parse_partition(b_gamma1, domain);
            const auto spec = b_quad.spec();
            const auto consts = resolve_constants(domain, spec, b_b1, b_B1);
            bounds::BoundsInput in;
            in.q = b_q;
            in.M0 = b_m0;
            in.alpha = b_alpha;
            in.dim = domain.dimension();
            in.gamma1_area = geometry::gamma1_measure(domain, part);
            in.b1 = consts.b1;
            in.B1 = consts.B1;
            std::optional<double> u0_integral;
            const auto u0 = b_u0.empty() ? sim::InitialData::constant(b_m0) : sim::parse_initial_data(b_u0);
            try {
                u0_integral = sim::initial_power_integral(domain, u0, b_q, spec);
            } catch (const DomainError&) {
                // no upper bound without min u0 > 0
            }
            const auto report = bounds::compute_bounds(in, u0_integral, b_cfree, b_cap);
            json body = report;
            body["domain"] = domain.to_string();
            body["gamma1"] = part.to_string();
            body["u0"] = u0.to_string();
            body["kernel_constants"] = constants_json(consts);
            emit(io::document(body, manifest), output, out);
        } else if (sc == t_cmd) {
            check_q(t_q);
            check_m0(t_m0);
            require(t_cap >= 1, "--cap must be positive");
            require(t_delta1.has_value() || t_tstar.has_value(), "trace needs --delta1 or --t-star");
            double d1 = 0.0;
            json extra;
            if (t_delta1) {
                require(*t_delta1 > 0.0, "--delta1 must be positive");
                d1 = *t_delta1;
            } else {
                require(*t_tstar > 0.0 && *t_tstar <= 1.0, "--t-star must lie in (0, 1]");
                const auto domain = geometry::parse_domain(t_domain);
                check_alpha(t_alpha, domain.dimension());
                const auto part = geometry::parse_partition(t_gamma1, domain);
                const auto consts = resolve_constants(domain, t_quad.spec(), t_b1, t_B1);
                bounds::BoundsInput in;
                in.q = t_q;
                in.M0 = t_m0;
                in.alpha = t_alpha;
                in.dim = domain.dimension();
                in.gamma1_area = geometry::gamma1_measure(domain, part);
                in.b1 = consts.b1;
                in.B1 = consts.B1;
                d1 = bounds::delta1(*t_tstar, in);
                extra = {{"domain", domain.to_string()},
                         {"gamma1", part.to_string()},
                         {"kernel_constants", constants_json(consts)}};
            }
            auto trace = bounds::build_sequence(t_q, t_m0, d1, t_cap, t_format == "csv" || !t_summary);
            if (t_tstar) trace.t_star = *t_tstar;
            if (t_format == "csv") {
                std::ostringstream os;
                os << "# manifest " << json(manifest).dump() << "\n";
                os << "k,M_k,lambda_k,x_k\n";
                for (const auto& e : trace.entries)
                    os << e.k << ',' << io::format_double(e.M) << ',' << io::format_double(e.lambda) << ','
                       << io::format_double(e.x) << "\n";
                emit(os.str(), output, out);
                return 0;
            }
            json body = trace;
            body["step_count_lower_bound"] = bounds::step_count_lower_bound(t_q, t_m0, d1);
            body["step_count_upper_bound"] = bounds::step_count_upper_bound(t_q, t_m0, d1);
            body["E_q"] = bounds::e_q(t_q);
            for (auto& [k, v] : extra.items()) body[k] = v;
            emit(io::document(body, manifest), output, out);
        } else if (sc == s_cmd) {
            check_q(s_q);
            sim::SimConfig cfg = s_cfg;
            cfg.domain = geometry::parse_domain(s_domain);
            require(cfg.domain.kind() == geometry::DomainKind::disk ||
                        cfg.domain.kind() == geometry::DomainKind::rectangle,
                    "simulate supports disk and rect domains");
            if (s_gamma1 != "none") cfg.gamma1 = geometry::parse_partition(s_gamma1, cfg.domain);
            cfg.q = s_q;
            cfg.initial = sim::parse_initial_data(s_u0);
            cfg.stepper = s_stepper == "explicit" ? sim::Stepper::explicit_euler : sim::Stepper::semi_implicit;
            cfg.estimate_error = !s_no_err;
            cfg.validate();
            sim::Simulator simulator(cfg);
            auto est = simulator.run();
            if (!s_history_csv.empty()) {
                std::ostringstream os;
                os << "# manifest " << json(manifest).dump() << "\n";
                os << "time,maxval\n";
                for (const auto& h : est.history) os << io::format_double(h.t) << ',' << io::format_double(h.max) << "\n";
                emit(os.str(), s_history_csv, out);
            }
            if (s_no_history) est.history.clear();
            json body = est;
            body["domain"] = cfg.domain.to_string();
            body["gamma1"] = cfg.gamma1 ? cfg.gamma1->to_string() : "none";
            body["q"] = cfg.q;
            body["u0"] = cfg.initial.to_string();
            body["upper_bound"] = nullptr;
            if (cfg.gamma1) {
                try {
                    const double area = geometry::gamma1_measure(cfg.domain, *cfg.gamma1);
                    body["upper_bound"] =
                        bounds::upper_bound(cfg.q, area, sim::initial_power_integral(cfg.domain, cfg.initial, cfg.q));
                } catch (const DomainError&) {
                }
            }
            emit(io::document(body, manifest), output, out);
            if (est.status == "budget-exceeded") return 1;
        } else if (sc == w_cmd) {
            study::SweepSpec spec;
            spec.axis = study::parse_axis(w_axis);
            if (!w_range.empty()) {
                require(w_range[2] >= 4 && w_range[2] == std::floor(w_range[2]), "--range count must be an integer >= 4");
                require(w_range[0] > 0.0 && w_range[1] > 0.0, "--range bounds must be positive");
                spec.values = study::log_values(w_range[0], w_range[1], static_cast<int>(w_range[2]));
                if (spec.axis == study::Axis::q)
                    for (double& v : spec.values) v += 1.0;  // range is over q - 1
            } else {
                spec.values = w_values;
            }
            require(spec.values.size() >= 4, "sweep needs --values (at least 4) or --range");
            spec.domain = geometry::parse_domain(w_domain);
            spec.gamma1 = geometry::parse_partition(w_gamma1, spec.domain);
            if (spec.axis != study::Axis::q) check_q(w_q);
            if (spec.axis != study::Axis::m0) check_m0(w_m0);
            check_alpha(w_alpha, spec.domain.dimension());
            spec.outputs = study::parse_outputs(w_outputs);
            spec.row_budget = w_budget;
            spec.cap = w_cap;
            spec.sim = w_sim;
            const auto consts = resolve_constants(spec.domain, w_quad.spec(), w_b1, w_B1);
            spec.base.q = w_q;
            spec.base.M0 = w_m0;
            spec.base.alpha = w_alpha;
            spec.base.dim = spec.domain.dimension();
            spec.base.b1 = consts.b1;
            spec.base.B1 = consts.B1;
            spec.validate();
            const auto table = study::run_sweep(spec);
            emit(io::sweep_csv(table, manifest), output, out);

            std::vector<std::pair<std::string, std::string>> pairs;
            for (const auto& f : w_fits) {
                const auto colon = f.find(':');
                require(colon != std::string::npos, "--fit must look like x:y");
                pairs.emplace_back(f.substr(0, colon), f.substr(colon + 1));
            }
            if (pairs.empty()) {
                const std::string x = spec.axis == study::Axis::q ? "q_minus_1" : study::to_string(spec.axis);
                if (spec.outputs != study::Outputs::simulation) {
                    pairs.emplace_back(x, "closed");
                    pairs.emplace_back(x, "constructive");
                }
                pairs.emplace_back(x, "upper");
                if (spec.outputs != study::Outputs::bounds) pairs.emplace_back(x, "t_sim");
            }
            json fits = json::array();
            json skipped = json::array();
            for (const auto& [x, y] : pairs) {
                try {
                    fits.push_back(study::fit_slope(table, x, y));
                } catch (const DomainError& e) {
                    skipped.push_back({{"x_column", x}, {"y_column", y}, {"regime", "all"}, {"reason", e.what()}});
                } catch (const InvalidInput& e) {
                    throw UsageError(e.what());
                }
                for (const auto& f : study::fit_slope_by_regime(table, x, y)) fits.push_back(f);
            }
            std::string sidecar = w_sidecar;
            if (sidecar.empty() && output != "-" && !output.empty())
                sidecar = std::filesystem::path(output).replace_extension(".fits.json").string();
            if (!sidecar.empty()) {
                json body{{"fits", fits}, {"skipped", skipped}, {"rows", table.rows}, {"axis", w_axis}};
                emit(io::document(body, manifest), sidecar, out);
            }
            for (const auto& r : table.rows)
                if (r.status != "ok") err << "row " << io::format_double(r.value) << ": " << r.status << "\n";
        } else if (sc == v_cmd) {
            const auto domain = geometry::parse_domain(v_domain);
            const auto spec = v_quad.spec();
            for (double t : v_t) require(t > 0.0 && t <= 1.0, "--t values must lie in (0, 1]");
            json samples = json::array();
            double worst = 0.0;
            for (double s : v_s) {
                for (double t : v_t) {
                    const auto terms = kernel::convex_identity(domain, s, t, spec);
                    json row{{"s", s}, {"t", t}, {"terms", terms}};
                    worst = std::max(worst, terms.residual);
                    if (v_refine) {
                        const auto fine = kernel::convex_identity(domain, s, t, spec.doubled());
                        row["refined"] = fine;
                        row["ratio"] = terms.residual > 0.0 ? fine.residual / terms.residual : 0.0;
                    }
                    samples.push_back(row);
                }
            }
            const bool passed = worst < v_tol;
            json body{{"domain", domain.to_string()},
                      {"samples", samples},
                      {"max_residual", worst},
                      {"tolerance", v_tol},
                      {"passed", passed}};
            emit(io::document(body, manifest), output, out);
            if (!passed) return 1;
        }
    } catch (const UsageError& e) {
        err << sc->get_name() << ": " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        err << sc->get_name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << sc->get_name() << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv, argv + argc);
    return parse_and_dispatch(args, out, err);
}

int parse_and_dispatch(int argc, const char* const* argv) {
    return parse_and_dispatch(argc, argv, std::cout, std::cerr);
}

}  // namespace blowtime::cli
