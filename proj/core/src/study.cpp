#include "blowtime/study.hpp"

#include "blowtime/errors.hpp"
#include "blowtime/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blowtime::study {

std::string to_string(Axis axis) {
    switch (axis) {
        case Axis::gamma1: return "gamma1";
        case Axis::q: return "q";
        case Axis::m0: return "m0";
    }
    return {};
}

Axis parse_axis(std::string_view text) {
    if (text == "gamma1") return Axis::gamma1;
    if (text == "q") return Axis::q;
    if (text == "m0") return Axis::m0;
    throw InvalidInput("sweep axis must be gamma1, q or m0, got '" + std::string(text) + "'");
}

std::string to_string(Outputs outputs) {
    switch (outputs) {
        case Outputs::bounds: return "bounds";
        case Outputs::simulation: return "simulation";
        case Outputs::both: return "both";
    }
    return {};
}

Outputs parse_outputs(std::string_view text) {
    if (text == "bounds") return Outputs::bounds;
    if (text == "simulation") return Outputs::simulation;
    if (text == "both") return Outputs::both;
    throw InvalidInput("sweep outputs must be bounds, simulation or both, got '" + std::string(text) + "'");
}

std::vector<double> log_values(double lo, double hi, int count) {
    if (hi < lo) {
        auto v = log_spaced(hi, lo, count);
        return {v.rbegin(), v.rend()};
    }
    return log_spaced(lo, hi, count);
}

void SweepSpec::validate() const {
    if (values.size() < 4) throw InvalidInput("a sweep needs at least 4 values");
    const bool up = values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1]))
            throw InvalidInput("sweep values must be strictly monotone");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidInput("sweep values must be finite");
        switch (axis) {
            case Axis::q:
                if (!(v > 1.0)) throw InvalidInput("q must be greater than 1");
                break;
            case Axis::m0:
                if (!(v > 0.0)) throw InvalidInput("M0 must be positive");
                break;
            case Axis::gamma1:
                if (!(v > 0.0)) throw InvalidInput("|Gamma_1| must be positive");
                if (v > domain.boundary_measure() * (1.0 + 1e-12))
                    throw InvalidInput("|Gamma_1| cannot exceed the boundary measure");
                break;
        }
    }
    if (!(base.b1 > 0.0) || !(base.B1 > 0.0)) throw InvalidInput("sweep needs the kernel constants b1 and B1");
    if (base.dim != domain.dimension()) throw InvalidInput("sweep dimension does not match the domain");
    if (outputs != Outputs::bounds && domain.dimension() != 2)
        throw InvalidInput("simulated sweep rows need a disk or rectangle");
    if (!(row_budget > 0.0)) throw InvalidInput("row budget must be positive");
    if (cap < 1) throw InvalidInput("sequence cap must be positive");
}

namespace {

BoundaryPartition partition_for(const SweepSpec& spec, double area) {
    if (area >= spec.domain.parameter_length() * (1.0 - 1e-12)) return BoundaryPartition::full(spec.domain);
    return BoundaryPartition::arcs(spec.domain, {{0.0, area}});
}

SweepRow evaluate(const SweepSpec& spec, double value) {
    SweepRow row;
    row.value = value;
    bounds::BoundsInput in = spec.base;
    std::optional<BoundaryPartition> part;
    if (spec.axis == Axis::gamma1) {
        in.gamma1_area = value;
    } else {
        in.gamma1_area = geometry::gamma1_measure(spec.domain, spec.gamma1);
        part = spec.gamma1;
    }
    if (spec.axis == Axis::q) in.q = value;
    if (spec.axis == Axis::m0) in.M0 = value;
    row.q = in.q;
    row.M0 = in.M0;
    row.gamma1_area = in.gamma1_area;
    row.alpha = in.alpha;

    std::vector<std::string> problems;
    try {
        in.validate();
        row.min_clause_arg = bounds::min_clause_argument(in);
        // Constant u0 = M0, so int u0^{1-q} = |Omega| M0^{1-q}.
        const double u0_integral = spec.domain.volume() * std::pow(in.M0, 1.0 - in.q);
        row.upper = bounds::upper_bound(in.q, in.gamma1_area, u0_integral);
        if (spec.outputs != Outputs::simulation) {
            row.closed = bounds::lower_bound_closed(in);
            const auto c = bounds::lower_bound_constructive(in, {}, spec.cap);
            row.constructive = c.value;
            row.constructive_from_step_bound = c.from_step_bound;
            const auto lg = bounds::lower_bound_log(in.q, in.M0, in.gamma1_area, in.dim);
            if (lg.applicable) row.log_bound = lg.value;
        }
    } catch (const std::exception& e) {
        problems.push_back(std::string("bounds: ") + e.what());
    }

    if (spec.outputs != Outputs::bounds && problems.empty()) {
        try {
            sim::SimConfig cfg = spec.sim;
            cfg.domain = spec.domain;
            cfg.q = in.q;
            cfg.initial = sim::InitialData::constant(in.M0);
            cfg.gamma1 = part ? *part : partition_for(spec, in.gamma1_area);
            cfg.wall_budget = spec.row_budget;
            cfg.record_boundary = false;
            cfg.snapshot_times.clear();
            const auto est = sim::run_to_blowup(cfg);
            row.t_sim = est.t_star;
            row.t_sim_error = est.error_estimate;
            if (!est.t_star) problems.push_back("simulation: " + est.status);
        } catch (const std::exception& e) {
            problems.push_back(std::string("simulation: ") + e.what());
        }
    }
    if (!problems.empty()) {
        row.status.clear();
        for (const auto& p : problems) row.status += (row.status.empty() ? "" : "; ") + p;
    }
    return row;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepTable table;
    table.axis = spec.axis;
    table.rows.resize(spec.values.size());
    parallel_for(spec.values.size(), [&](std::size_t i) { table.rows[i] = evaluate(spec, spec.values[i]); });
    return table;
}

const std::vector<std::string>& SweepTable::numeric_columns() {
    static const std::vector<std::string> cols{"value",  "q",            "m0",  "gamma1", "alpha",
                                               "q_minus_1", "min_clause_arg", "closed", "constructive",
                                               "log",    "upper",        "t_sim", "t_sim_error"};
    return cols;
}

std::vector<double> SweepTable::column(std::string_view name) const {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    auto opt = [&](const std::optional<double>& v) { return v ? *v : nan; };
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (name == "value") out.push_back(r.value);
        else if (name == "q") out.push_back(r.q);
        else if (name == "m0") out.push_back(r.M0);
        else if (name == "gamma1") out.push_back(r.gamma1_area);
        else if (name == "alpha") out.push_back(r.alpha);
        else if (name == "q_minus_1") out.push_back(r.q - 1.0);
        else if (name == "min_clause_arg") out.push_back(r.min_clause_arg);
        else if (name == "closed") out.push_back(opt(r.closed));
        else if (name == "constructive") out.push_back(opt(r.constructive));
        else if (name == "log") out.push_back(opt(r.log_bound));
        else if (name == "upper") out.push_back(opt(r.upper));
        else if (name == "t_sim") out.push_back(opt(r.t_sim));
        else if (name == "t_sim_error") out.push_back(opt(r.t_sim_error));
        else throw InvalidInput("unknown sweep column '" + std::string(name) + "'");
    }
    return out;
}

SlopeFit fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidInput("slope fit: column lengths differ");
    if (x.size() < 4) throw InvalidInput("slope fit needs at least 4 points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("slope fit needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const auto n = static_cast<double>(lx.size());
    // centred sums keep the fit accurate for narrow ranges
    const double mx = pairwise_sum(lx) / n;
    const double my = pairwise_sum(ly) / n;
    std::vector<double> sxx, sxy;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx.push_back((lx[i] - mx) * (lx[i] - mx));
        sxy.push_back((lx[i] - mx) * (ly[i] - my));
    }
    const double den = pairwise_sum(sxx);
    if (!(den > 0.0)) throw DomainError("slope fit needs at least two distinct x values");
    SlopeFit f;
    f.slope = pairwise_sum(sxy) / den;
    f.intercept = my - f.slope * mx;
    std::vector<double> r2;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        r2.push_back(r * r);
    }
    f.residual = std::sqrt(pairwise_sum(r2));
    f.x_min = *std::min_element(x.begin(), x.end());
    f.x_max = *std::max_element(x.begin(), x.end());
    f.n = static_cast<int>(x.size());
    f.regime = "all";
    return f;
}

SlopeFit fit_slope(const SweepTable& table, std::string_view x_column, std::string_view y_column) {
    const auto x = table.column(x_column);
    const auto y = table.column(y_column);
    auto f = fit_slope(x, y);
    f.x_column = x_column;
    f.y_column = y_column;
    return f;
}

std::vector<SlopeFit> fit_slope_by_regime(const SweepTable& table, std::string_view x_column,
                                          std::string_view y_column) {
    const auto x = table.column(x_column);
    const auto y = table.column(y_column);
    std::vector<SlopeFit> out;
    for (const char* regime : {"inactive", "active"}) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            if (table.rows[i].regime() != regime) continue;
            if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
        if (xs.size() < 4) continue;
        auto f = fit_slope(xs, ys);
        f.x_column = x_column;
        f.y_column = y_column;
        f.regime = regime;
        out.push_back(f);
    }
    return out;
}

}  // namespace blowtime::study
