#pragma once

#include "blowtime/bounds.hpp"
#include "blowtime/geometry.hpp"
#include "blowtime/simulator.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blowtime::study {

using geometry::BoundaryPartition;
using geometry::ConvexDomain;

enum class Axis { gamma1, q, m0 };
enum class Outputs { bounds, simulation, both };

std::string to_string(Axis axis);
Axis parse_axis(std::string_view text);
std::string to_string(Outputs outputs);
Outputs parse_outputs(std::string_view text);

struct SweepSpec {
    Axis axis = Axis::gamma1;
    std::vector<double> values;  // >= 4, strictly monotone
    // Fixed inputs. b1 and B1 must be filled in; gamma1_area is replaced by
    // the measure of `gamma1` unless the sweep varies it.
    bounds::BoundsInput base;
    ConvexDomain domain = ConvexDomain::disk(1.0);
    BoundaryPartition gamma1 = BoundaryPartition::full(ConvexDomain::disk(1.0));
    Outputs outputs = Outputs::bounds;
    sim::SimConfig sim;       // template for simulated rows; u0 is constant M0
    double row_budget = 120;  // wall-clock seconds per simulated row
    std::int64_t cap = 100'000;

    void validate() const;
};

// Log-spaced sweep values lo .. hi.
std::vector<double> log_values(double lo, double hi, int count);

struct SweepRow {
    double value = 0.0;
    double q = 0.0;
    double M0 = 0.0;
    double gamma1_area = 0.0;
    double alpha = 0.0;
    double min_clause_arg = 0.0;
    std::optional<double> closed;
    std::optional<double> constructive;
    bool constructive_from_step_bound = false;
    std::optional<double> log_bound;
    std::optional<double> upper;
    std::optional<double> t_sim;
    std::optional<double> t_sim_error;
    std::string status = "ok";

    // min-clause inactive (argument >= 1) or active
    std::string regime() const { return min_clause_arg >= 1.0 ? "inactive" : "active"; }
};

struct SweepTable {
    Axis axis = Axis::gamma1;
    std::vector<SweepRow> rows;

    static const std::vector<std::string>& numeric_columns();
    // Column by name; missing entries come back as NaN. Throws InvalidInput
    // for unknown names.
    std::vector<double> column(std::string_view name) const;
};

// Rows are evaluated in parallel and returned in input order. A failing row
// records its error in `status` and the sweep carries on.
SweepTable run_sweep(const SweepSpec& spec);

struct SlopeFit {
    std::string x_column;
    std::string y_column;
    std::string regime;  // "all" | "inactive" | "active"
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // 2-norm of log-log residuals
    double x_min = 0.0;
    double x_max = 0.0;
    int n = 0;
};

// Least squares on (log x, log y). Needs >= 4 points, all positive
// (DomainError otherwise).
SlopeFit fit_slope(std::span<const double> x, std::span<const double> y);
SlopeFit fit_slope(const SweepTable& table, std::string_view x_column, std::string_view y_column);

// Splits the rows at the min-clause crossing and fits each regime that has
// at least 4 usable rows.
std::vector<SlopeFit> fit_slope_by_regime(const SweepTable& table, std::string_view x_column,
                                          std::string_view y_column);

}  // namespace blowtime::study
