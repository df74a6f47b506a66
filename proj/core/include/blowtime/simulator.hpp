#pragma once

#include "blowtime/geometry.hpp"
#include "blowtime/grid.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blowtime::sim {

struct InitialData {
    enum class Kind { constant, affine, radial_gaussian, nodal };

    Kind kind = Kind::constant;
    // constant: {c}; affine: {c, gx, gy} for c + g . x;
    // radial_gaussian: {base, amplitude, width} about the domain centre
    std::vector<double> params{1.0};
    std::vector<double> nodal;

    static InitialData constant(double c);
    static InitialData affine(double c, double gx, double gy);
    static InitialData radial_gaussian(double base, double amplitude, double width);
    static InitialData nodal_values(std::vector<double> values);

    double evaluate(Vec3 p, Vec3 centre) const;
    std::string to_string() const;
};

// Grammar: const:c | affine:c,gx,gy | gaussian:base,amplitude,width
InitialData parse_initial_data(std::string_view text);

// int_Omega u0^{1-q} dx by volume quadrature; requires min u0 > 0.
double initial_power_integral(const ConvexDomain& domain, const InitialData& u0, double q,
                              const geometry::QuadratureSpec& spec = {});

enum class Stepper { explicit_euler, semi_implicit };

struct SimConfig {
    ConvexDomain domain = ConvexDomain::disk(1.0);
    std::optional<BoundaryPartition> gamma1;  // nullopt: Gamma_1 empty
    double q = 2.0;
    InitialData initial = InitialData::constant(1.0);
    int n1 = 64;  // radial rings (disk) or nodes along x (rectangle)
    int n2 = 32;  // angular nodes (disk) or nodes along y (rectangle)
    Stepper stepper = Stepper::semi_implicit;
    double safety = 0.05;
    std::vector<double> threshold_factors{1e2, 1e3, 1e4};  // Theta = factor * M0
    double horizon = 10.0;
    std::vector<double> snapshot_times;  // full fields stored at these times
    bool record_boundary = false;        // keep the boundary ring at every step
    bool estimate_error = true;          // half-resolution rerun
    double wall_budget = 0.0;            // seconds per run; 0 means unlimited

    void validate() const;
};

struct HistorySample {
    double t;
    double max;
};

struct SimState {
    std::vector<double> u;
    double t = 0.0;
    std::int64_t steps = 0;
    double running_max = 0.0;
    std::vector<HistorySample> history;  // running supremum of u
    bool blown_up = false;
};

// Everything a finished run keeps for post-processing.
struct RunRecord {
    std::shared_ptr<const Grid> grid;
    std::optional<BoundaryPartition> gamma1;
    double q = 2.0;
    std::vector<double> ring_times;
    std::vector<std::vector<double>> ring_values;  // per ring_times entry
    std::map<double, std::vector<double>> snapshots;
};

struct BlowupEstimate {
    std::string status;  // "blew-up" | "horizon-reached" | "budget-exceeded"
    double M0 = 0.0;
    std::vector<double> thresholds;
    std::vector<double> crossing_times;  // one per threshold reached
    std::optional<double> t_star;
    std::string model;  // "power-law-fit" | "aitken" | "last-crossing"
    std::optional<double> error_estimate;
    std::optional<double> t_star_half;  // half-resolution rerun
    double final_time = 0.0;
    double final_max = 0.0;
    std::int64_t steps = 0;
    bool dt_underflow = false;
    bool max_on_gamma1 = false;  // argmax node on the closure of Gamma_1
    Vec3 argmax;
    std::vector<int> resolution;
    std::vector<HistorySample> history;
};

class Simulator {
public:
    // check_resolution = false admits the coarse grids used for error
    // estimates (down to 8 nodes per axis).
    explicit Simulator(SimConfig config, bool check_resolution = true);
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    const SimConfig& config() const { return config_; }
    const Grid& grid() const { return *grid_; }

    SimState init() const;
    // One adaptive step; throws Error if the state has already blown up.
    void step(SimState& state);
    // Integrates from init() to the largest threshold or the horizon.
    BlowupEstimate run();

    const RunRecord& record() const { return record_; }

    // dt proposed by the step-size rule for running maximum M.
    double proposed_dt(double M) const;

private:
    struct Solver;

    void advance(SimState& state, double dt);
    void store(const SimState& state);

    SimConfig config_;
    std::shared_ptr<const Grid> grid_;
    std::unique_ptr<Solver> solver_;
    RunRecord record_;
    double M0_ = 0.0;
};

BlowupEstimate run_to_blowup(const SimConfig& config);

struct RepresentationResult {
    Vec3 x;
    double s = 0.0;         // ring parameter actually used
    double lhs = 0.0;       // u(x, T + t)
    double volume = 0.0;    // 2 int_Omega Phi u(., T)
    double layer = 0.0;     // -2 int int D_y Phi . n u
    double single = 0.0;    // 2 int int_{Gamma_1} Phi u^q
    double rhs = 0.0;
    double residual = 0.0;  // |rhs - lhs|
    double relative = 0.0;  // residual / lhs
};

// Evaluates the time-shifted boundary representation formula at the ring
// node nearest to x(s). Needs a snapshot at T and ring history over
// [T, T + t]; x must be at least two node spacings from the Gamma_1
// interface. Throws RangeError otherwise.
RepresentationResult representation_residual(const RunRecord& record, double s, double T, double t,
                                             const geometry::QuadratureSpec& spec = {});

}  // namespace blowtime::sim
