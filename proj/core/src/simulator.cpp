#include "blowtime/simulator.hpp"

#include "blowtime/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

namespace blowtime::sim {

// ------------------------------------------------------------ InitialData

InitialData InitialData::constant(double c) { return {Kind::constant, {c}, {}}; }
InitialData InitialData::affine(double c, double gx, double gy) { return {Kind::affine, {c, gx, gy}, {}}; }
InitialData InitialData::radial_gaussian(double base, double amplitude, double width) {
    if (!(width > 0.0)) throw InvalidInput("gaussian width must be positive");
    return {Kind::radial_gaussian, {base, amplitude, width}, {}};
}
InitialData InitialData::nodal_values(std::vector<double> values) { return {Kind::nodal, {}, std::move(values)}; }

double InitialData::evaluate(Vec3 p, Vec3 centre) const {
    switch (kind) {
        case Kind::constant: return params[0];
        case Kind::affine: return params[0] + params[1] * p.x + params[2] * p.y;
        case Kind::radial_gaussian: {
            const double w = params[2];
            return params[0] + params[1] * std::exp(-norm2(p - centre) / (w * w));
        }
        case Kind::nodal: break;
    }
    throw InvalidInput("nodal initial data has no pointwise formula");
}

namespace {

std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? text.size() - start : comma - start);
        double v = 0.0;
        auto r = std::from_chars(piece.data(), piece.data() + piece.size(), v);
        if (piece.empty() || r.ec != std::errc() || r.ptr != piece.data() + piece.size())
            throw InvalidInput("cannot parse number '" + std::string(piece) + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string InitialData::to_string() const {
    switch (kind) {
        case Kind::constant: return "const:" + num(params[0]);
        case Kind::affine: return "affine:" + num(params[0]) + "," + num(params[1]) + "," + num(params[2]);
        case Kind::radial_gaussian:
            return "gaussian:" + num(params[0]) + "," + num(params[1]) + "," + num(params[2]);
        case Kind::nodal: return "nodal:" + std::to_string(nodal.size());
    }
    return {};
}

InitialData parse_initial_data(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw InvalidInput("initial data must look like const:c, affine:c,gx,gy or gaussian:base,amp,width");
    const auto kind = text.substr(0, colon);
    const auto v = parse_list(text.substr(colon + 1));
    if (kind == "const" && v.size() == 1) return InitialData::constant(v[0]);
    if (kind == "affine" && v.size() == 3) return InitialData::affine(v[0], v[1], v[2]);
    if (kind == "gaussian" && v.size() == 3) return InitialData::radial_gaussian(v[0], v[1], v[2]);
    throw InvalidInput("unrecognised initial data '" + std::string(text) + "'");
}

double initial_power_integral(const ConvexDomain& domain, const InitialData& u0, double q,
                              const geometry::QuadratureSpec& spec) {
    if (!(q > 1.0)) throw DomainError("q must be greater than 1");
    if (u0.kind == InitialData::Kind::constant) {
        if (!(u0.params[0] > 0.0)) throw DomainError("the upper bound needs min u0 > 0");
        return domain.volume() * std::pow(u0.params[0], 1.0 - q);
    }
    if (u0.kind == InitialData::Kind::nodal)
        throw InvalidInput("int u0^{1-q} needs a pointwise initial-data formula");
    std::vector<double> terms;
    for (const auto& nd : geometry::volume_quadrature(domain, spec)) {
        const double v = u0.evaluate(nd.point, domain.center());
        if (!(v > 0.0)) throw DomainError("the upper bound needs min u0 > 0");
        terms.push_back(nd.weight * std::pow(v, 1.0 - q));
    }
    return pairwise_sum(terms);
}

// -------------------------------------------------------------- SimConfig

void SimConfig::validate() const {
    if (!(q > 1.0)) throw InvalidInput("q must be greater than 1");
    if (n1 < 16 || n2 < 16) throw InvalidInput("simulator resolution must be at least 16 per axis");
    if (!(safety > 0.0 && safety <= 1.0)) throw InvalidInput("dt safety factor must lie in (0, 1]");
    if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");
    if (!(wall_budget >= 0.0)) throw InvalidInput("wall-clock budget must be nonnegative");
    if (threshold_factors.empty()) throw InvalidInput("at least one blow-up threshold is required");
    for (std::size_t i = 0; i < threshold_factors.size(); ++i) {
        if (!(threshold_factors[i] >= 10.0)) throw InvalidInput("thresholds must be at least 10 M0");
        if (i > 0 && !(threshold_factors[i] > threshold_factors[i - 1]))
            throw InvalidInput("thresholds must be strictly increasing");
    }
    for (double ts : snapshot_times)
        if (!(ts >= 0.0)) throw InvalidInput("snapshot times must be nonnegative");
}

// -------------------------------------------------------------- Simulator

struct Simulator::Solver {
    using Matrix = Eigen::SparseMatrix<double>;
    using Factor = Eigen::SimplicialLDLT<Matrix>;

    Matrix A;    // Laplacian rows
    Matrix WA;   // symmetric
    Eigen::VectorXd w;
    std::map<double, std::unique_ptr<Factor>> cache;

    Factor& factor(double dt) {
        auto it = cache.find(dt);
        if (it != cache.end()) return *it->second;
        if (cache.size() > 64) cache.clear();
        Matrix M = -dt * WA;
        for (Eigen::Index i = 0; i < w.size(); ++i) M.coeffRef(i, i) += w[i];
        auto f = std::make_unique<Factor>(M);
        if (f->info() != Eigen::Success) throw Error("semi-implicit matrix factorisation failed");
        return *cache.emplace(dt, std::move(f)).first->second;
    }
};

Simulator::Simulator(SimConfig config, bool check_resolution) : config_(std::move(config)) {
    if (check_resolution) {
        config_.validate();
    } else {
        auto relaxed = config_;
        relaxed.n1 = std::max(relaxed.n1, 16);
        relaxed.n2 = std::max(relaxed.n2, 16);
        relaxed.validate();
    }
    grid_ = make_grid(config_.domain, config_.gamma1, config_.n1, config_.n2);
    solver_ = std::make_unique<Solver>();
    const auto n = static_cast<Eigen::Index>(grid_->size());
    std::vector<Eigen::Triplet<double>> trips, wtrips;
    for (const auto& t : grid_->laplacian()) {
        trips.emplace_back(t.row, t.col, t.value);
        wtrips.emplace_back(t.row, t.col, grid_->weights()[t.row] * t.value);
    }
    solver_->A.resize(n, n);
    solver_->A.setFromTriplets(trips.begin(), trips.end());
    solver_->WA.resize(n, n);
    solver_->WA.setFromTriplets(wtrips.begin(), wtrips.end());
    solver_->w = Eigen::Map<const Eigen::VectorXd>(grid_->weights().data(), n);
    record_.grid = grid_;
    record_.gamma1 = config_.gamma1;
    record_.q = config_.q;
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

SimState Simulator::init() const {
    const auto& nodes = grid_->nodes();
    SimState s;
    if (config_.initial.kind == InitialData::Kind::nodal) {
        if (config_.initial.nodal.size() != nodes.size())
            throw InvalidInput("nodal initial data has " + std::to_string(config_.initial.nodal.size()) +
                               " values but the grid has " + std::to_string(nodes.size()) + " nodes");
        s.u = config_.initial.nodal;
    } else {
        s.u.resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            s.u[i] = config_.initial.evaluate(nodes[i], config_.domain.center());
    }
    double mx = 0.0;
    for (double v : s.u) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("initial data must be finite and nonnegative");
        mx = std::max(mx, v);
    }
    if (!(mx > 0.0)) throw InvalidInput("initial data must not vanish identically");
    s.running_max = mx;
    s.history.push_back({0.0, mx});
    return s;
}

double Simulator::proposed_dt(double M) const {
    const double h = grid_->spacing();
    const double base = config_.stepper == Stepper::semi_implicit ? h * h : grid_->explicit_dt_limit();
    double dt = base;
    if (config_.gamma1) {
        const double a = 1.0 / std::max(1.0, config_.q * std::pow(M, config_.q - 1.0));
        dt = std::min(base, std::max(a * a, 0.5 * a * h));
    }
    return config_.safety * dt;
}

void Simulator::advance(SimState& state, double dt) {
    const std::size_t n = state.u.size();
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(state.u.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& f : grid_->flux())
        if (f.on_gamma1) b[f.node] += f.coef * std::pow(state.u[f.node], config_.q);

    Eigen::VectorXd next;
    if (config_.stepper == Stepper::explicit_euler) {
        next = u + dt * (solver_->A * u + b);
    } else {
        const Eigen::VectorXd rhs = solver_->w.cwiseProduct(u + dt * b);
        next = solver_->factor(dt).solve(rhs);
    }

    const double old_min = u.minCoeff();
    const double new_min = next.minCoeff();
    if (!(new_min >= old_min - 1e-10 * std::max(1.0, std::abs(old_min))) || !next.allFinite())
        throw Error("discrete maximum principle violated: min u fell from " + std::to_string(old_min) + " to " +
                    std::to_string(new_min));

    for (std::size_t i = 0; i < n; ++i) state.u[i] = std::max(0.0, next[static_cast<Eigen::Index>(i)]);
    state.t += dt;
    ++state.steps;
    state.running_max = std::max(state.running_max, next.maxCoeff());
    state.history.push_back({state.t, state.running_max});
}

void Simulator::store(const SimState& state) {
    if (config_.record_boundary) {
        std::vector<double> ring;
        ring.reserve(grid_->boundary_ring().size());
        for (std::size_t k : grid_->boundary_ring()) ring.push_back(state.u[k]);
        record_.ring_times.push_back(state.t);
        record_.ring_values.push_back(std::move(ring));
    }
    for (double ts : config_.snapshot_times)
        if (ts == state.t) record_.snapshots[ts] = state.u;
}

void Simulator::step(SimState& state) {
    if (state.blown_up) throw Error("step called on a state that has already blown up");
    double dt = proposed_dt(state.running_max);
    const double level0 = proposed_dt(0.0);
    if (config_.stepper == Stepper::semi_implicit && dt < level0) {
        // snap to dt_max 2^{-k} so factorisations are reused
        const double k = std::ceil(std::log2(level0 / dt) - 1e-12);
        dt = level0 * std::exp2(-k);
    }
    if (dt < 1e-15) {
        state.blown_up = true;
        return;
    }
    double target = config_.horizon;
    for (double ts : config_.snapshot_times)
        if (ts > state.t && ts < target) target = ts;
    if (target - state.t <= 1e-12 * std::max(1.0, target)) {
        // rounding left us just short of a stop time
        state.t = target;
        if (!record_.ring_times.empty()) {
            record_.ring_times.pop_back();
            record_.ring_values.pop_back();
        }
        store(state);
        return;
    }
    bool clipped = false;
    if (state.t + dt >= target) {
        dt = target - state.t;
        clipped = true;
    }
    advance(state, dt);
    if (clipped) state.t = target;
    store(state);
}

namespace {

double interpolate_crossing(HistorySample a, HistorySample b, double theta) {
    if (b.max <= a.max) return b.t;
    const double f = (std::log(theta) - std::log(a.max)) / (std::log(b.max) - std::log(a.max));
    return a.t + std::clamp(f, 0.0, 1.0) * (b.t - a.t);
}

// Fits M^{-2(q-1)} = c (T - t) over the last decade of the history.
std::optional<double> power_law_fit(const std::vector<HistorySample>& h, double q) {
    if (h.size() < 4) return std::nullopt;
    const double top = h.back().max;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (auto it = h.rbegin(); it != h.rend() && it->max >= 0.1 * top; ++it) {
        const double y = std::pow(it->max, -2.0 * (q - 1.0));
        sx += it->t;
        sy += y;
        sxx += it->t * it->t;
        sxy += it->t * y;
        ++n;
    }
    if (n < 4) return std::nullopt;
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) return std::nullopt;
    const double slope = (n * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / n;
    if (!(slope < 0.0)) return std::nullopt;
    const double t = -icpt / slope;
    if (!std::isfinite(t)) return std::nullopt;
    return t;
}

}  // namespace

BlowupEstimate Simulator::run() {
    record_.ring_times.clear();
    record_.ring_values.clear();
    record_.snapshots.clear();

    SimState state = init();
    M0_ = state.running_max;
    store(state);

    BlowupEstimate est;
    est.M0 = M0_;
    for (double f : config_.threshold_factors) est.thresholds.push_back(f * M0_);
    est.resolution = grid_->resolution();

    const auto started = std::chrono::steady_clock::now();
    std::size_t next = 0;
    while (true) {
        if (config_.wall_budget > 0.0 && (state.steps & 63) == 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >
                config_.wall_budget) {
            est.status = "budget-exceeded";
            break;
        }
        if (state.running_max >= est.thresholds.back()) {
            est.status = "blew-up";
            break;
        }
        if (state.t >= config_.horizon) {
            est.status = "horizon-reached";
            break;
        }
        const HistorySample before = state.history.back();
        step(state);
        if (state.blown_up) {
            est.status = "blew-up";
            est.dt_underflow = true;
            break;
        }
        const HistorySample after = state.history.back();
        while (next < est.thresholds.size() && after.max >= est.thresholds[next]) {
            est.crossing_times.push_back(interpolate_crossing(before, after, est.thresholds[next]));
            ++next;
        }
    }
    // Where does the maximum sit at the end of the run?
    std::size_t arg = 0;
    for (std::size_t i = 0; i < state.u.size(); ++i)
        if (state.u[i] > state.u[arg]) arg = i;
    est.argmax = grid_->nodes()[arg];
    if (config_.gamma1) {
        const auto& ring = grid_->boundary_ring();
        for (std::size_t k = 0; k < ring.size(); ++k) {
            if (ring[k] != arg) continue;
            const double s = grid_->ring_parameters()[k];
            est.max_on_gamma1 = config_.gamma1->contains(s) ||
                                config_.gamma1->distance_to_interface(s) <= 0.5 * grid_->spacing();
        }
    }

    est.final_time = state.t;
    est.final_max = state.running_max;
    est.steps = state.steps;
    est.history = state.history;

    if (est.status == "blew-up" && !est.crossing_times.empty()) {
        const double last = est.crossing_times.back();
        const double t_end = std::max(last, state.t);
        if (auto fit = power_law_fit(state.history, config_.q); fit && *fit >= t_end) {
            est.t_star = *fit;
            est.model = "power-law-fit";
        } else if (est.crossing_times.size() >= 3) {
            const std::size_t m = est.crossing_times.size();
            const double t1 = est.crossing_times[m - 3], t2 = est.crossing_times[m - 2], t3 = est.crossing_times[m - 1];
            const double d2 = (t3 - t2) - (t2 - t1);
            const double aitken = d2 != 0.0 ? t3 - (t3 - t2) * (t3 - t2) / d2 : t3;
            if (std::isfinite(aitken) && aitken >= t_end) {
                est.t_star = aitken;
                est.model = "aitken";
            }
        }
        if (!est.t_star) {
            est.t_star = t_end;
            est.model = "last-crossing";
        }
    } else if (est.status == "blew-up") {
        est.t_star = state.t;
        est.model = "last-crossing";
    }

    if (est.t_star && config_.estimate_error) {
        SimConfig half = config_;
        half.n1 = std::max(8, config_.n1 / 2);
        half.n2 = std::max(8, config_.n2 / 2);
        half.estimate_error = false;
        half.record_boundary = false;
        half.snapshot_times.clear();
        Simulator coarse(half, false);
        const auto h = coarse.run();
        if (h.t_star) {
            est.t_star_half = h.t_star;
            est.error_estimate = std::abs(*est.t_star - *h.t_star);
        }
    }
    return est;
}

BlowupEstimate run_to_blowup(const SimConfig& config) {
    if (!config.gamma1) throw InvalidInput("run_to_blowup needs a nonempty Gamma_1");
    Simulator sim(config);
    return sim.run();
}

}  // namespace blowtime::sim
