#pragma once

#include "blowtime/errors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blowtime::bounds {

// E_q = (q - 1)^{q - 1} / q^q, the maximum of g(lambda) = (lambda - 1) / lambda^q.
double e_q(double q);

double g_lambda(double q, double lambda);

// Unique root of g(lambda) = y in (1, q/(q-1)], by bisection.
// Throws NoRootError for y > E_q and DomainError for y <= 0 or q <= 1.
double solve_lambda(double q, double y);

struct TraceEntry {
    std::int64_t k = 0;
    double M = 0.0;
    double lambda = 1.0;
    double x = 0.0;  // M_k^{q-1} delta_1
};

struct SequenceTrace {
    double q = 0.0;
    double M0 = 0.0;
    double delta1 = 0.0;
    double t_star = 0.0;
    std::int64_t L = 0;
    double M_last = 0.0;
    double x_last = 0.0;
    double x_before_last = 0.0;  // x_{L-1}; meaningful when L >= 1
    bool recorded = true;        // entries hold every step k = 0..L
    std::vector<TraceEntry> entries;

    double product() const { return static_cast<double>(L) * t_star; }
};

class CapExceeded : public Error {
public:
    CapExceeded(const std::string& what, SequenceTrace partial)
        : Error(what), partial_(std::move(partial)) {}
    const SequenceTrace& partial() const noexcept { return partial_; }

private:
    SequenceTrace partial_;
};

inline constexpr std::int64_t kDefaultCap = 10'000'000;

// Runs M_k = lambda_k M_{k-1} with lambda_k = solve_lambda(q, M_{k-1}^{q-1} delta1)
// while M_{k-1}^{q-1} delta1 <= E_q. Throws CapExceeded after `cap` steps.
SequenceTrace build_sequence(double q, double M0, double delta1, std::int64_t cap = kDefaultCap,
                             bool record = true);

// max(0, (1/(10(q-1))) (1/(M0^{q-1} delta1) - 9q)).
double step_count_lower_bound(double q, double M0, double delta1);

// Trivial upper bound L <= 1/((q-1) M0^{q-1} delta1) from
// L delta1 <= int_{M0}^{inf} M^{-q} dM.
double step_count_upper_bound(double q, double M0, double delta1);

struct AffineMax {
    double t_opt = 0.0;
    double f_max = 0.0;
};

// Maximiser of f(t) = A t^beta - t on (0, 1].
AffineMax maximize_affine_power(double A, double beta);

struct BoundsInput {
    double q = 2.0;
    double M0 = 1.0;
    double gamma1_area = 0.0;
    double alpha = 0.0;
    int dim = 2;
    double b1 = 0.0;
    double B1 = 0.0;

    void validate() const;
};

struct DerivedConstants {
    double b1 = 0.0;
    double B1 = 0.0;
    double C = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double N_alpha = 0.0;
    double E_q = 0.0;
};

DerivedConstants derive_constants(const BoundsInput& in);

// C |Gamma_1|^alpha t*^{N_alpha} / (b1 N_alpha), t* in (0, 1].
double delta1(double t_star, const BoundsInput& in);

// 1/(q M0^{q-1} |Gamma_1|^alpha): the argument of the min-clause.
double min_clause_argument(const BoundsInput& in);

double lower_bound_closed(const BoundsInput& in);

// The alpha = 0 specialisation written out directly:
// C3 / ((q-1) M0^{q-1}) min{1, 1/(q M0^{q-1})}, C3 = (9 C1 / 40) min{1, C1/4}.
double lower_bound_closed_alpha0(const BoundsInput& in);

// t* maximising the step-bound objective A t^beta - t with beta = 1 - N_alpha.
double analytic_t_opt(const BoundsInput& in);

std::vector<double> default_t_grid();

struct ConstructiveResult {
    double value = 0.0;
    double t_star = 0.0;
    std::int64_t L = 0;
    bool from_step_bound = false;  // L taken from the closed step bound (cap hit)
    int evaluated = 0;             // grid points for which L was computed
    SequenceTrace trace;
};

// max over the grid of L(t*) t*. An empty grid means default_t_grid(); the
// analytic t_opt is always added.
ConstructiveResult lower_bound_constructive(const BoundsInput& in, std::vector<double> t_grid = {},
                                            std::int64_t cap = kDefaultCap);

// (1/((q-1)|Gamma_1|)) int_Omega u0^{1-q} dx.
double upper_bound(double q, double gamma1_area, double u0_integral);

struct LogBound {
    bool applicable = false;
    double value = 0.0;
    double bracket = 0.0;
    double C_free = 1.0;
    std::string label = "shape-only";
};

LogBound lower_bound_log(double q, double M0, double gamma1_area, int dim, double C_free = 1.0);

struct BoundsReport {
    BoundsInput input;
    std::optional<double> upper;
    std::optional<double> u0_integral;
    LogBound lower_log;
    double lower_new_closed = 0.0;
    double lower_new_constructive = 0.0;
    double constructive_t_star = 0.0;
    std::int64_t constructive_L = 0;
    bool constructive_from_step_bound = false;
    DerivedConstants constants_used;
};

BoundsReport compute_bounds(const BoundsInput& in, std::optional<double> u0_integral = std::nullopt,
                            double C_free = 1.0, std::int64_t cap = kDefaultCap);

}  // namespace blowtime::bounds
