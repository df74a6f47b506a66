#pragma once

#include "blowtime/geometry.hpp"
#include "blowtime/numeric.hpp"

#include <vector>

namespace blowtime::kernel {

using geometry::ConvexDomain;
using geometry::QuadratureSpec;

// Fundamental solution (4 pi t)^{-N/2} exp(-|x|^2 / 4t).
double phi(Vec3 x, double t, int dim);

// D_y[Phi(x - y, s)] . n(y) = Phi(x - y, s) ((x - y) . n(y)) / (2 s).
double phi_normal_derivative(Vec3 x_minus_y, Vec3 normal_y, double s, int dim);

// int_0^t D_y[Phi(x - y, s)] . n(y) ds in closed form:
//   ((x - y) . n) Gamma(N/2, d^2 / 4t) / (2 pi^{N/2} d^N),  d = |x - y|.
double double_layer_time_integral(Vec3 x_minus_y, Vec3 normal_y, double t, int dim);

// F(x, t) = int_Omega Phi(x - y, t) dy for the boundary point x(s), 0 < t <= 1.
IntegralResult domain_mass(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec);

// Same integral without the t <= 1 restriction (t > 0).
IntegralResult domain_mass_any_time(const ConvexDomain& domain, double s, double t,
                                    const QuadratureSpec& spec);

// int_{dOmega} exp(-|x - y|^2 / 4 tau) dS(y) for x = x(s).
IntegralResult boundary_gaussian(const ConvexDomain& domain, double s, double tau,
                                 const QuadratureSpec& spec);

struct GaussianGrid {
    int x_samples = 32;
    int tau_count = 200;
    double tau_min = 1e-6;
    double tau_max = 1e3;
};

struct MassGrid {
    int x_samples = 32;
    int t_count = 32;
    double t_min = 1e-4;
};

struct MassEstimate {
    double value = 0.0;      // certified under-estimate
    double error = 0.0;      // quadrature error + refinement gap
    double grid_min = 0.0;   // raw minimum over the product grid
    double argmin_s = 0.0;
    double argmin_t = 0.0;
    double t0_value = 0.5;   // pinned t = 0 endpoint
    MassGrid grid;
};

struct GaussianEstimate {
    double value = 0.0;      // certified over-estimate
    double error = 0.0;
    double grid_sup = 0.0;   // raw supremum over the product grid
    double tail_limit = 0.0; // analytic small-tau limit entering the floor
    double argmax_s = 0.0;
    double argmax_tau = 0.0;
    GaussianGrid grid;
};

MassEstimate estimate_b1(const ConvexDomain& domain, const QuadratureSpec& spec, const MassGrid& grid = {});
GaussianEstimate estimate_B1(const ConvexDomain& domain, const QuadratureSpec& spec, const GaussianGrid& grid = {});

struct KernelConstants {
    int dim = 2;
    double b1 = 0.0;
    double b1_err = 0.0;
    double B1 = 0.0;
    double B1_err = 0.0;
    MassEstimate b1_detail;
    GaussianEstimate B1_detail;
    QuadratureSpec spec;
};

KernelConstants estimate_constants(const ConvexDomain& domain, const QuadratureSpec& spec,
                                   const MassGrid& b1_grid = {}, const GaussianGrid& B1_grid = {});

// C = (B1 + 1) / (4 pi)^{N/2}.
double holder_constant(double B1, int dim);
// N_alpha = (1 - (N - 1) alpha) / 2; alpha must lie in [0, 1/(N-1)).
double n_alpha(int dim, double alpha);
// C |Gamma_1|^alpha t^{N_alpha} / N_alpha.
double holder_bound(double t, double gamma1_area, double alpha, double B1, int dim);

struct IdentityTerms {
    double volume = 0.0;        // int_Omega Phi(x - y, t) dy
    double layer = 0.0;         // int_0^t int_dOmega |D_y Phi . n| dS ds
    double signed_layer = 0.0;  // same with the sign kept
    double residual = 0.0;      // |volume + layer - 1/2|
    double signed_residual = 0.0;  // |volume - signed_layer - 1/2|
    int boundary_nodes = 0;
};

// Evaluates both sides of the convex identity at x = x(s). Throws Error if
// D_y Phi . n > 0 is observed at any boundary node (non-convex input).
IdentityTerms convex_identity(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec);

double convex_identity_residual(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec);

}  // namespace blowtime::kernel
