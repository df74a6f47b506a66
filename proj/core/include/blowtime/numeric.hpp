#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace blowtime {

inline constexpr double kPi = 3.14159265358979323846;

// Points and directions in R^N; 2-D quantities keep z = 0.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return s * a; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(Vec3 a) { return dot(a, a); }
inline double norm(Vec3 a) { return std::sqrt(norm2(a)); }

// Pairwise (cascade) summation. The summation tree depends only on the
// length of the input, so results are reproducible bit-for-bit.
double pairwise_sum(std::span<const double> values);

// n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Integral of f over [a, b] with a composite Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order, int panels = 1);

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

struct AdaptiveOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
};

// Globally adaptive Gauss-Kronrod (7/15) integration of f over the
// partition given by `breaks` (sorted, at least two entries). Throws
// QuadratureFailure carrying the achieved error estimate when the
// subdivision limit is reached first.
IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  std::span<const double> breaks,
                                  const AdaptiveOptions& options);

inline IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                         double b, const AdaptiveOptions& options) {
    const std::array<double, 2> breaks{a, b};
    return integrate_adaptive(f, breaks, options);
}

// Golden-section search for the maximiser of a unimodal f on [a, b].
std::pair<double, double> golden_maximize(const std::function<double(double)>& f, double a,
                                          double b, int iterations = 60);

std::vector<double> log_spaced(double lo, double hi, int count);

// Incomplete gamma helpers for a in {0, 1/2, 1, 3/2}: the cases that arise for
// heat kernels in two and three space dimensions.
double upper_gamma(double a, double z);        // Gamma(a, z)
double lower_gamma_regularized(double a, double z);  // P(a, z)

// Worker count from BLOWTIME_THREADS, defaulting to the hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = thread_count());

}  // namespace blowtime
