#include "blowtime/numeric.hpp"

#include "blowtime/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <queue>
#include <string>
#include <thread>

namespace blowtime {

namespace {

double pairwise_sum_range(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(v, half) + pairwise_sum_range(v + half, n - half);
}

GaussRule compute_gauss_legendre(int n) {
    if (n == 1) return {{0.0}, {2.0}};
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

// Kronrod 15-point abscissae and weights; every other node carries the
// embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_range(values.data(), values.size());
}

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw InvalidInput("Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order,
                    int panels) {
    const GaussRule& rule = gauss_legendre(order);
    const double width = (b - a) / panels;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(order) * panels);
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double half = 0.5 * width;
        const double mid = lo + half;
        for (int i = 0; i < order; ++i) terms.push_back(half * rule.weights[i] * f(mid + half * rule.nodes[i]));
    }
    return pairwise_sum(terms);
}

IntegralResult integrate_adaptive(const std::function<double(double)>& f,
                                  std::span<const double> breaks,
                                  const AdaptiveOptions& options) {
    if (breaks.size() < 2) throw InvalidInput("adaptive quadrature needs at least one interval");
    std::priority_queue<Segment> queue;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i]) queue.push(gk15(f, breaks[i], breaks[i + 1]));
    }
    int subdivisions = 0;
    double total_err = 0.0;
    double total_val = 0.0;
    {
        auto copy = queue;
        for (; !copy.empty(); copy.pop()) {
            total_err += copy.top().error;
            total_val += copy.top().value;
        }
    }
    while (!queue.empty() &&
           total_err > std::max(options.abs_tol, options.rel_tol * std::abs(total_val))) {
        if (subdivisions >= options.max_subdivisions) {
            throw QuadratureFailure("adaptive quadrature: subdivision limit " +
                                        std::to_string(options.max_subdivisions) +
                                        " reached before tolerance",
                                    total_err);
        }
        const Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in double precision.
            queue.push({worst.a, worst.b, worst.value, 0.0});
            total_err -= worst.error;
            continue;
        }
        const Segment left = gk15(f, worst.a, mid);
        const Segment right = gk15(f, mid, worst.b);
        total_err += left.error + right.error - worst.error;
        total_val += left.value + right.value - worst.value;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }
    // Final sum in a canonical order so the result does not depend on the
    // history of running updates.
    std::vector<double> values;
    double err = 0.0;
    for (; !queue.empty(); queue.pop()) {
        values.push_back(queue.top().value);
        err += queue.top().error;
    }
    std::sort(values.begin(), values.end());
    return {pairwise_sum(values), err, subdivisions};
}

std::pair<double, double> golden_maximize(const std::function<double(double)>& f, double a,
                                          double b, int iterations) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < iterations; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InvalidInput("log_spaced: need 0 < lo < hi, count >= 2");
    std::vector<double> out(count);
    const double llo = std::log(lo);
    const double step = (std::log(hi) - llo) / (count - 1);
    for (int i = 0; i < count; ++i) out[i] = std::exp(llo + step * i);
    out.front() = lo;
    out.back() = hi;
    return out;
}

double upper_gamma(double a, double z) {
    if (z < 0.0) throw DomainError("upper_gamma: z must be nonnegative");
    const double sz = std::sqrt(z);
    if (a == 0.0) return z == 0.0 ? HUGE_VAL : -std::expint(-z);
    if (a == 0.5) return std::sqrt(kPi) * std::erfc(sz);
    if (a == 1.0) return std::exp(-z);
    if (a == 1.5) return 0.5 * std::sqrt(kPi) * std::erfc(sz) + sz * std::exp(-z);
    throw DomainError("upper_gamma: unsupported order");
}

double lower_gamma_regularized(double a, double z) {
    if (z < 0.0) throw DomainError("lower_gamma_regularized: z must be nonnegative");
    const double sz = std::sqrt(z);
    if (a == 0.5) return std::erf(sz);
    if (a == 1.0) return -std::expm1(-z);
    if (a == 1.5) return std::erf(sz) - 2.0 * sz / std::sqrt(kPi) * std::exp(-z);
    throw DomainError("lower_gamma_regularized: unsupported order");
}

unsigned thread_count() {
    if (const char* env = std::getenv("BLOWTIME_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace blowtime
