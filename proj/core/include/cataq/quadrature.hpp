#ifndef CATAQ_QUADRATURE_HPP
#define CATAQ_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

// Adaptive Gauss-Kronrod quadrature on finite intervals, semi-infinite
// Laplace-type integrals with explicit tail bounds, and cumulative-integral
// tables. Integrands with kinks must declare their breakpoints; the adaptive
// scheme seeds a segment at every declared breakpoint.

namespace cataq {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = true;
};

struct ComplexQuadratureResult {
    std::complex<double> value{0.0, 0.0};
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = true;
};

namespace detail {

// QUADPACK dqk15 nodes and weights (7-point Gauss, 15-point Kronrod).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kGk15Kronrod[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGk15Gauss[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename Value, typename F>
void gk15(const F& f, double a, double b, Value& integral, double& error,
          long& evaluations) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Value kron = kGk15Kronrod[7] * f(mid);
    Value gauss = kGk15Gauss[3] * f(mid);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kGk15Nodes[i];
        const Value lo = f(mid - dx);
        const Value hi = f(mid + dx);
        kron += kGk15Kronrod[i] * (lo + hi);
        if (i % 2 == 1) gauss += kGk15Gauss[i / 2] * (lo + hi);
    }
    integral = kron * half;
    error = std::abs((kron - gauss) * half);
    evaluations += 15;
}

struct Segment {
    double a, b, error;
};

template <typename Value, typename F>
struct AdaptiveOutcome {
    Value value{};
    double error = 0.0;
    long evaluations = 0;
    bool converged = true;
};

template <typename Value, typename F>
AdaptiveOutcome<Value, F> adaptive(const F& f, double a, double b, double tol,
                                   std::span<const double> breakpoints,
                                   long max_evaluations = 2'000'000) {
    AdaptiveOutcome<Value, F> out;
    if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
    if (a == b) return out;

    // Seed segments split at every declared breakpoint inside (a, b).
    std::vector<double> edges{a};
    for (double bp : breakpoints)
        if (bp > a && bp < b) edges.push_back(bp);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<Segment> segments;
    std::vector<Value> values;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Value v;
        double e = 0.0;
        gk15<Value>(f, edges[i], edges[i + 1], v, e, out.evaluations);
        segments.push_back({edges[i], edges[i + 1], e});
        values.push_back(v);
    }

    auto total_error = [&] {
        double s = 0.0;
        for (const auto& seg : segments) s += seg.error;
        return s;
    };

    while (total_error() > tol && out.evaluations < max_evaluations) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segments.size(); ++i)
            if (segments[i].error > segments[worst].error) worst = i;
        const Segment seg = segments[worst];
        const double mid = 0.5 * (seg.a + seg.b);
        if (mid <= seg.a || mid >= seg.b) break;  // interval exhausted
        Value vl, vr;
        double el = 0.0, er = 0.0;
        gk15<Value>(f, seg.a, mid, vl, el, out.evaluations);
        gk15<Value>(f, mid, seg.b, vr, er, out.evaluations);
        segments[worst] = {seg.a, mid, el};
        values[worst] = vl;
        segments.push_back({mid, seg.b, er});
        values.push_back(vr);
    }

    Value sum{};
    for (const Value& v : values) sum += v;
    out.value = sum;
    out.error = total_error();
    out.converged = out.error <= std::max(tol, 1e-14 * (1.0 + std::abs(sum)));
    return out;
}

}  // namespace detail

// Integral of f over [a, b]. Piecewise-smooth integrands must list their
// jump/kink locations in `breakpoints`. Non-convergence within the evaluation
// budget is reported through `converged`; the best estimate is still returned.
inline QuadratureResult integrate(const std::function<double(double)>& f,
                                  double a, double b, double tol = 1e-9,
                                  std::span<const double> breakpoints = {}) {
    auto out = detail::adaptive<double>(f, a, b, tol, breakpoints);
    return {out.value, out.error, out.evaluations, out.converged};
}

inline ComplexQuadratureResult integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double tol = 1e-9, std::span<const double> breakpoints = {}) {
    auto out = detail::adaptive<std::complex<double>>(f, a, b, tol, breakpoints);
    return {out.value, out.error, out.evaluations, out.converged};
}

// Semi-infinite transform: integral of e^{-st} f(t) dt over [0, inf) for
// Re(s) > 0 and |f| <= sup_bound. The domain is truncated where the
// exponential envelope bounds the tail below tol; the tail bound is folded
// into error_estimate.
QuadratureResult laplace_integral(const std::function<double(double)>& f,
                                  double s, double tol = 1e-10,
                                  double sup_bound = 1.0,
                                  std::span<const double> breakpoints = {});

ComplexQuadratureResult laplace_integral_complex(
    const std::function<double(double)>& f, std::complex<double> s,
    double tol = 1e-10, double sup_bound = 1.0,
    std::span<const double> breakpoints = {});

// Cumulative integral of f over [0, horizon] on a grid that contains every
// declared breakpoint. Queries between grid points are answered with a local
// quadrature from the nearest lower grid point, so interpolation error stays
// at quadrature accuracy.
class CumulativeTable {
  public:
    CumulativeTable(std::function<double(double)> f, double horizon,
                    double step_hint, std::vector<double> breakpoints = {},
                    double tol = 1e-12);

    double value_at(double t) const;
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double horizon() const { return grid_.back(); }

  private:
    std::function<double(double)> f_;
    std::vector<double> grid_;
    std::vector<double> values_;
    double tol_;
};

inline CumulativeTable cumulative_table(std::function<double(double)> f,
                                        double horizon, double step_hint,
                                        std::vector<double> breakpoints = {}) {
    return CumulativeTable(std::move(f), horizon, step_hint,
                           std::move(breakpoints));
}

}  // namespace cataq

#endif
