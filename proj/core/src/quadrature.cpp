#include "cataq/quadrature.hpp"

namespace cataq {

namespace {

double truncation_horizon(double re_s, double tol, double sup_bound) {
    // sup * e^{-sT} / s <= tol/2 determines T.
    const double target = 0.5 * tol * re_s / std::max(sup_bound, 1e-300);
    double T = (target >= 1.0) ? 1.0 : -std::log(target) / re_s;
    return std::max(T, 1.0);
}

}  // namespace

QuadratureResult laplace_integral(const std::function<double(double)>& f,
                                  double s, double tol, double sup_bound,
                                  std::span<const double> breakpoints) {
    if (!(s > 0.0)) throw std::invalid_argument("laplace_integral: s must be > 0");
    const double T = truncation_horizon(s, tol, sup_bound);
    auto g = [&](double t) { return std::exp(-s * t) * f(t); };
    QuadratureResult r = integrate(g, 0.0, T, 0.5 * tol, breakpoints);
    const double tail = sup_bound * std::exp(-s * T) / s;
    r.error_estimate += tail;
    return r;
}

ComplexQuadratureResult laplace_integral_complex(
    const std::function<double(double)>& f, std::complex<double> s, double tol,
    double sup_bound, std::span<const double> breakpoints) {
    if (!(s.real() > 0.0))
        throw std::invalid_argument("laplace_integral: Re(s) must be > 0");
    const double T = truncation_horizon(s.real(), tol, sup_bound);
    auto g = [&](double t) { return std::exp(-s * t) * f(t); };
    ComplexQuadratureResult r = integrate_complex(g, 0.0, T, 0.5 * tol, breakpoints);
    const double tail = sup_bound * std::exp(-s.real() * T) / s.real();
    r.error_estimate += tail;
    return r;
}

CumulativeTable::CumulativeTable(std::function<double(double)> f,
                                 double horizon, double step_hint,
                                 std::vector<double> breakpoints, double tol)
    : f_(std::move(f)), tol_(tol) {
    if (!(horizon > 0.0))
        throw std::invalid_argument("cumulative_table: horizon must be > 0");
    if (!(step_hint > 0.0)) step_hint = horizon / 64.0;

    grid_.push_back(0.0);
    for (double t = step_hint; t < horizon; t += step_hint) grid_.push_back(t);
    for (double bp : breakpoints)
        if (bp > 0.0 && bp < horizon) grid_.push_back(bp);
    grid_.push_back(horizon);
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());

    values_.resize(grid_.size());
    values_[0] = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        QuadratureResult r = integrate(f_, grid_[i - 1], grid_[i], tol_);
        values_[i] = values_[i - 1] + r.value;
    }
}

double CumulativeTable::value_at(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= grid_.back()) t = grid_.back();
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const std::size_t idx = static_cast<std::size_t>(it - grid_.begin()) - 1;
    if (grid_[idx] == t) return values_[idx];
    QuadratureResult r = integrate(f_, grid_[idx], t, tol_);
    return values_[idx] + r.value;
}

}  // namespace cataq
