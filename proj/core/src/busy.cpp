#include "cataq/busy.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "cataq/quadrature.hpp"

namespace cataq {

namespace {

void require_homogeneous(const ModelSpec& spec) {
    if (!spec.constant_rates())
        throw std::invalid_argument(
            "busy-period analysis requires constant arrival and catastrophe "
            "rates");
}

// Hazard of the idle state in the catastrophe-free system: the rate at which
// an arrival event brings at least one customer still in service at elapsed
// time x.
struct IdleHazard {
    explicit IdleHazard(const ModelSpec& spec) : spec_(&spec) {
        for (const auto& c : spec.classes())
            for (double bp : c.service.breakpoints()) breakpoints_.push_back(bp);
        // Unit batches admit a closed-form cumulative; batch laws need a table.
        closed_form_ = !spec.has_batches() && !spec.shared_mode();
    }

    double operator()(double x) const {
        const ModelSpec& m = *spec_;
        if (m.shared_mode()) {
            std::vector<double> arg(static_cast<std::size_t>(m.num_classes()));
            for (int i = 0; i < m.num_classes(); ++i)
                arg[static_cast<std::size_t>(i)] = m.service(i).cdf(x);
            return m.shared().arrival_rate.constant_value() *
                   (1.0 - m.shared().law.pgf<double>(arg));
        }
        double h = 0.0;
        for (const auto& c : m.classes()) {
            const double bx = c.service.cdf(x);
            h += c.arrival_rate.constant_value() * (1.0 - c.batch.pgf1(bx));
        }
        return h;
    }

    // Cumulative hazard H(t); builds a table lazily when no closed form
    // exists, sized to cover [0, horizon].
    void prepare(double horizon) {
        if (closed_form_ || (table_ && table_->horizon() >= horizon)) return;
        table_ = std::make_unique<CumulativeTable>(
            [this](double x) { return (*this)(x); }, horizon,
            std::max(horizon / 512.0, 1e-3), breakpoints_);
    }

    double cumulative(double t) const {
        if (closed_form_) {
            double h = 0.0;
            for (const auto& c : spec_->classes())
                h += c.arrival_rate.constant_value() *
                     c.service.integrated_survival(t);
            return h;
        }
        return table_->value_at(std::min(t, table_->horizon()));
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }

  private:
    const ModelSpec* spec_;
    std::vector<double> breakpoints_;
    bool closed_form_ = false;
    std::unique_ptr<CumulativeTable> table_;
};

// Laplace transform p~0(w) of the catastrophe-free idle probability
// p0(t) = exp(-H(t)).
ComplexQuadratureResult p0_transform(IdleHazard& hazard,
                                     std::complex<double> w, double tol) {
    if (w.real() <= 0.0)
        throw std::invalid_argument("idle transform: requires Re(s) + v > 0");
    // Same truncation rule as laplace_integral; the hazard table must reach
    // the truncation point.
    const double horizon =
        std::log(2.0 / (tol * w.real())) / w.real() * 1.05 + 1.0;
    hazard.prepare(horizon);
    return laplace_integral_complex(
        [&hazard](double t) { return std::exp(-hazard.cumulative(t)); }, w, tol,
        1.0, hazard.breakpoints());
}

struct PiHat {
    std::complex<double> value;
    double error = 0.0;
};

// Busy-period LST via the conservative-system relation, written in the
// numerically stable form 1 + (s/lam)(1 - 1/[(s+v)p~0(s+v)]) so that s = 0
// gives exactly 1.
PiHat pi_hat(const ModelSpec& spec, IdleHazard& hazard, std::complex<double> s,
             double tol) {
    const double v = spec.catastrophe_rate().constant_value();
    const double lam = spec.total_arrival_rate();
    if (lam <= 0.0)
        throw std::invalid_argument("busy period: requires a positive arrival rate");
    if (s == std::complex<double>{}) return {1.0, 0.0};
    auto p = p0_transform(hazard, s + v, tol);
    const std::complex<double> sP0 = (s + v) * p.value;
    PiHat out;
    out.value = 1.0 + s / lam * (1.0 - 1.0 / sP0);
    out.error = std::abs(s / lam) * std::abs(s + v) * p.error_estimate /
                std::norm(sP0);
    return out;
}

LSTValue pack_real(double s, const PiHat& p) {
    LSTValue out;
    out.s = s;
    out.value = p.value.real();
    out.error_estimate = p.error + std::abs(p.value.imag());
    out.flagged = out.value < -out.error_estimate ||
                  out.value > 1.0 + out.error_estimate;
    return out;
}

void require_positive_s(double s) {
    if (s <= 0.0)
        throw std::invalid_argument("transform abscissa must be positive");
}

}  // namespace

LSTValue lt_idle(const ModelSpec& spec, double s, double tol) {
    require_homogeneous(spec);
    require_positive_s(s);
    const double v = spec.catastrophe_rate().constant_value();
    IdleHazard hazard(spec);
    auto p = p0_transform(hazard, {s + v, 0.0}, tol);
    LSTValue out;
    out.s = s;
    out.value = (1.0 + v / s) * p.value.real();
    out.error_estimate = (1.0 + v / s) * p.error_estimate;
    // A transform of a probability lies in (0, 1/s].
    out.flagged = out.value < -out.error_estimate ||
                  out.value > 1.0 / s + out.error_estimate;
    return out;
}

LSTValue lst_busy_period(const ModelSpec& spec, double s, double tol) {
    require_homogeneous(spec);
    require_positive_s(s);
    IdleHazard hazard(spec);
    return pack_real(s, pi_hat(spec, hazard, {s, 0.0}, tol));
}

LSTValue lst_busy_cycle(const ModelSpec& spec, double s, double tol) {
    require_homogeneous(spec);
    require_positive_s(s);
    const double lam = spec.total_arrival_rate();
    IdleHazard hazard(spec);
    PiHat p = pi_hat(spec, hazard, {s, 0.0}, tol);
    p.value *= lam / (lam + s);
    p.error *= lam / (lam + s);
    return pack_real(s, p);
}

LSTValue lst_busy_batch(const ModelSpec& spec, double s, double tol) {
    if (spec.shared_mode() || spec.num_classes() != 1)
        throw std::invalid_argument(
            "batch busy period: requires a single class with its own batch law");
    return lst_busy_period(spec, s, tol);
}

LSTValue lst_busy_multiclass(const ModelSpec& spec, double s, double tol) {
    if (spec.shared_mode())
        throw std::invalid_argument(
            "multi-class busy period: requires per-class arrival streams");
    for (const auto& c : spec.classes())
        if (!c.batch.is_single())
            throw std::invalid_argument(
                "multi-class busy period: requires unit batches");
    return lst_busy_period(spec, s, tol);
}

std::complex<double> lst_busy_period_complex(const ModelSpec& spec,
                                             std::complex<double> s,
                                             double tol) {
    require_homogeneous(spec);
    IdleHazard hazard(spec);
    return pi_hat(spec, hazard, s, tol).value;
}

std::complex<double> lst_busy_cycle_complex(const ModelSpec& spec,
                                            std::complex<double> s,
                                            double tol) {
    require_homogeneous(spec);
    const double lam = spec.total_arrival_rate();
    IdleHazard hazard(spec);
    return lam / (lam + s) * pi_hat(spec, hazard, s, tol).value;
}

MDClosedForms md_closed_forms(const ModelSpec& spec, double s) {
    require_homogeneous(spec);
    require_positive_s(s);
    if (!spec.is_plain_single_class())
        throw std::invalid_argument(
            "deterministic closed forms: requires one class with unit batches");
    const auto* det = std::get_if<ServiceDistribution::Deterministic>(
        &spec.service(0).variant());
    if (det == nullptr)
        throw std::invalid_argument(
            "deterministic closed forms: requires deterministic service");
    const double b = det->b;
    const double lam = spec.cls(0).arrival_rate.constant_value();
    const double v = spec.catastrophe_rate().constant_value();
    const double W = lam + s + v;
    const double ewb = std::exp(-W * b);       // e^{-Wb}
    const double e0 = std::exp(-(lam + v) * b);  // e^{-(lam+v)b}
    MDClosedForms out;
    out.p0_tilde_derived = (s + v + lam * ewb) / (s * W);
    out.p0_tilde_printed = (v * ewb + lam + s) / (s * W);
    out.busy_lst = (lam + s + v / ewb) / (lam + (s + v) / ewb);
    out.limit_derived = (v + lam * e0) / (lam + v);
    out.limit_printed_form = (lam + v * e0) / (lam + v);
    out.limit_reference = (v + lam * e0) / (v + lam);
    return out;
}

BusyMoments busy_moments(const ModelSpec& spec, double tol) {
    require_homogeneous(spec);
    const double v = spec.catastrophe_rate().constant_value();
    IdleHazard hazard(spec);
    auto phat = [&](double s) {
        return pi_hat(spec, hazard, {s, 0.0}, tol).value.real();
    };

    // Richardson-extrapolated finite differences of the LST at 0. Central
    // stencils need p~0 at s+v > 0, so they require v > 0; the v = 0 case
    // falls back to one-sided O(h^2) stencils.
    const double h0 = 1e-2;
    double d1[3], d2[3];
    for (int k = 0; k < 3; ++k) {
        const double h = h0 / double(1 << k);
        if (v > 4.0 * h0) {
            const double fp = phat(h), fm = phat(-h);
            d1[k] = (fp - fm) / (2.0 * h);
            d2[k] = (fp - 2.0 + fm) / (h * h);
        } else {
            const double f1 = phat(h), f2 = phat(2.0 * h), f3 = phat(3.0 * h);
            d1[k] = (-3.0 + 4.0 * f1 - f2) / (2.0 * h);
            d2[k] = (2.0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
        }
    }
    auto richardson = [](const double d[3], double& final_value,
                         double& spread) {
        const double r1 = (4.0 * d[1] - d[0]) / 3.0;
        const double r2 = (4.0 * d[2] - d[1]) / 3.0;
        final_value = (16.0 * r2 - r1) / 15.0;
        spread = std::abs(r2 - r1);
    };
    BusyMoments out;
    double m1, m2, s1, s2;
    richardson(d1, m1, s1);
    richardson(d2, m2, s2);
    out.mean = -m1;
    out.second_moment = m2;
    out.flagged = s1 > 1e-4 * std::max(std::abs(m1), 1.0) ||
                  s2 > 1e-4 * std::max(std::abs(m2), 1.0);

    out.mean_closed_form = std::numeric_limits<double>::quiet_NaN();
    if (spec.is_plain_single_class()) {
        if (const auto* det = std::get_if<ServiceDistribution::Deterministic>(
                &spec.service(0).variant())) {
            const double lam = spec.cls(0).arrival_rate.constant_value();
            const double e = std::exp((lam + v) * det->b);
            out.mean_closed_form = (e - 1.0) / (lam + v * e);
        }
    }
    return out;
}

std::vector<DfPoint> invert_lst(
    const std::function<std::complex<double>(std::complex<double>)>& lst,
    std::span<const double> t_grid) {
    // Euler-accelerated damped-contour Fourier summation of F(t) with
    // transform lst(s)/s. The damping constant trades the discretization
    // error e^{-A} against roundoff growth e^{A/2}.
    constexpr double A = 18.5;
    constexpr int N = 24;  // plain terms before averaging
    constexpr int M = 12;  // binomial-averaged terms
    std::vector<DfPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        DfPoint p;
        p.t = t;
        if (t <= 0.0) {
            out.push_back(p);
            continue;
        }
        auto fhat = [&](std::complex<double> s) { return lst(s) / s; };
        const double base = A / (2.0 * t);
        double partial = 0.5 * fhat({base, 0.0}).real();
        std::vector<double> partials;  // s_N .. s_{N+M}
        double sign = -1.0;
        for (int j = 1; j <= N + M; ++j, sign = -sign) {
            const double wj = j * std::numbers::pi / t;
            partial += sign * fhat({base, wj}).real();
            if (j >= N) partials.push_back(partial);
        }
        double euler = 0.0;
        double binom = 1.0;  // C(M, i) built incrementally
        double binom_sum = 0.0;
        for (int i = 0; i <= M; ++i) {
            euler += binom * partials[static_cast<std::size_t>(i)];
            binom_sum += binom;
            binom = binom * double(M - i) / double(i + 1);
        }
        euler /= binom_sum;
        const double scale = std::exp(A / 2.0) / t;
        p.value = scale * euler;
        // Accuracy: contour discretization + Euler tail + amplified roundoff.
        double tail = 0.0;
        for (std::size_t i = 1; i < partials.size(); ++i)
            tail = std::max(tail, std::abs(partials[i] - partials[i - 1]));
        p.error_estimate = std::exp(-A) + scale * tail * std::pow(2.0, -M) +
                           scale * double(N + M) *
                               std::numeric_limits<double>::epsilon();
        out.push_back(p);
    }
    // Isotone repair within the error budget only.
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].value >= out[i - 1].value) continue;
        const double gap = out[i - 1].value - out[i].value;
        if (gap <= out[i].error_estimate + out[i - 1].error_estimate)
            out[i].value = out[i - 1].value;
        else
            out[i].flagged = true;
    }
    return out;
}

BusyPeriodReport busy_report(const ModelSpec& spec,
                             std::span<const double> s_values,
                             std::span<const double> t_grid) {
    require_homogeneous(spec);
    BusyPeriodReport report;
    for (double s : s_values) {
        report.busy_lst.push_back(lst_busy_period(spec, s));
        report.cycle_lst.push_back(lst_busy_cycle(spec, s));
    }
    report.moments = busy_moments(spec);
    if (!t_grid.empty()) {
        report.busy_df = invert_lst(
            [&](std::complex<double> s) {
                return lst_busy_period_complex(spec, s);
            },
            t_grid);
        report.cycle_df = invert_lst(
            [&](std::complex<double> s) {
                return lst_busy_cycle_complex(spec, s);
            },
            t_grid);
    }
    return report;
}

}  // namespace cataq
