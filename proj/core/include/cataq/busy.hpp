#ifndef CATAQ_BUSY_HPP
#define CATAQ_BUSY_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "cataq/model.hpp"

// Laplace-domain analysis of the busy period and busy cycle under constant
// arrival and catastrophe rates: the idle-probability transform, busy-period
// and busy-cycle LSTs, deterministic-service closed forms, moments by
// Richardson-extrapolated transform differentiation, and numeric inversion
// of LSTs to distribution functions.

namespace cataq {

struct LSTValue {
    double s = 0.0;
    double value = 0.0;
    double error_estimate = 0.0;
    bool flagged = false;  // left [0,1] by more than the error estimate
};

struct DfPoint {
    double t = 0.0;
    double value = 0.0;
    double error_estimate = 0.0;
    bool flagged = false;  // monotonicity violation beyond the error estimate
};

struct BusyMoments {
    double mean = 0.0;
    double second_moment = 0.0;
    // Closed form for deterministic service, NaN otherwise.
    double mean_closed_form = 0.0;
    bool flagged = false;  // Richardson extrapolation disagreement > 1e-4 rel.
};

struct MDClosedForms {
    double p0_tilde_derived = 0.0;   // (s+v+lam e^{-Wb}) / (sW), W = lam+s+v
    double p0_tilde_printed = 0.0;   // the printed transform, kept as documentation
    double busy_lst = 0.0;           // (lam+s+v e^{Wb}) / (lam+(s+v)e^{Wb})
    double limit_derived = 0.0;      // s->0 of s * p0_tilde_derived
    double limit_printed_form = 0.0; // s->0 of s * p0_tilde_printed
    double limit_reference = 0.0;        // the documented limit (v+lam e^{-(lam+v)b})/(v+lam)
};

// Transform of the idle probability: (1 + v/s) p~0(v+s), where p~0 is the
// Laplace transform of the no-catastrophe idle probability.
LSTValue lt_idle(const ModelSpec& spec, double s, double tol = 1e-11);

// Busy-period LST from the conservative-system relation.
LSTValue lst_busy_period(const ModelSpec& spec, double s, double tol = 1e-11);

// Busy-cycle LST: lam/(lam+s) times the busy-period LST.
LSTValue lst_busy_cycle(const ModelSpec& spec, double s, double tol = 1e-11);

// Single-class batch model; the arrival rate is the batch rate.
LSTValue lst_busy_batch(const ModelSpec& spec, double s, double tol = 1e-11);

// Multi-class model; the prefactor uses the total class arrival rate.
LSTValue lst_busy_multiclass(const ModelSpec& spec, double s, double tol = 1e-11);

// Analytic continuation used by the inversion contour; requires
// Re(s) > -v.
std::complex<double> lst_busy_period_complex(const ModelSpec& spec,
                                             std::complex<double> s,
                                             double tol = 1e-11);
std::complex<double> lst_busy_cycle_complex(const ModelSpec& spec,
                                            std::complex<double> s,
                                            double tol = 1e-11);

// Deterministic-service closed forms, both the derived transform and the
// printed one, with their s->0 limits.
MDClosedForms md_closed_forms(const ModelSpec& spec, double s);

BusyMoments busy_moments(const ModelSpec& spec, double tol = 1e-12);

// Inverts an LST evaluator to the distribution function F(t) on t_grid by
// Euler-accelerated Fourier-series summation along a damped contour. Values
// are made nondecreasing only when the violation is within the combined
// error estimate; larger violations are flagged.
std::vector<DfPoint> invert_lst(
    const std::function<std::complex<double>(std::complex<double>)>& lst,
    std::span<const double> t_grid);

struct BusyPeriodReport {
    std::vector<LSTValue> busy_lst;
    std::vector<LSTValue> cycle_lst;
    BusyMoments moments;
    std::vector<DfPoint> busy_df;
    std::vector<DfPoint> cycle_df;
};

BusyPeriodReport busy_report(const ModelSpec& spec,
                             std::span<const double> s_values,
                             std::span<const double> t_grid);

}  // namespace cataq

#endif
