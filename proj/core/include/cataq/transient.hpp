#ifndef CATAQ_TRANSIENT_HPP
#define CATAQ_TRANSIENT_HPP

#include <map>
#include <span>
#include <vector>

#include "cataq/model.hpp"

// Time-domain analytic objects: joint PGFs, state probabilities, moments and
// served-count transforms for every model variant. All evaluations go through
// one catastrophe-renewal representation: conditioning on the epoch of the
// last catastrophe, arrivals after it contribute the no-catastrophe kernel
// with both marks, arrivals before it contribute their served mass only.
// With in-system marks alone this is exactly the renewal-by-last-catastrophe
// convolution; retaining the served mass keeps the served-count marginal free
// of the catastrophe process and preserves the single-class factorization.

namespace cataq {

struct TransientQuery {
    ModelSpec spec;
    std::vector<double> times;            // ascending, >= 0
    std::optional<MarkVector> marks;
    int state_cutoff = 0;
    double tol = 1e-9;
};

struct TransientResult {
    struct Point {
        double t = 0.0;
        double pgf = 1.0;           // at the query marks, 1 when absent
        double pgf_error = 0.0;
        std::map<std::vector<int>, double> pmf;  // joint over class counts
        double truncation_bound = 0.0;
        double m1 = 0.0, m2 = 0.0;  // factorial moments (plain single class)
    };
    std::vector<Point> points;
};

struct PmfResult {
    std::map<std::vector<int>, double> pmf;
    double truncation_bound = 0.0;
    bool flagged = false;  // aliasing bound exceeded the requested tolerance
};

// No-catastrophe joint PGF of a model started empty at `start` and observed
// at `t`.
double kernel_phi(const ModelSpec& spec, double start, double t,
                  const MarkVector& marks, double tol = 1e-9);

// Joint PGF of (in-system, served) counts under catastrophes.
double pgf_joint(const ModelSpec& spec, double t, const MarkVector& marks,
                 double tol = 1e-9);

// P(N(t) = n) for a single-class model with unit batches and constant
// arrival rate.
double state_prob(const ModelSpec& spec, int n, double t, double tol = 1e-9);

// Joint pmf of the per-class in-system counts (and served counts when
// marks_fixed_served is false), extracted from the PGF at roots of unity.
// Keys are (n_1..n_k) or (n_1..n_k, m_1..m_k).
PmfResult state_pmf(const ModelSpec& spec, double t, int cutoff,
                    bool marks_fixed_served = true, double tol = 1e-9);

// Factorial moment of the in-system count, by integrating the triangular
// moment ODE system with the time-reversed survival kernel. Orders above 8
// are rejected.
double moment(const ModelSpec& spec, int order, double t, double tol = 1e-10);

// PGF of served-by-t counts; never reads the catastrophe process.
double served_pgf(const ModelSpec& spec, double t, std::span<const double> y,
                  double tol = 1e-9);

double idle_prob(const ModelSpec& spec, double t, double tol = 1e-9);

// |P(y,z,t) - P(1,z,t) P(y,1,t)| for a single-class model.
double factorization_check(const ModelSpec& spec, double t,
                           const MarkVector& marks, double tol = 1e-9);

TransientResult evaluate(const TransientQuery& query);

// Verbatim evaluations of the printed transient expressions, for diagnostic
// comparison against the renewal-convolution path.
namespace printed_forms {

double pgf(const ModelSpec& spec, double z, double t, double tol = 1e-9);
double state_prob(const ModelSpec& spec, int n, double t, double tol = 1e-9);
// Printed deterministic-service moment branches (0 for t > b).
double md_m1(double lambda, double nu, double b, double t);
double md_m2(double lambda, double nu, double b, double t);

}  // namespace printed_forms

}  // namespace cataq

#endif
