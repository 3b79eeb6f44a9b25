#include "cataq/transient.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cataq/quadrature.hpp"

namespace cataq {

namespace {

using Complex = std::complex<double>;

template <typename T>
struct Marks {
    std::vector<T> z, y;
};

template <typename T>
Marks<T> to_internal(const MarkVector& m) {
    Marks<T> out;
    out.z.assign(m.in_system.begin(), m.in_system.end());
    out.y.assign(m.served.begin(), m.served.end());
    return out;
}

template <typename T>
T integ(const std::function<T(double)>& f, double a, double b, double tol,
        std::span<const double> bps) {
    if constexpr (std::is_same_v<T, double>) {
        return integrate(f, a, b, tol, bps).value;
    } else {
        return integrate_complex(f, a, b, tol, bps).value;
    }
}

bool closed_form_kernel(const ModelSpec& spec) {
    if (spec.shared_mode() || spec.has_batches()) return false;
    for (const auto& c : spec.classes())
        if (!c.arrival_rate.is_constant()) return false;
    return true;
}

// Kernel argument for one class: z (1 - B(t-u)) + y B(t-u), with z forced to
// 1 when only the served mass is tracked (arrivals preceding the last
// catastrophe).
template <typename T>
T kernel_integrand(const ModelSpec& spec, double u, double t,
                   const Marks<T>& m, bool served_only) {
    if (spec.shared_mode()) {
        const int k = spec.num_classes();
        std::vector<T> w(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            const double B = spec.service(i).cdf(t - u);
            const T zi = served_only ? T(1.0) : m.z[static_cast<std::size_t>(i)];
            w[static_cast<std::size_t>(i)] =
                zi * (1.0 - B) + m.y[static_cast<std::size_t>(i)] * B;
        }
        const double lam = spec.shared().arrival_rate.value(u);
        return lam * (T(1.0) - spec.shared().law.pgf<T>(w));
    }
    T sum{};
    for (int i = 0; i < spec.num_classes(); ++i) {
        const auto& c = spec.cls(i);
        const double B = c.service.cdf(t - u);
        const T zi = served_only ? T(1.0) : m.z[static_cast<std::size_t>(i)];
        const T arg = zi * (1.0 - B) + m.y[static_cast<std::size_t>(i)] * B;
        sum += c.arrival_rate.value(u) * (T(1.0) - c.batch.pgf<T>(std::span<const T>(&arg, 1)));
    }
    return sum;
}

std::vector<double> kernel_breakpoints(const ModelSpec& spec, double t) {
    std::vector<double> bps;
    for (int i = 0; i < spec.num_classes(); ++i) {
        for (double s : spec.service(i).breakpoints()) bps.push_back(t - s);
        if (!spec.shared_mode())
            for (double r : spec.cls(i).arrival_rate.breakpoints())
                bps.push_back(r);
    }
    if (spec.shared_mode())
        for (double r : spec.shared().arrival_rate.breakpoints()) bps.push_back(r);
    return bps;
}

// Integral of the kernel over arrival epochs [a, b] with observation time t.
template <typename T>
T kernel_exponent(const ModelSpec& spec, double a, double b, double t,
                  const Marks<T>& m, bool served_only, double tol) {
    if (a >= b) return T{};
    if (closed_form_kernel(spec)) {
        T sum{};
        for (int i = 0; i < spec.num_classes(); ++i) {
            const auto& c = spec.cls(i);
            const double lam = c.arrival_rate.constant_value();
            const double La = c.service.integrated_survival(t - a);
            const double Lb = c.service.integrated_survival(t - b);
            const double Ca = (t - a) - La;  // integral of B over [0, t-a]
            const double Cb = (t - b) - Lb;
            T term = (T(1.0) - m.y[static_cast<std::size_t>(i)]) * (Ca - Cb);
            if (!served_only)
                term += (T(1.0) - m.z[static_cast<std::size_t>(i)]) * (La - Lb);
            sum += lam * term;
        }
        return sum;
    }
    const std::vector<double> bps = kernel_breakpoints(spec, t);
    std::function<T(double)> f = [&](double u) {
        return kernel_integrand<T>(spec, u, t, m, served_only);
    };
    return integ<T>(f, a, b, tol, bps);
}

template <typename T>
T pgf_joint_impl(const ModelSpec& spec, double t, const Marks<T>& m,
                 double tol) {
    if (t <= 0.0) return T(1.0);
    const T phi0 = std::exp(-kernel_exponent<T>(spec, 0.0, t, t, m, false, tol));
    const RateFunction& nu = spec.catastrophe_rate();
    if (nu.is_zero()) return phi0;  // exact reduction, no quadrature
    const double Vt = nu.cumulative(t);

    std::function<T(double)> integrand = [&](double x) {
        const T expo = kernel_exponent<T>(spec, 0.0, x, t, m, true, 0.1 * tol) +
                       kernel_exponent<T>(spec, x, t, t, m, false, 0.1 * tol);
        return nu.value(x) * std::exp(-(Vt - nu.cumulative(x))) * std::exp(-expo);
    };
    std::vector<double> bps = kernel_breakpoints(spec, t);
    for (double r : nu.breakpoints()) bps.push_back(r);
    const T tail = integ<T>(integrand, 0.0, t, tol, bps);
    return std::exp(-Vt) * phi0 + tail;
}

double poisson_mass(int n, double a) {
    if (a <= 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(a) - a - std::lgamma(n + 1.0));
}

void require_plain(const ModelSpec& spec, const char* who) {
    if (!spec.is_plain_single_class())
        throw std::invalid_argument(std::string(who) +
                                    ": requires a single class with unit batches");
    if (!spec.cls(0).arrival_rate.is_constant())
        throw std::invalid_argument(std::string(who) +
                                    ": requires a constant arrival rate");
}

}  // namespace

double kernel_phi(const ModelSpec& spec, double start, double t,
                  const MarkVector& marks, double tol) {
    if (!(0.0 <= start && start <= t))
        throw std::invalid_argument("kernel_phi: requires 0 <= start <= t");
    marks.validate(spec.num_classes());
    const auto m = to_internal<double>(marks);
    return std::exp(-kernel_exponent<double>(spec, start, t, t, m, false, tol));
}

double pgf_joint(const ModelSpec& spec, double t, const MarkVector& marks,
                 double tol) {
    if (t < 0.0) throw std::invalid_argument("pgf_joint: t must be >= 0");
    marks.validate(spec.num_classes());
    return pgf_joint_impl<double>(spec, t, to_internal<double>(marks), tol);
}

double state_prob(const ModelSpec& spec, int n, double t, double tol) {
    require_plain(spec, "state_prob");
    if (n < 0 || t < 0.0)
        throw std::invalid_argument("state_prob: n and t must be >= 0");
    if (t == 0.0) return n == 0 ? 1.0 : 0.0;
    const auto& c = spec.cls(0);
    const double lam = c.arrival_rate.constant_value();
    const RateFunction& nu = spec.catastrophe_rate();
    const double head = poisson_mass(n, lam * c.service.integrated_survival(t));
    if (nu.is_zero()) return head;
    const double Vt = nu.cumulative(t);
    auto integrand = [&](double u) {
        return nu.value(u) * std::exp(-(Vt - nu.cumulative(u))) *
               poisson_mass(n, lam * c.service.integrated_survival(t - u));
    };
    std::vector<double> bps = nu.breakpoints();
    for (double s : c.service.breakpoints()) bps.push_back(t - s);
    const double tail = integrate(integrand, 0.0, t, tol, bps).value;
    return head * std::exp(-Vt) + tail;
}

PmfResult state_pmf(const ModelSpec& spec, double t, int cutoff,
                    bool marks_fixed_served, double tol) {
    if (cutoff < 0) throw std::invalid_argument("state_pmf: cutoff must be >= 0");
    const int k = spec.num_classes();
    const int dims = marks_fixed_served ? k : 2 * k;
    const int M = cutoff + 1;
    double total_d = 1.0;
    for (int d = 0; d < dims; ++d) total_d *= M;
    if (total_d > 4e6)
        throw std::invalid_argument("state_pmf: cutoff too large for extraction");
    const long total = static_cast<long>(total_d);

    // PGF at every tuple of M-th roots of unity per tracked coordinate.
    std::vector<Complex> omega(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j)
        omega[static_cast<std::size_t>(j)] =
            std::polar(1.0, 2.0 * std::numbers::pi * j / M);

    std::vector<Complex> values(static_cast<std::size_t>(total));
    std::vector<int> digits(static_cast<std::size_t>(dims), 0);
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        for (int d = 0; d < dims; ++d) {
            digits[static_cast<std::size_t>(d)] = static_cast<int>(rem % M);
            rem /= M;
        }
        Marks<Complex> m;
        m.z.assign(static_cast<std::size_t>(k), Complex(1.0));
        m.y.assign(static_cast<std::size_t>(k), Complex(1.0));
        for (int i = 0; i < k; ++i)
            m.z[static_cast<std::size_t>(i)] =
                omega[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
        if (!marks_fixed_served)
            for (int i = 0; i < k; ++i)
                m.y[static_cast<std::size_t>(i)] = omega[static_cast<std::size_t>(
                    digits[static_cast<std::size_t>(k + i)])];
        values[static_cast<std::size_t>(idx)] = pgf_joint_impl<Complex>(spec, t, m, tol);
    }

    // Inverse DFT per coordinate, one axis at a time.
    std::vector<Complex> coeff = std::move(values);
    long stride = 1;
    for (int d = 0; d < dims; ++d) {
        std::vector<Complex> next(coeff.size());
        const long outer = total / (stride * M);
        for (long o = 0; o < outer; ++o)
            for (long s = 0; s < stride; ++s)
                for (int n = 0; n < M; ++n) {
                    Complex acc{};
                    for (int j = 0; j < M; ++j) {
                        const long src = o * stride * M + j * stride + s;
                        acc += coeff[static_cast<std::size_t>(src)] *
                               std::conj(omega[static_cast<std::size_t>((j * n) % M)]);
                    }
                    const long dst = o * stride * M + n * stride + s;
                    next[static_cast<std::size_t>(dst)] = acc / double(M);
                }
        coeff = std::move(next);
        stride *= M;
    }

    PmfResult out;
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        std::vector<int> key(static_cast<std::size_t>(dims));
        for (int d = 0; d < dims; ++d) {
            key[static_cast<std::size_t>(d)] = static_cast<int>(rem % M);
            rem /= M;
        }
        out.pmf[key] = coeff[static_cast<std::size_t>(idx)].real();
    }

    // Aliasing bound per tracked coordinate: Chernoff at radius r,
    // P(count >= M) <= E[r^count] / r^M.
    const double r = 2.0;
    double bound = 0.0;
    for (int d = 0; d < dims; ++d) {
        Marks<double> m;
        m.z.assign(static_cast<std::size_t>(k), 1.0);
        m.y.assign(static_cast<std::size_t>(k), 1.0);
        if (d < k)
            m.z[static_cast<std::size_t>(d)] = r;
        else
            m.y[static_cast<std::size_t>(d - k)] = r;
        bound += pgf_joint_impl<double>(spec, t, m, tol) / std::pow(r, M);
    }
    out.truncation_bound = bound;
    out.flagged = bound > std::max(tol, 1e-9);
    return out;
}

namespace {

// Dormand-Prince 5(4) over one smooth segment of the moment ODE system.
template <typename Deriv>
void rk45_segment(std::vector<double>& state, double a, double b,
                  const Deriv& deriv, double tol) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    const std::size_t n = state.size();
    double u = a;
    double h = (b - a) / 8.0;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n),
        tmp(n), y5(n), y4(n);
    auto axpy = [&](std::vector<double>& out, std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = state[i];
            for (const auto& [w, v] : terms) s += h * w * (*v)[i];
            out[i] = s;
        }
    };
    int guard = 0;
    while (u < b && ++guard < 1'000'000) {
        if (u + h > b) h = b - u;
        deriv(u, state, k1);
        axpy(tmp, {{1.0 / 5, &k1}});
        deriv(u + c2 * h, tmp, k2);
        axpy(tmp, {{3.0 / 40, &k1}, {9.0 / 40, &k2}});
        deriv(u + c3 * h, tmp, k3);
        axpy(tmp, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}});
        deriv(u + c4 * h, tmp, k4);
        axpy(tmp, {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3}, {-212.0 / 729, &k4}});
        deriv(u + c5 * h, tmp, k5);
        axpy(tmp, {{9017.0 / 3168, &k1}, {-355.0 / 33, &k2}, {46732.0 / 5247, &k3}, {49.0 / 176, &k4}, {-5103.0 / 18656, &k5}});
        deriv(u + h, tmp, k6);
        axpy(y5, {{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4}, {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}});
        deriv(u + h, y5, k7);
        axpy(y4, {{5179.0 / 57600, &k1}, {7571.0 / 16695, &k3}, {393.0 / 640, &k4}, {-92097.0 / 339200, &k5}, {187.0 / 2100, &k6}, {1.0 / 40, &k7}});
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            err = std::max(err, std::abs(y5[i] - y4[i]));
        if (err <= tol || h <= 1e-14 * (b - a)) {
            u += h;
            state = y5;
        }
        const double scale = (err > 0.0)
                                 ? std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 5.0)
                                 : 5.0;
        h *= scale;
    }
}

}  // namespace

double moment(const ModelSpec& spec, int order, double t, double tol) {
    require_plain(spec, "moment");
    if (order < 1) throw std::invalid_argument("moment: order must be >= 1");
    if (order > 8)
        throw std::invalid_argument("moment: orders above 8 are rejected");
    if (t < 0.0) throw std::invalid_argument("moment: t must be >= 0");
    if (t == 0.0) return 0.0;

    const auto& c = spec.cls(0);
    const double lam = c.arrival_rate.constant_value();
    const RateFunction& nu = spec.catastrophe_rate();

    // m_j'(u) + nu(u) m_j(u) = j lam (1 - B(t - u)) m_{j-1}(u), m_0 = 1.
    auto deriv = [&](double u, const std::vector<double>& m,
                     std::vector<double>& dm) {
        const double sbar = c.service.survival(t - u);
        const double nv = nu.value(u);
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double prev = (j == 0) ? 1.0 : m[j - 1];
            dm[j] = -nv * m[j] + (double(j) + 1.0) * lam * sbar * prev;
        }
    };

    std::vector<double> edges{0.0, t};
    for (double s : c.service.breakpoints())
        if (t - s > 0.0 && t - s < t) edges.push_back(t - s);
    for (double r : nu.breakpoints())
        if (r > 0.0 && r < t) edges.push_back(r);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<double> state(static_cast<std::size_t>(order), 0.0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        rk45_segment(state, edges[i], edges[i + 1], deriv, tol);
    return state.back();
}

double served_pgf(const ModelSpec& spec, double t, std::span<const double> y,
                  double tol) {
    if (t < 0.0) throw std::invalid_argument("served_pgf: t must be >= 0");
    const int k = spec.num_classes();
    if (static_cast<int>(y.size()) != k)
        throw std::invalid_argument("served_pgf: marks dimension mismatch");
    Marks<double> m;
    m.z.assign(static_cast<std::size_t>(k), 1.0);
    m.y.assign(y.begin(), y.end());
    return std::exp(-kernel_exponent<double>(spec, 0.0, t, t, m, false, tol));
}

double idle_prob(const ModelSpec& spec, double t, double tol) {
    MarkVector m = MarkVector::ones(spec.num_classes());
    std::fill(m.in_system.begin(), m.in_system.end(), 0.0);
    return pgf_joint(spec, t, m, tol);
}

double factorization_check(const ModelSpec& spec, double t,
                           const MarkVector& marks, double tol) {
    if (spec.num_classes() != 1)
        throw std::invalid_argument("factorization_check: single-class models only");
    MarkVector z_only = marks, y_only = marks;
    std::fill(z_only.served.begin(), z_only.served.end(), 1.0);
    std::fill(y_only.in_system.begin(), y_only.in_system.end(), 1.0);
    return std::abs(pgf_joint(spec, t, marks, tol) -
                    pgf_joint(spec, t, z_only, tol) *
                        pgf_joint(spec, t, y_only, tol));
}

TransientResult evaluate(const TransientQuery& query) {
    if (!std::is_sorted(query.times.begin(), query.times.end()))
        throw std::invalid_argument("transient query: times must be ascending");
    if (!(query.tol > 0.0))
        throw std::invalid_argument("transient query: tol must be > 0");
    const bool plain = query.spec.is_plain_single_class() &&
                       query.spec.cls(0).arrival_rate.is_constant();
    TransientResult result;
    for (double t : query.times) {
        TransientResult::Point p;
        p.t = t;
        if (query.marks) {
            p.pgf = pgf_joint(query.spec, t, *query.marks, query.tol);
            p.pgf_error = query.tol;
        }
        if (query.state_cutoff > 0) {
            if (plain) {
                double sum = 0.0;
                for (int n = 0; n <= query.state_cutoff; ++n) {
                    const double pn = state_prob(query.spec, n, t, query.tol);
                    p.pmf[{n}] = pn;
                    sum += pn;
                }
                p.truncation_bound = std::max(0.0, 1.0 - sum);
            } else {
                PmfResult pmf = state_pmf(query.spec, t, query.state_cutoff,
                                          true, query.tol);
                p.pmf = std::move(pmf.pmf);
                p.truncation_bound = pmf.truncation_bound;
            }
        }
        if (plain) {
            p.m1 = moment(query.spec, 1, t);
            p.m2 = moment(query.spec, 2, t);
        }
        result.points.push_back(std::move(p));
    }
    return result;
}

namespace printed_forms {

double pgf(const ModelSpec& spec, double z, double t, double tol) {
    require_plain(spec, "printed_forms::pgf");
    const auto& c = spec.cls(0);
    const double lam = c.arrival_rate.constant_value();
    const RateFunction& nu = spec.catastrophe_rate();
    auto A = [&](double tau) {
        return lam * (1.0 - z) * c.service.integrated_survival(tau) +
               nu.cumulative(tau);
    };
    auto integrand = [&](double u) { return nu.value(u) * std::exp(A(u)); };
    std::vector<double> bps = nu.breakpoints();
    for (double s : c.service.breakpoints()) bps.push_back(s);
    const double inner = integrate(integrand, 0.0, t, tol, bps).value;
    return std::exp(-A(t)) * (1.0 + inner);
}

double state_prob(const ModelSpec& spec, int n, double t, double tol) {
    require_plain(spec, "printed_forms::state_prob");
    const auto& c = spec.cls(0);
    const double lam = c.arrival_rate.constant_value();
    const RateFunction& nu = spec.catastrophe_rate();
    const double Lt = c.service.integrated_survival(t);
    const double Vt = nu.cumulative(t);
    const double head = poisson_mass(n, lam * Lt) * std::exp(-Vt);
    auto integrand = [&](double u) {
        const double dL = Lt - c.service.integrated_survival(u);
        return nu.value(u) * std::exp(-(Vt - nu.cumulative(u))) *
               poisson_mass(n, lam * dL);
    };
    std::vector<double> bps = nu.breakpoints();
    for (double s : c.service.breakpoints()) bps.push_back(s);
    return head + integrate(integrand, 0.0, t, tol, bps).value;
}

double md_m1(double lambda, double nu, double b, double t) {
    if (t > b) return 0.0;
    return lambda / nu * -std::expm1(-nu * t);
}

double md_m2(double lambda, double nu, double b, double t) {
    if (t > b) return 0.0;
    return 2.0 * lambda * lambda *
           (-std::expm1(-nu * t) / (nu * nu) - t / nu * std::exp(-nu * t));
}

}  // namespace printed_forms

}  // namespace cataq
