#include "cataq/model.hpp"

#include <algorithm>
#include <numeric>

namespace cataq {

namespace {

double erlang_cdf(int k, double r, double x) {
    if (x <= 0.0) return 0.0;
    // 1 - e^{-rx} sum_{j<k} (rx)^j / j!
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < k; ++j) {
        term *= r * x / j;
        sum += term;
    }
    return 1.0 - std::exp(-r * x) * sum;
}

}  // namespace

ServiceDistribution::ServiceDistribution(Variant v) : v_(std::move(v)) {
    mean_ = std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                if (!(d.b > 0.0))
                    throw std::invalid_argument("deterministic service: b must be > 0");
                return d.b;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                if (!(d.rate > 0.0))
                    throw std::invalid_argument("exponential service: rate must be > 0");
                return 1.0 / d.rate;
            } else if constexpr (std::is_same_v<T, Erlang>) {
                if (d.shape < 1 || !(d.rate > 0.0))
                    throw std::invalid_argument("erlang service: shape >= 1, rate > 0");
                return d.shape / d.rate;
            } else if constexpr (std::is_same_v<T, HyperExponential>) {
                if (d.weights.empty() || d.weights.size() != d.rates.size())
                    throw std::invalid_argument(
                        "hyperexponential service: weights/rates size mismatch");
                double wsum = 0.0, m = 0.0;
                for (std::size_t i = 0; i < d.weights.size(); ++i) {
                    if (d.weights[i] < 0.0 || !(d.rates[i] > 0.0))
                        throw std::invalid_argument(
                            "hyperexponential service: weights >= 0, rates > 0");
                    wsum += d.weights[i];
                    m += d.weights[i] / d.rates[i];
                }
                if (std::abs(wsum - 1.0) > 1e-12)
                    throw std::invalid_argument(
                        "hyperexponential service: weights must sum to 1");
                return m;
            } else {
                if (d.times.empty() || d.times.size() != d.probs.size())
                    throw std::invalid_argument(
                        "empirical service: times/probs size mismatch");
                for (std::size_t i = 0; i < d.times.size(); ++i) {
                    if (d.times[i] < 0.0 || d.probs[i] < 0.0 || d.probs[i] > 1.0)
                        throw std::invalid_argument(
                            "empirical service: times >= 0, probs in [0,1]");
                    if (i > 0 && (d.times[i] <= d.times[i - 1] ||
                                  d.probs[i] < d.probs[i - 1]))
                        throw std::invalid_argument(
                            "empirical service: table must be increasing");
                }
                if (!(d.times.back() > 0.0))
                    throw std::invalid_argument(
                        "empirical service: last time must be > 0");
                // mean = integral of survival; survival is 0 past the last
                // point (CDF jumps to 1 there).
                return 0.0;  // patched below, needs integrated_survival
            }
        },
        v_);
    if (std::holds_alternative<Empirical>(v_)) {
        mean_ = integrated_survival(std::get<Empirical>(v_).times.back());
        if (!(mean_ > 0.0))
            throw std::invalid_argument("empirical service: mean must be > 0");
    }
}

ServiceDistribution ServiceDistribution::deterministic(double b) {
    return ServiceDistribution(Deterministic{b});
}
ServiceDistribution ServiceDistribution::exponential(double rate) {
    return ServiceDistribution(Exponential{rate});
}
ServiceDistribution ServiceDistribution::erlang(int shape, double rate) {
    return ServiceDistribution(Erlang{shape, rate});
}
ServiceDistribution ServiceDistribution::hyperexponential(
    std::vector<double> weights, std::vector<double> rates) {
    return ServiceDistribution(HyperExponential{std::move(weights), std::move(rates)});
}
ServiceDistribution ServiceDistribution::empirical(std::vector<double> times,
                                                   std::vector<double> probs) {
    return ServiceDistribution(Empirical{std::move(times), std::move(probs)});
}

double ServiceDistribution::cdf(double x) const {
    if (x < 0.0) return 0.0;
    return std::visit(
        [x](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return x < d.b ? 0.0 : 1.0;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-d.rate * x);
            } else if constexpr (std::is_same_v<T, Erlang>) {
                return erlang_cdf(d.shape, d.rate, x);
            } else if constexpr (std::is_same_v<T, HyperExponential>) {
                double s = 0.0;
                for (std::size_t i = 0; i < d.weights.size(); ++i)
                    s += d.weights[i] * std::exp(-d.rates[i] * x);
                return 1.0 - s;
            } else {
                if (x >= d.times.back()) return 1.0;
                // implied leading (0, 0) point
                double t0 = 0.0, p0 = 0.0;
                for (std::size_t i = 0; i < d.times.size(); ++i) {
                    if (x < d.times[i]) {
                        const double w = (x - t0) / (d.times[i] - t0);
                        return p0 + w * (d.probs[i] - p0);
                    }
                    t0 = d.times[i];
                    p0 = d.probs[i];
                }
                return 1.0;
            }
        },
        v_);
}

double ServiceDistribution::integrated_survival(double tau) const {
    if (tau <= 0.0) return 0.0;
    return std::visit(
        [tau](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return std::min(tau, d.b);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::expm1(-d.rate * tau) / d.rate;
            } else if constexpr (std::is_same_v<T, Erlang>) {
                // sum_{j<k} (1/r)(1 - e^{-r tau} sum_{i<=j} (r tau)^i / i!)
                double total = 0.0;
                double inner = 1.0, term = 1.0;
                const double e = std::exp(-d.rate * tau);
                for (int j = 0; j < d.shape; ++j) {
                    if (j > 0) {
                        term *= d.rate * tau / j;
                        inner += term;
                    }
                    total += (1.0 - e * inner) / d.rate;
                }
                return total;
            } else if constexpr (std::is_same_v<T, HyperExponential>) {
                double s = 0.0;
                for (std::size_t i = 0; i < d.weights.size(); ++i)
                    s += d.weights[i] * (-std::expm1(-d.rates[i] * tau)) / d.rates[i];
                return s;
            } else {
                // piecewise-linear CDF => piecewise-quadratic integral
                double acc = 0.0;
                double t0 = 0.0, p0 = 0.0;
                for (std::size_t i = 0; i <= d.times.size(); ++i) {
                    const bool last = i == d.times.size();
                    const double t1 = last ? tau : d.times[i];
                    const double p1 = last ? p0 : d.probs[i];
                    if (last && tau <= t0) break;
                    const double hi = std::min(tau, t1);
                    if (hi > t0 && t0 < d.times.back()) {
                        // survival on [t0, t1): 1 - (p0 + slope (x - t0))
                        const double slope = (t1 > t0) ? (p1 - p0) / (t1 - t0) : 0.0;
                        const double len = hi - t0;
                        acc += (1.0 - p0) * len - 0.5 * slope * len * len;
                    }
                    if (last || hi >= tau) break;
                    t0 = t1;
                    p0 = p1;
                }
                return acc;
            }
        },
        v_);
}

std::vector<double> ServiceDistribution::breakpoints() const {
    return std::visit(
        [](const auto& d) -> std::vector<double> {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return {d.b};
            } else if constexpr (std::is_same_v<T, Empirical>) {
                return d.times;
            } else {
                return {};
            }
        },
        v_);
}

RateFunction::RateFunction(std::vector<double> bps, std::vector<double> vals)
    : breakpoints_(std::move(bps)), values_(std::move(vals)) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size())
        throw std::invalid_argument("rate function: breakpoints/values mismatch");
    if (breakpoints_.front() != 0.0)
        throw std::invalid_argument("rate function: first breakpoint must be 0");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (values_[i] < 0.0 || !std::isfinite(values_[i]))
            throw std::invalid_argument("rate function: values must be finite and >= 0");
        if (i > 0 && breakpoints_[i] <= breakpoints_[i - 1])
            throw std::invalid_argument("rate function: breakpoints must increase");
    }
    cumulative_.resize(breakpoints_.size());
    cumulative_[0] = 0.0;
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
        cumulative_[i] = cumulative_[i - 1] +
                         values_[i - 1] * (breakpoints_[i] - breakpoints_[i - 1]);
}

RateFunction RateFunction::constant(double value) {
    return RateFunction({0.0}, {value});
}

RateFunction RateFunction::piecewise(std::vector<double> breakpoints,
                                     std::vector<double> values) {
    return RateFunction(std::move(breakpoints), std::move(values));
}

double RateFunction::value(double t) const {
    if (t < 0.0) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double RateFunction::cumulative(double t) const {
    if (t <= 0.0) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return cumulative_[i] + values_[i] * (t - breakpoints_[i]);
}

double RateFunction::max_value(double horizon) const {
    double m = 0.0;
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (breakpoints_[i] > horizon && i > 0) break;
        m = std::max(m, values_[i]);
    }
    return m;
}

double RateFunction::constant_value() const {
    if (!is_constant())
        throw std::logic_error("rate function: not constant");
    return values_[0];
}

bool RateFunction::is_zero() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return v == 0.0; });
}

std::vector<double> RateFunction::breakpoints() const {
    std::vector<double> bps(breakpoints_.begin() + 1, breakpoints_.end());
    return bps;
}

BatchLaw BatchLaw::single() {
    BatchLaw law;
    law.single_ = true;
    law.dimension_ = 1;
    law.max_total_size_ = 1;
    law.entries_ = {{{1}, 1.0}};
    return law;
}

BatchLaw BatchLaw::univariate(const std::map<int, double>& mass) {
    std::vector<std::pair<std::vector<int>, double>> entries;
    entries.reserve(mass.size());
    for (const auto& [size, m] : mass) entries.push_back({{size}, m});
    return multivariate(std::move(entries));
}

BatchLaw BatchLaw::multivariate(
    std::vector<std::pair<std::vector<int>, double>> entries) {
    if (entries.empty())
        throw std::invalid_argument("batch law: empty support");
    BatchLaw law;
    law.single_ = false;
    law.dimension_ = static_cast<int>(entries.front().first.size());
    double total = 0.0;
    int max_size = 0;
    for (const auto& [count, m] : entries) {
        if (static_cast<int>(count.size()) != law.dimension_)
            throw std::invalid_argument("batch law: inconsistent dimensions");
        int sz = 0;
        for (int c : count) {
            if (c < 0) throw std::invalid_argument("batch law: negative count");
            sz += c;
        }
        if (law.dimension_ == 1 && sz < 1)
            throw std::invalid_argument("batch law: sizes must be >= 1");
        if (m < 0.0)
            throw std::invalid_argument("batch law: negative mass");
        total += m;
        max_size = std::max(max_size, sz);
    }
    law.truncation_mass_ = 1.0 - total;
    if (std::abs(law.truncation_mass_) > 1e-12)
        throw std::invalid_argument("batch law: masses sum to " +
                                    std::to_string(total));
    law.max_total_size_ = max_size;
    law.entries_ = std::move(entries);
    return law;
}

double BatchLaw::mean_size(int coordinate) const {
    double m = 0.0;
    for (const auto& [count, mass] : entries_)
        m += mass * count[static_cast<std::size_t>(coordinate)];
    return m;
}

void MarkVector::validate(int k) const {
    if (static_cast<int>(in_system.size()) != k ||
        static_cast<int>(served.size()) != k)
        throw std::invalid_argument("marks: dimension mismatch");
    for (double z : in_system)
        if (std::abs(z) > 1.0)
            throw std::invalid_argument("marks: |z| must be <= 1");
    for (double y : served)
        if (std::abs(y) > 1.0)
            throw std::invalid_argument("marks: |y| must be <= 1");
}

ModelSpec::ModelSpec(std::vector<CustomerClass> classes,
                     RateFunction catastrophe_rate,
                     std::optional<SharedBatch> shared)
    : classes_(std::move(classes)),
      catastrophe_rate_(std::move(catastrophe_rate)),
      shared_(std::move(shared)) {
    if (classes_.empty())
        throw std::invalid_argument("model: at least one class required");
    if (shared_) {
        if (shared_->law.dimension() != num_classes())
            throw std::invalid_argument(
                "model: shared batch dimension must equal class count");
        for (const auto& c : classes_)
            if (!c.batch.is_single())
                throw std::invalid_argument(
                    "model: per-class batch laws and a shared batch law are "
                    "mutually exclusive");
    }
}

bool ModelSpec::constant_rates() const {
    if (!catastrophe_rate_.is_constant()) return false;
    if (shared_) return shared_->arrival_rate.is_constant();
    for (const auto& c : classes_)
        if (!c.arrival_rate.is_constant()) return false;
    return true;
}

bool ModelSpec::has_batches() const {
    if (shared_) return true;
    for (const auto& c : classes_)
        if (!c.batch.is_single()) return true;
    return false;
}

double ModelSpec::total_arrival_rate() const {
    if (!constant_rates())
        throw std::logic_error("model: total arrival rate requires constant rates");
    if (shared_) return shared_->arrival_rate.constant_value();
    double sum = 0.0;
    for (const auto& c : classes_) sum += c.arrival_rate.constant_value();
    return sum;
}

bool ModelSpec::is_plain_single_class() const {
    return !shared_ && num_classes() == 1 && classes_[0].batch.is_single();
}

}  // namespace cataq
