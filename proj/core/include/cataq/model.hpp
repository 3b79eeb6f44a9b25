#ifndef CATAQ_MODEL_HPP
#define CATAQ_MODEL_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Domain types for infinite-server queueing models with catastrophes:
// service-time laws, arrival/catastrophe rate functions, batch-size laws,
// customer classes and the full model description. All types are immutable
// after construction and safe to share across concurrent evaluators.

namespace cataq {

class ServiceDistribution {
  public:
    struct Deterministic {
        double b;
    };
    struct Exponential {
        double rate;
    };
    struct Erlang {
        int shape;
        double rate;
    };
    struct HyperExponential {
        std::vector<double> weights;
        std::vector<double> rates;
    };
    // Piecewise-linear CDF between (time, probability) points; the CDF jumps
    // to 1 at the last point so the mean stays finite. A leading (0, 0) point
    // is implied when the table starts later.
    struct Empirical {
        std::vector<double> times;
        std::vector<double> probs;
    };
    using Variant = std::variant<Deterministic, Exponential, Erlang,
                                 HyperExponential, Empirical>;

    static ServiceDistribution deterministic(double b);
    static ServiceDistribution exponential(double rate);
    static ServiceDistribution erlang(int shape, double rate);
    static ServiceDistribution hyperexponential(std::vector<double> weights,
                                                std::vector<double> rates);
    static ServiceDistribution empirical(std::vector<double> times,
                                         std::vector<double> probs);

    double cdf(double x) const;
    // 1 - cdf(x) exactly; 1 for x < 0.
    double survival(double x) const { return 1.0 - cdf(x); }
    double mean() const { return mean_; }
    // Integral of the survival function over [0, tau], in closed form.
    double integrated_survival(double tau) const;
    // Kink locations of the CDF (empty for smooth laws).
    std::vector<double> breakpoints() const;
    const Variant& variant() const { return v_; }

  private:
    explicit ServiceDistribution(Variant v);
    Variant v_;
    double mean_ = 0.0;
};

// Nonnegative rate as a function of time: constant or piecewise-constant
// (right-continuous, last value extends to infinity).
class RateFunction {
  public:
    static RateFunction constant(double value);
    // breakpoints[0] must be 0; values[i] applies on [breakpoints[i],
    // breakpoints[i+1]).
    static RateFunction piecewise(std::vector<double> breakpoints,
                                  std::vector<double> values);

    double value(double t) const;
    double cumulative(double t) const;
    double max_value(double horizon) const;
    bool is_constant() const { return breakpoints_.size() == 1; }
    double constant_value() const;
    bool is_zero() const;
    std::vector<double> breakpoints() const;

  private:
    RateFunction(std::vector<double> bps, std::vector<double> vals);
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    std::vector<double> cumulative_;  // cumulative integral at each breakpoint
};

// Batch-size law with finite support. Infinite families must be truncated
// beforehand; the missing mass is recorded and must not exceed 1e-12.
class BatchLaw {
  public:
    static BatchLaw single();
    static BatchLaw univariate(const std::map<int, double>& mass);
    static BatchLaw multivariate(
        std::vector<std::pair<std::vector<int>, double>> entries);

    int dimension() const { return dimension_; }
    bool is_single() const { return single_; }
    double truncation_mass() const { return truncation_mass_; }
    int max_total_size() const { return max_total_size_; }
    double mean_size(int coordinate = 0) const;

    template <typename T>
    T pgf(std::span<const T> arg) const {
        if (static_cast<int>(arg.size()) != dimension_)
            throw std::invalid_argument("batch pgf: argument dimension mismatch");
        if (single_) return arg[0];
        T sum{};
        for (const auto& [count, mass] : entries_) {
            T term = static_cast<T>(mass);
            for (int d = 0; d < dimension_; ++d)
                for (int p = 0; p < count[d]; ++p) term *= arg[d];
            sum += term;
        }
        return sum;
    }

    double pgf1(double z) const {
        return pgf<double>(std::span<const double>(&z, 1));
    }

    const std::vector<std::pair<std::vector<int>, double>>& entries() const {
        return entries_;
    }

  private:
    BatchLaw() = default;
    bool single_ = true;
    int dimension_ = 1;
    double truncation_mass_ = 0.0;
    int max_total_size_ = 1;
    std::vector<std::pair<std::vector<int>, double>> entries_;
};

struct CustomerClass {
    RateFunction arrival_rate;
    ServiceDistribution service;
    BatchLaw batch;
};

// Marks for the joint PGF: z marks in-system (busy) customers, y marks served
// customers. This convention is fixed globally.
struct MarkVector {
    std::vector<double> in_system;  // z
    std::vector<double> served;     // y

    static MarkVector ones(int k) {
        return {std::vector<double>(static_cast<std::size_t>(k), 1.0),
                std::vector<double>(static_cast<std::size_t>(k), 1.0)};
    }
    void validate(int k) const;
};

// One queueing model instance. Either every class carries its own batch law
// (per-class mode), or one shared multivariate batch law governs joint
// mixed-type batches driven by a single arrival stream (shared mode).
class ModelSpec {
  public:
    struct SharedBatch {
        RateFunction arrival_rate;
        BatchLaw law;
    };

    ModelSpec(std::vector<CustomerClass> classes, RateFunction catastrophe_rate,
              std::optional<SharedBatch> shared = std::nullopt);

    int num_classes() const { return static_cast<int>(classes_.size()); }
    const std::vector<CustomerClass>& classes() const { return classes_; }
    const CustomerClass& cls(int i) const { return classes_.at(static_cast<std::size_t>(i)); }
    const ServiceDistribution& service(int i) const { return cls(i).service; }
    const RateFunction& catastrophe_rate() const { return catastrophe_rate_; }
    bool shared_mode() const { return shared_.has_value(); }
    const SharedBatch& shared() const { return shared_.value(); }

    bool constant_rates() const;
    bool has_batches() const;
    // Rate at which batches/arrival events occur; requires constant rates.
    double total_arrival_rate() const;
    // Single class, unit batches, for the scalar closed-form paths.
    bool is_plain_single_class() const;

  private:
    std::vector<CustomerClass> classes_;
    RateFunction catastrophe_rate_;
    std::optional<SharedBatch> shared_;
};

// Survival probability of a service law at elapsed time x (1 for x < 0).
inline double survival(const ServiceDistribution& dist, double x) {
    return dist.survival(x);
}

// PGF of a batch law at the given argument vector.
inline double batch_pgf(const BatchLaw& law, std::span<const double> arg) {
    return law.pgf<double>(arg);
}

}  // namespace cataq

#endif
