#include "cataq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace cataq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Non-homogeneous Poisson epochs on [0, horizon] by thinning against the
// piecewise maximum rate. Exact for piecewise-constant rates.
std::vector<double> poisson_epochs(const RateFunction& rate, double horizon,
                                   Rng& rng) {
    std::vector<double> epochs;
    const double bound = rate.max_value(horizon);
    if (bound <= 0.0) return epochs;
    double t = 0.0;
    while (true) {
        t += rng.exponential(bound);
        if (t > horizon) break;
        if (rng.uniform() * bound < rate.value(t)) epochs.push_back(t);
    }
    return epochs;
}

// Batch composition as per-class counts.
std::vector<int> sample_batch(const BatchLaw& law, int num_classes,
                              int class_index, Rng& rng) {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    if (law.is_single()) {
        counts[static_cast<std::size_t>(class_index)] = 1;
        return counts;
    }
    const double u = rng.uniform();
    double acc = 0.0;
    const auto& entries = law.entries();
    std::size_t pick = entries.size() - 1;  // truncation residue -> last entry
    for (std::size_t i = 0; i < entries.size(); ++i) {
        acc += entries[i].second;
        if (u < acc) {
            pick = i;
            break;
        }
    }
    if (law.dimension() == 1)
        counts[static_cast<std::size_t>(class_index)] = entries[pick].first[0];
    else
        counts = entries[pick].first;
    return counts;
}

struct Customer {
    int cls = 0;
    double arrival = 0.0;
    double completion = 0.0;
};

// Epoch of the catastrophe that destroys this customer, or +inf. Ties:
// completion at the same instant as a catastrophe is processed first, an
// arrival at the same instant as a catastrophe is processed after it.
double destroyed_at(const Customer& c, const std::vector<double>& cats) {
    auto it = std::upper_bound(cats.begin(), cats.end(), c.arrival);
    if (it == cats.end()) return kInf;
    return (*it < c.completion) ? *it : kInf;
}

}  // namespace

double sample_service(const ServiceDistribution& dist, Rng& rng) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ServiceDistribution::Deterministic>) {
                return d.b;
            } else if constexpr (std::is_same_v<T, ServiceDistribution::Exponential>) {
                return rng.exponential(d.rate);
            } else if constexpr (std::is_same_v<T, ServiceDistribution::Erlang>) {
                double s = 0.0;
                for (int i = 0; i < d.shape; ++i) s += rng.exponential(d.rate);
                return s;
            } else if constexpr (std::is_same_v<T, ServiceDistribution::HyperExponential>) {
                const double u = rng.uniform();
                double acc = 0.0;
                for (std::size_t i = 0; i < d.weights.size(); ++i) {
                    acc += d.weights[i];
                    if (u < acc) return rng.exponential(d.rates[i]);
                }
                return rng.exponential(d.rates.back());
            } else {
                // inverse of the piecewise-linear CDF, atom at the last point
                const double u = rng.uniform();
                if (u >= d.probs.back()) return d.times.back();
                double t0 = 0.0, p0 = 0.0;
                for (std::size_t i = 0; i < d.times.size(); ++i) {
                    if (u < d.probs[i]) {
                        const double dp = d.probs[i] - p0;
                        const double w = (dp > 0.0) ? (u - p0) / dp : 0.0;
                        return t0 + w * (d.times[i] - t0);
                    }
                    t0 = d.times[i];
                    p0 = d.probs[i];
                }
                return d.times.back();
            }
        },
        dist.variant());
}

SimulationSummary simulate_transient(const SimConfig& config) {
    const ModelSpec& spec = config.spec;
    const int k = spec.num_classes();
    if (config.replications < 1)
        throw std::invalid_argument("simulate_transient: replications >= 1 required");
    for (double cp : config.checkpoints)
        if (cp < 0.0 || cp > config.horizon)
            throw std::invalid_argument(
                "simulate_transient: checkpoints must lie in [0, horizon]");

    SimulationSummary summary;
    summary.seed = config.seed;
    summary.replications = config.replications;
    summary.checkpoints.resize(config.checkpoints.size());
    for (std::size_t ci = 0; ci < config.checkpoints.size(); ++ci)
        summary.checkpoints[ci].t = config.checkpoints[ci];

    std::vector<std::map<std::vector<int>, long>> counts(config.checkpoints.size());
    std::vector<double> sum_n(config.checkpoints.size(), 0.0);
    std::vector<double> sum_n2(config.checkpoints.size(), 0.0);

    std::ofstream events;
    if (config.events_csv_path) {
        events.open(*config.events_csv_path);
        events << "replication,event_time,event_type,class,N_after,M_after\n";
    }

    for (std::size_t rep = 0; rep < config.replications; ++rep) {
        Rng rng = Rng::stream(config.seed, rep);

        std::vector<double> cats =
            poisson_epochs(spec.catastrophe_rate(), config.horizon, rng);

        std::vector<Customer> customers;
        if (spec.shared_mode()) {
            const auto epochs =
                poisson_epochs(spec.shared().arrival_rate, config.horizon, rng);
            for (double u : epochs) {
                const auto batch = sample_batch(spec.shared().law, k, 0, rng);
                for (int i = 0; i < k; ++i)
                    for (int c = 0; c < batch[static_cast<std::size_t>(i)]; ++c)
                        customers.push_back(
                            {i, u, u + sample_service(spec.service(i), rng)});
            }
        } else {
            for (int i = 0; i < k; ++i) {
                const auto epochs =
                    poisson_epochs(spec.cls(i).arrival_rate, config.horizon, rng);
                for (double u : epochs) {
                    const auto batch = sample_batch(spec.cls(i).batch, k, i, rng);
                    for (int c = 0; c < batch[static_cast<std::size_t>(i)]; ++c)
                        customers.push_back(
                            {i, u, u + sample_service(spec.service(i), rng)});
                }
            }
        }

        for (std::size_t ci = 0; ci < config.checkpoints.size(); ++ci) {
            const double tau = config.checkpoints[ci];
            std::vector<int> key(static_cast<std::size_t>(2 * k), 0);
            int total_n = 0;
            for (const Customer& c : customers) {
                if (c.arrival > tau) continue;
                const double dead = destroyed_at(c, cats);
                if (dead <= tau) continue;  // destroyed, counts nowhere
                if (c.completion <= tau) {
                    ++key[static_cast<std::size_t>(k + c.cls)];  // served
                } else {
                    ++key[static_cast<std::size_t>(c.cls)];  // in system
                    ++total_n;
                }
            }
            ++counts[ci][key];
            sum_n[ci] += total_n;
            sum_n2[ci] += double(total_n) * total_n;
        }

        if (events.is_open()) {
            struct Event {
                double time;
                int kind;  // 0 completion, 1 catastrophe, 2 arrival
                int cls;
            };
            std::vector<Event> evs;
            for (const Customer& c : customers) {
                evs.push_back({c.arrival, 2, c.cls});
                const double dead = destroyed_at(c, cats);
                if (dead == kInf && c.completion <= config.horizon)
                    evs.push_back({c.completion, 0, c.cls});
            }
            for (double x : cats) evs.push_back({x, 1, -1});
            std::sort(evs.begin(), evs.end(), [](const Event& a, const Event& b) {
                return a.time != b.time ? a.time < b.time : a.kind < b.kind;
            });
            int n_now = 0, m_now = 0;
            static const char* kind_names[] = {"service", "catastrophe", "arrival"};
            for (const Event& e : evs) {
                if (e.kind == 2) {
                    ++n_now;
                } else if (e.kind == 0) {
                    --n_now;
                    ++m_now;
                } else {
                    n_now = 0;
                }
                events << rep << ',' << e.time << ',' << kind_names[e.kind] << ','
                       << e.cls << ',' << n_now << ',' << m_now << '\n';
            }
        }
    }

    const double R = double(config.replications);
    for (std::size_t ci = 0; ci < config.checkpoints.size(); ++ci) {
        auto& cp = summary.checkpoints[ci];
        for (const auto& [key, n] : counts[ci]) cp.joint_pmf[key] = n / R;
        cp.mean_n = sum_n[ci] / R;
        cp.var_n = std::max(0.0, sum_n2[ci] / R - cp.mean_n * cp.mean_n);
        cp.stderr_mean_n = std::sqrt(cp.var_n / R);
    }
    return summary;
}

SimulationSummary simulate_busy(const SimConfig& config) {
    const ModelSpec& spec = config.spec;
    if (!spec.constant_rates())
        throw std::invalid_argument("simulate_busy: constant rates required");
    if (config.busy_cycle_target < 1)
        throw std::invalid_argument("simulate_busy: busy_cycle_target >= 1 required");

    const int k = spec.num_classes();
    const double lam_total = spec.total_arrival_rate();
    if (!(lam_total > 0.0))
        throw std::invalid_argument("simulate_busy: positive arrival rate required");
    const double nu = spec.catastrophe_rate().constant_value();

    // Per-class pick probabilities in per-class mode.
    std::vector<double> class_rates;
    if (!spec.shared_mode())
        for (int i = 0; i < k; ++i)
            class_rates.push_back(spec.cls(i).arrival_rate.constant_value());

    SimulationSummary summary;
    summary.seed = config.seed;
    summary.replications = config.busy_cycle_target;

    Rng rng = Rng::stream(config.seed, 0);

    auto arrival_completions_max = [&](Rng& r) {
        // One arrival event: sample its batch and return the largest service
        // completion offset.
        double max_service = 0.0;
        if (spec.shared_mode()) {
            const auto batch = sample_batch(spec.shared().law, k, 0, r);
            for (int i = 0; i < k; ++i)
                for (int c = 0; c < batch[static_cast<std::size_t>(i)]; ++c)
                    max_service = std::max(max_service,
                                           sample_service(spec.service(i), r));
        } else {
            const double u = r.uniform() * lam_total;
            int cls = 0;
            double acc = 0.0;
            for (int i = 0; i < k; ++i) {
                acc += class_rates[static_cast<std::size_t>(i)];
                if (u < acc) {
                    cls = i;
                    break;
                }
                cls = i;
            }
            const auto batch = sample_batch(spec.cls(cls).batch, k, cls, r);
            for (int c = 0; c < batch[static_cast<std::size_t>(cls)]; ++c)
                max_service = std::max(max_service,
                                       sample_service(spec.service(cls), r));
        }
        return max_service;
    };

    double start = rng.exponential(lam_total);  // first arrival into empty model
    while (summary.busy_cycles.size() < config.busy_cycle_target) {
        double empty_at = start + arrival_completions_max(rng);
        double next_arrival = start + rng.exponential(lam_total);
        const double next_cat = start + rng.exponential(nu);
        double end;
        while (true) {
            // tie order: completion, catastrophe, arrival
            if (empty_at <= next_cat && empty_at <= next_arrival) {
                end = empty_at;
                break;
            }
            if (next_cat < empty_at && next_cat <= next_arrival) {
                end = next_cat;
                break;
            }
            empty_at = std::max(empty_at,
                                next_arrival + arrival_completions_max(rng));
            next_arrival += rng.exponential(lam_total);
        }
        const double busy = end - start;
        const double idle = next_arrival - end;
        summary.busy_periods.push_back(busy);
        summary.idle_periods.push_back(idle);
        summary.busy_cycles.push_back(busy + idle);
        start = next_arrival;
    }
    return summary;
}

std::pair<double, double> empirical_lst(std::span<const double> samples,
                                        double s) {
    if (samples.empty())
        throw std::invalid_argument("empirical_lst: empty samples");
    if (!(s > 0.0)) throw std::invalid_argument("empirical_lst: s must be > 0");
    double sum = 0.0, sum2 = 0.0;
    for (double x : samples) {
        const double v = std::exp(-s * x);
        sum += v;
        sum2 += v * v;
    }
    const double n = double(samples.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

std::map<int, double> SimulationSummary::total_in_system_pmf(std::size_t ci) const {
    std::map<int, double> out;
    const auto& cp = checkpoints.at(ci);
    for (const auto& [key, p] : cp.joint_pmf) {
        const int k = static_cast<int>(key.size()) / 2;
        int n = 0;
        for (int i = 0; i < k; ++i) n += key[static_cast<std::size_t>(i)];
        out[n] += p;
    }
    return out;
}

std::map<int, double> SimulationSummary::total_served_pmf(std::size_t ci) const {
    std::map<int, double> out;
    const auto& cp = checkpoints.at(ci);
    for (const auto& [key, p] : cp.joint_pmf) {
        const int k = static_cast<int>(key.size()) / 2;
        int m = 0;
        for (int i = 0; i < k; ++i) m += key[static_cast<std::size_t>(k + i)];
        out[m] += p;
    }
    return out;
}

}  // namespace cataq
