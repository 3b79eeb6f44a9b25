#ifndef CATAQ_SIM_HPP
#define CATAQ_SIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cataq/model.hpp"
#include "cataq/rng.hpp"

// Discrete-event simulation oracle. Catastrophes flush every in-system
// customer; flushed customers never count as served. Simultaneous events are
// ordered service completion, then catastrophe, then arrival.

namespace cataq {

struct SimConfig {
    ModelSpec spec;
    double horizon = 0.0;
    std::vector<double> checkpoints;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    std::size_t busy_cycle_target = 0;
    // When set, one CSV row per event: replication, event_time, event_type,
    // class, N_after, M_after.
    std::optional<std::string> events_csv_path;
};

struct SimulationSummary {
    struct Checkpoint {
        double t = 0.0;
        // (N_1..N_k, M_1..M_k) -> fraction of replications
        std::map<std::vector<int>, double> joint_pmf;
        double mean_n = 0.0;
        double var_n = 0.0;
        double stderr_mean_n = 0.0;
    };
    std::vector<Checkpoint> checkpoints;
    std::vector<double> busy_periods;
    std::vector<double> busy_cycles;
    std::vector<double> idle_periods;
    std::uint64_t seed = 0;
    std::size_t replications = 0;

    // Marginal pmf of the total in-system count at checkpoint index `ci`.
    std::map<int, double> total_in_system_pmf(std::size_t ci) const;
    // Marginal pmf of the total served count at checkpoint index `ci`.
    std::map<int, double> total_served_pmf(std::size_t ci) const;
};

SimulationSummary simulate_transient(const SimConfig& config);

// Runs until busy_cycle_target complete busy cycles are recorded. A busy
// period ends by the last service completion or by a catastrophe; the cycle
// adds the following idle period. Requires constant rates.
SimulationSummary simulate_busy(const SimConfig& config);

// Sample mean and standard error of e^{-s X} over the samples.
std::pair<double, double> empirical_lst(std::span<const double> samples,
                                        double s);

// Service-time sample for one customer of the given law.
double sample_service(const ServiceDistribution& dist, Rng& rng);

}  // namespace cataq

#endif
