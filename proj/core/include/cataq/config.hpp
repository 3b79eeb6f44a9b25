#ifndef CATAQ_CONFIG_HPP
#define CATAQ_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cataq/model.hpp"

// JSON run configuration: model description plus per-command settings.
// Parsing is strict — unknown keys, negative rates and malformed batch laws
// are collected into a ConfigError listing every violation with its key path.

namespace cataq {

struct TransientSettings {
    std::vector<double> times{1.0};
    std::optional<MarkVector> marks;
    int state_cutoff = 12;
    double tol = 1e-9;
};

struct BusySettings {
    std::vector<double> s_values{0.5, 1.0, 2.0};
    std::vector<double> t_grid;
};

struct SimSettings {
    double horizon = 0.0;
    std::vector<double> checkpoints;
    std::size_t replications = 10000;
    std::uint64_t seed = 1;
    std::size_t busy_cycle_target = 0;
    std::optional<std::string> events_csv;
};

struct RunConfig {
    ModelSpec spec;
    TransientSettings transient;
    BusySettings busy;
    SimSettings sim;
    double compare_tol = 0.02;
};

// Command-line plumbing merged over the config file.
struct RunManifest {
    std::string command;  // transient | busy | simulate | compare
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::size_t> replications;
};

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    std::vector<std::string> violations_;
};

RunConfig parse_config(const std::string& text);

// Model section serialized back to JSON; parse_config(wrapped) round-trips.
std::string serialize_model(const ModelSpec& spec);

// Field-by-field equality of two model descriptions.
bool equivalent(const ModelSpec& a, const ModelSpec& b);

}  // namespace cataq

#endif
