#include "cataq/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <variant>

#include "cataq/busy.hpp"
#include "cataq/sim.hpp"
#include "cataq/transient.hpp"

namespace cataq {

namespace {

namespace fs = std::filesystem;

std::ofstream open_csv(const RunManifest& manifest, const std::string& name,
                       const std::string& header) {
    fs::create_directories(manifest.out_dir);
    std::ofstream out(fs::path(manifest.out_dir) / name);
    if (!out)
        throw std::runtime_error("cannot write to output directory " +
                                 manifest.out_dir);
    out << std::setprecision(12);
    out << header << "\n";
    return out;
}

SimSettings effective_sim(const RunConfig& config,
                          const RunManifest& manifest) {
    SimSettings sim = config.sim;
    if (manifest.seed) sim.seed = *manifest.seed;
    if (manifest.replications) sim.replications = *manifest.replications;
    return sim;
}

std::string key_string(const std::vector<int>& key) {
    std::string out;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(key[i]);
    }
    return out;
}

struct Tally {
    int rows = 0;
    int failures = 0;

    const char* mark(bool pass) {
        ++rows;
        if (!pass) ++failures;
        return pass ? "pass" : "fail";
    }
};

void write_summary(const RunManifest& manifest, const std::string& command,
                   const Tally& tally, const std::vector<std::string>& files) {
    fs::create_directories(manifest.out_dir);
    std::ofstream out(fs::path(manifest.out_dir) / "summary.txt");
    out << "command: " << command << "\n";
    out << "rows: " << tally.rows << "\n";
    out << "pass: " << tally.rows - tally.failures << "\n";
    out << "fail: " << tally.failures << "\n";
    for (const auto& f : files) out << "table: " << f << "\n";
}

}  // namespace

int run_transient(const RunConfig& config, const RunManifest& manifest) {
    TransientQuery query{config.spec, config.transient.times,
                         config.transient.marks, config.transient.state_cutoff,
                         manifest.tol.value_or(config.transient.tol)};
    TransientResult result = evaluate(query);
    auto out = open_csv(manifest, "transient.csv",
                        "t,state,probability,truncation_bound,m1,m2,pgf,"
                        "provenance");
    for (const auto& point : result.points) {
        for (const auto& [key, prob] : point.pmf)
            out << point.t << "," << key_string(key) << "," << prob << ","
                << point.truncation_bound << "," << point.m1 << "," << point.m2
                << "," << point.pgf << ",renewal-convolution\n";
    }
    write_summary(manifest, "transient", {}, {"transient.csv"});
    return 0;
}

int run_busy(const RunConfig& config, const RunManifest& manifest) {
    auto out = open_csv(manifest, "busy.csv",
                        "s,lt_idle,busy_lst,cycle_lst,flagged,provenance");
    if (!config.spec.constant_rates()) {
        out << ",,,,," << "rejected: homogeneity required\n";
        write_summary(manifest, "busy", {}, {"busy.csv"});
        return 1;
    }
    for (double s : config.busy.s_values) {
        LSTValue idle = lt_idle(config.spec, s);
        LSTValue busy = lst_busy_period(config.spec, s);
        LSTValue cycle = lst_busy_cycle(config.spec, s);
        out << s << "," << idle.value << "," << busy.value << ","
            << cycle.value << ","
            << (idle.flagged || busy.flagged || cycle.flagged ? 1 : 0)
            << ",conservative-relation\n";
    }
    std::vector<std::string> files{"busy.csv"};
    BusyMoments moments = busy_moments(config.spec);
    {
        auto mom = open_csv(manifest, "busy_moments.csv",
                            "quantity,value,flagged,provenance");
        mom << "mean," << moments.mean << "," << (moments.flagged ? 1 : 0)
            << ",lst-differentiation\n";
        mom << "second_moment," << moments.second_moment << ","
            << (moments.flagged ? 1 : 0) << ",lst-differentiation\n";
        if (std::isfinite(moments.mean_closed_form))
            mom << "mean," << moments.mean_closed_form
                << ",0,deterministic-closed-form\n";
        files.push_back("busy_moments.csv");
    }
    if (!config.busy.t_grid.empty()) {
        auto df = open_csv(manifest, "busy_df.csv",
                           "t,value,error_estimate,flagged,provenance");
        for (const auto& p : invert_lst(
                 [&](std::complex<double> s) {
                     return lst_busy_period_complex(config.spec, s);
                 },
                 config.busy.t_grid))
            df << p.t << "," << p.value << "," << p.error_estimate << ","
               << (p.flagged ? 1 : 0) << ",euler-inversion\n";
        files.push_back("busy_df.csv");
    }
    write_summary(manifest, "busy", {}, files);
    return 0;
}

int run_simulate(const RunConfig& config, const RunManifest& manifest) {
    SimSettings sim = effective_sim(config, manifest);
    SimConfig sc{config.spec,
                 sim.horizon,
                 sim.checkpoints,
                 sim.replications,
                 sim.seed,
                 sim.busy_cycle_target,
                 sim.events_csv};
    std::vector<std::string> files;
    if (!sc.checkpoints.empty() || sc.horizon > 0.0) {
        if (sc.checkpoints.empty()) sc.checkpoints = {sc.horizon};
        SimulationSummary summary = simulate_transient(sc);
        auto out = open_csv(manifest, "simulate.csv",
                            "t,state,fraction,mean_n,stderr_mean_n,provenance");
        for (const auto& cp : summary.checkpoints)
            for (const auto& [key, frac] : cp.joint_pmf)
                out << cp.t << "," << key_string(key) << "," << frac << ","
                    << cp.mean_n << "," << cp.stderr_mean_n << ",simulation\n";
        files.push_back("simulate.csv");
    }
    if (sc.busy_cycle_target > 0) {
        if (!config.spec.constant_rates()) {
            auto out = open_csv(manifest, "simulate_busy.csv",
                                "quantity,value,provenance");
            out << ",,rejected: homogeneity required\n";
            write_summary(manifest, "simulate", {}, {"simulate_busy.csv"});
            return 1;
        }
        SimulationSummary summary = simulate_busy(sc);
        auto out = open_csv(manifest, "simulate_busy.csv",
                            "quantity,value,provenance");
        auto mean = [](const std::vector<double>& xs) {
            double s = 0.0;
            for (double x : xs) s += x;
            return xs.empty() ? 0.0 : s / double(xs.size());
        };
        out << "busy_period_mean," << mean(summary.busy_periods)
            << ",simulation\n";
        out << "busy_cycle_mean," << mean(summary.busy_cycles)
            << ",simulation\n";
        out << "idle_period_mean," << mean(summary.idle_periods)
            << ",simulation\n";
        out << "cycles," << double(summary.busy_periods.size())
            << ",simulation\n";
        files.push_back("simulate_busy.csv");
    }
    write_summary(manifest, "simulate", {}, files);
    return 0;
}

int run_compare(const RunConfig& config, const RunManifest& manifest) {
    Tally tally;
    std::vector<std::string> files;
    const double compare_tol = manifest.tol.value_or(config.compare_tol);
    SimSettings sim = effective_sim(config, manifest);

    // Transient: analytic pmf per state vs simulation, plus the mean.
    {
        std::vector<double> times = config.transient.times;
        SimConfig sc{config.spec,
                     times.empty() ? 1.0 : times.back(),
                     times,
                     sim.replications,
                     sim.seed,
                     0,
                     std::nullopt};
        SimulationSummary summary = simulate_transient(sc);
        auto out = open_csv(
            manifest, "transient_compare.csv",
            "t,state,analytic,simulated,stderr,delta,tolerance,status,"
            "provenance");
        const double root_r = std::sqrt(double(sim.replications));
        for (std::size_t ci = 0; ci < times.size(); ++ci) {
            PmfResult analytic =
                state_pmf(config.spec, times[ci],
                          config.transient.state_cutoff, true,
                          config.transient.tol);
            auto simulated = summary.total_in_system_pmf(ci);
            // Aggregate the analytic joint pmf over classes to totals.
            std::map<int, double> totals;
            for (const auto& [key, prob] : analytic.pmf) {
                int n = 0;
                for (int v : key) n += v;
                totals[n] += prob;
            }
            for (const auto& [n, prob] : totals) {
                const double emp =
                    simulated.count(n) ? simulated.at(n) : 0.0;
                const double se =
                    std::sqrt(std::max(emp * (1.0 - emp), 1e-12)) / root_r;
                const double delta = std::abs(prob - emp);
                const double tol = std::max(compare_tol, 3.0 * se);
                out << times[ci] << "," << n << "," << prob << "," << emp
                    << "," << se << "," << delta << "," << tol << ","
                    << tally.mark(delta <= tol) << ",renewal-convolution\n";
            }
            if (config.spec.is_plain_single_class()) {
                const double m1 =
                    moment(config.spec, 1, times[ci], config.transient.tol);
                const auto& cp = summary.checkpoints[ci];
                const double tol =
                    std::max(3.0 * cp.stderr_mean_n, compare_tol / 10.0);
                const double delta = std::abs(m1 - cp.mean_n);
                out << times[ci] << ",mean," << m1 << "," << cp.mean_n << ","
                    << cp.stderr_mean_n << "," << delta << "," << tol << ","
                    << tally.mark(delta <= tol) << ",moment-ode\n";
            }
        }
        files.push_back("transient_compare.csv");
    }

    // Busy period: LST and mean vs simulation.
    {
        auto out = open_csv(
            manifest, "busy_compare.csv",
            "s,analytic,simulated,stderr,delta,tolerance,status,provenance");
        if (!config.spec.constant_rates()) {
            out << ",,,,,,," << "rejected: homogeneity required\n";
            tally.mark(false);
        } else {
            SimConfig sc{config.spec,
                         0.0,
                         {},
                         sim.replications,
                         sim.seed + 1,
                         sim.busy_cycle_target > 0 ? sim.busy_cycle_target
                                                   : 20000,
                         std::nullopt};
            SimulationSummary summary = simulate_busy(sc);
            for (double s : config.busy.s_values) {
                LSTValue analytic = lst_busy_period(config.spec, s);
                auto [emp, se] = empirical_lst(summary.busy_periods, s);
                const double delta = std::abs(analytic.value - emp);
                const double tol =
                    3.0 * se + analytic.error_estimate + 1e-6;
                out << s << "," << analytic.value << "," << emp << "," << se
                    << "," << delta << "," << tol << ","
                    << tally.mark(delta <= tol)
                    << ",conservative-relation\n";
            }
            BusyMoments moments = busy_moments(config.spec);
            double sum = 0.0, sq = 0.0;
            for (double x : summary.busy_periods) {
                sum += x;
                sq += x * x;
            }
            const double n = double(summary.busy_periods.size());
            const double mean = sum / n;
            const double se =
                std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
            const double delta = std::abs(moments.mean - mean);
            const double tol = 3.0 * se;
            out << "mean," << moments.mean << "," << mean << "," << se << ","
                << delta << "," << tol << "," << tally.mark(delta <= tol)
                << ",lst-differentiation\n";
            if (std::isfinite(moments.mean_closed_form)) {
                const double d2 = std::abs(moments.mean_closed_form - mean);
                out << "mean," << moments.mean_closed_form << "," << mean
                    << "," << se << "," << d2 << "," << tol << ","
                    << tally.mark(d2 <= tol)
                    << ",deterministic-closed-form\n";
            }
        }
        files.push_back("busy_compare.csv");
    }

    // Diagnostics: literal textbook expressions vs the trusted evaluators.
    // Informational only; these rows never affect the exit status.
    {
        auto out = open_csv(manifest, "diagnostics.csv",
                            "t,quantity,literal,trusted,delta,provenance");
        if (config.spec.is_plain_single_class() &&
            config.spec.constant_rates()) {
            for (double t : config.transient.times) {
                const double literal =
                    printed_forms::pgf(config.spec, 0.5, t);
                MarkVector marks{{0.5}, {1.0}};
                const double trusted = pgf_joint(config.spec, t, marks);
                out << t << ",pgf(z=0.5)," << literal << "," << trusted << ","
                    << std::abs(literal - trusted)
                    << ",literal-vs-renewal\n";
                for (int n = 0; n <= 2; ++n) {
                    const double ls =
                        printed_forms::state_prob(config.spec, n, t);
                    const double ts = state_prob(config.spec, n, t);
                    out << t << ",P_" << n << "," << ls << "," << ts << ","
                        << std::abs(ls - ts) << ",literal-vs-renewal\n";
                }
            }
            if (const auto* det =
                    std::get_if<ServiceDistribution::Deterministic>(
                        &config.spec.service(0).variant())) {
                const double lam =
                    config.spec.cls(0).arrival_rate.constant_value();
                const double v =
                    config.spec.catastrophe_rate().constant_value();
                for (double t : config.transient.times) {
                    const double literal =
                        printed_forms::md_m1(lam, v, det->b, t);
                    const double trusted = moment(config.spec, 1, t);
                    out << t << ",m1," << literal << "," << trusted << ","
                        << std::abs(literal - trusted)
                        << ",printed-moment-branch\n";
                }
            }
        }
        files.push_back("diagnostics.csv");
    }

    write_summary(manifest, "compare", tally, files);
    return tally.failures == 0 ? 0 : 1;
}

int run_command(const RunConfig& config, const RunManifest& manifest) {
    if (manifest.command == "transient") return run_transient(config, manifest);
    if (manifest.command == "busy") return run_busy(config, manifest);
    if (manifest.command == "simulate") return run_simulate(config, manifest);
    if (manifest.command == "compare") return run_compare(config, manifest);
    throw std::invalid_argument("unknown command '" + manifest.command + "'");
}

}  // namespace cataq
