#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cataq/sim.hpp"

using namespace cataq;

namespace {

ModelSpec mm_inf(double lambda, double mu, double nu) {
    return ModelSpec({{RateFunction::constant(lambda),
                       ServiceDistribution::exponential(mu),
                       BatchLaw::single()}},
                     RateFunction::constant(nu));
}

ModelSpec md_inf(double lambda, double b, double nu) {
    return ModelSpec({{RateFunction::constant(lambda),
                       ServiceDistribution::deterministic(b),
                       BatchLaw::single()}},
                     RateFunction::constant(nu));
}

}  // namespace

TEST_CASE("zero arrival rate leaves the system empty") {
    SimConfig config{mm_inf(0.0, 1.0, 0.5), 3.0, {1.0, 3.0}, 200, 42, 0,
                     std::nullopt};
    auto summary = simulate_transient(config);
    for (const auto& cp : summary.checkpoints) {
        CHECK(cp.joint_pmf.at({0, 0}) == doctest::Approx(1.0));
        CHECK(cp.mean_n == 0.0);
    }
}

TEST_CASE("classical mean at a late checkpoint") {
    SimConfig config{mm_inf(2.0, 1.0, 0.0), 5.0, {5.0}, 100000, 7, 0,
                     std::nullopt};
    auto summary = simulate_transient(config);
    const auto& cp = summary.checkpoints[0];
    const double expect = 2.0 * (1.0 - std::exp(-5.0));
    CHECK(std::abs(cp.mean_n - expect) <= 3.0 * cp.stderr_mean_n);
}

TEST_CASE("nothing completes before a deterministic service ends") {
    SimConfig config{md_inf(1.0, 1.0, 0.0), 0.5, {0.5}, 2000, 11, 0,
                     std::nullopt};
    auto summary = simulate_transient(config);
    for (const auto& [key, frac] : summary.checkpoints[0].joint_pmf)
        CHECK(key[1] == 0);  // served count
}

TEST_CASE("seed determinism") {
    SimConfig config{mm_inf(2.0, 1.0, 0.5), 2.0, {1.0, 2.0}, 500, 123, 0,
                     std::nullopt};
    auto a = simulate_transient(config);
    auto b = simulate_transient(config);
    REQUIRE(a.checkpoints.size() == b.checkpoints.size());
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
        CHECK(a.checkpoints[i].joint_pmf == b.checkpoints[i].joint_pmf);
        CHECK(a.checkpoints[i].mean_n == b.checkpoints[i].mean_n);
    }
    SimConfig other = config;
    other.seed = 124;
    auto c = simulate_transient(other);
    CHECK(c.checkpoints[0].mean_n != a.checkpoints[0].mean_n);
}

TEST_CASE("catastrophes reduce the in-system count") {
    SimConfig calm{mm_inf(2.0, 1.0, 0.0), 3.0, {3.0}, 20000, 5, 0,
                   std::nullopt};
    SimConfig stormy{mm_inf(2.0, 1.0, 2.0), 3.0, {3.0}, 20000, 5, 0,
                     std::nullopt};
    auto a = simulate_transient(calm);
    auto b = simulate_transient(stormy);
    CHECK(b.checkpoints[0].mean_n < a.checkpoints[0].mean_n);
}

TEST_CASE("non-homogeneous arrivals by thinning") {
    // Rate 2 on [0,1), 0 afterwards, exponential(1000) service: counts at
    // t=1 are Poisson with mean very close to the full window integral.
    ModelSpec spec({{RateFunction::piecewise({0.0, 1.0}, {2.0, 0.0}),
                     ServiceDistribution::exponential(0.001),
                     BatchLaw::single()}},
                   RateFunction::constant(0.0));
    SimConfig config{spec, 4.0, {4.0}, 50000, 9, 0, std::nullopt};
    auto summary = simulate_transient(config);
    const auto& cp = summary.checkpoints[0];
    // Arrivals stop at t=1; nothing (almost) completes by t=4.
    CHECK(std::abs(cp.mean_n - 2.0) <= 3.0 * cp.stderr_mean_n + 0.01);
}

TEST_CASE("batch arrivals inflate counts accordingly") {
    ModelSpec spec({{RateFunction::constant(1.0),
                     ServiceDistribution::exponential(1.0),
                     BatchLaw::univariate({{1, 0.5}, {2, 0.5}})}},
                   RateFunction::constant(0.0));
    SimConfig config{spec, 3.0, {3.0}, 50000, 21, 0, std::nullopt};
    auto summary = simulate_transient(config);
    const auto& cp = summary.checkpoints[0];
    const double expect = 1.5 * (1.0 - std::exp(-3.0));
    CHECK(std::abs(cp.mean_n - expect) <= 3.5 * cp.stderr_mean_n);
}

TEST_CASE("shared batches arrive into both classes at once") {
    ModelSpec spec({{RateFunction::constant(0.0),
                     ServiceDistribution::deterministic(5.0),
                     BatchLaw::single()},
                    {RateFunction::constant(0.0),
                     ServiceDistribution::deterministic(5.0),
                     BatchLaw::single()}},
                   RateFunction::constant(0.0),
                   ModelSpec::SharedBatch{
                       RateFunction::constant(1.0),
                       BatchLaw::multivariate({{{1, 1}, 1.0}})});
    SimConfig config{spec, 2.0, {2.0}, 5000, 3, 0, std::nullopt};
    auto summary = simulate_transient(config);
    for (const auto& [key, frac] : summary.checkpoints[0].joint_pmf)
        CHECK(key[0] == key[1]);  // equal in-system counts per class
}

TEST_CASE("events csv is emitted when requested") {
    const std::string path = "sim_events_test.csv";
    SimConfig config{mm_inf(1.0, 1.0, 0.5), 1.0, {1.0}, 5, 17, 0, path};
    simulate_transient(config);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "replication,event_time,event_type,class,N_after,M_after");
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows > 0);
    in.close();
    std::remove(path.c_str());
}

TEST_CASE("sparse deterministic busy periods last one service") {
    SimConfig config{md_inf(1e-3, 1.0, 0.0), 0.0, {}, 0, 31, 10000,
                     std::nullopt};
    auto summary = simulate_busy(config);
    REQUIRE(summary.busy_periods.size() == 10000);
    double mean = 0.0;
    for (double x : summary.busy_periods) mean += x;
    mean /= double(summary.busy_periods.size());
    CHECK(mean >= 0.99);
    CHECK(mean <= 1.01);
}

TEST_CASE("idle periods are exponential with the arrival rate") {
    SimConfig config{mm_inf(2.0, 1.0, 1.0), 0.0, {}, 0, 13, 20000,
                     std::nullopt};
    auto summary = simulate_busy(config);
    double mean = 0.0, sq = 0.0;
    for (double x : summary.idle_periods) {
        mean += x;
        sq += x * x;
    }
    const double n = double(summary.idle_periods.size());
    mean /= n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.5) <= 3.0 * se);
}

TEST_CASE("busy cycles decompose into busy plus idle") {
    SimConfig config{mm_inf(1.0, 1.0, 0.5), 0.0, {}, 0, 19, 500, std::nullopt};
    auto summary = simulate_busy(config);
    REQUIRE(summary.busy_cycles.size() == summary.busy_periods.size());
    REQUIRE(summary.busy_cycles.size() == summary.idle_periods.size());
    for (std::size_t i = 0; i < summary.busy_cycles.size(); ++i)
        CHECK(summary.busy_cycles[i] ==
              doctest::Approx(summary.busy_periods[i] +
                              summary.idle_periods[i])
                  .epsilon(1e-12));
}

TEST_CASE("empirical lst") {
    std::vector<double> samples{1.0, 2.0};
    auto [mean, se] = empirical_lst(samples, 1.0);
    CHECK(mean ==
          doctest::Approx(0.5 * (std::exp(-1.0) + std::exp(-2.0))));
    CHECK(se > 0.0);
}

TEST_CASE("service sampling matches the law's mean") {
    std::vector<ServiceDistribution> laws{
        ServiceDistribution::deterministic(1.5),
        ServiceDistribution::exponential(2.0),
        ServiceDistribution::erlang(3, 2.0),
        ServiceDistribution::hyperexponential({0.4, 0.6}, {0.5, 3.0}),
        ServiceDistribution::empirical({0.5, 2.0}, {0.4, 1.0})};
    for (const auto& law : laws) {
        auto rng = Rng::stream(99, 0);
        double sum = 0.0, sq = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double x = sample_service(law, rng);
            sum += x;
            sq += x * x;
        }
        const double mean = sum / n;
        const double se =
            std::sqrt((sq / n - mean * mean) / double(n)) + 1e-9;
        CHECK(std::abs(mean - law.mean()) <= 4.0 * se);
    }
}
