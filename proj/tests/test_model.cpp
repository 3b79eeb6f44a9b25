#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cataq/model.hpp"
#include "cataq/quadrature.hpp"

using namespace cataq;

TEST_CASE("deterministic survival") {
    auto d = ServiceDistribution::deterministic(1.0);
    CHECK(d.survival(0.5) == 1.0);
    CHECK(d.survival(1.5) == 0.0);
    CHECK(d.mean() == doctest::Approx(1.0));
}

TEST_CASE("exponential survival") {
    auto d = ServiceDistribution::exponential(1.0);
    CHECK(d.survival(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("erlang mean and integrated survival") {
    auto d = ServiceDistribution::erlang(2, 2.0);
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-12));
    auto direct = integrate([&](double x) { return d.survival(x); }, 0.0, 40.0,
                            1e-12);
    CHECK(d.integrated_survival(40.0) ==
          doctest::Approx(direct.value).epsilon(1e-10));
}

TEST_CASE("hyperexponential mean") {
    auto d = ServiceDistribution::hyperexponential({0.3, 0.7}, {1.0, 2.0});
    CHECK(d.mean() == doctest::Approx(0.3 / 1.0 + 0.7 / 2.0).epsilon(1e-12));
    CHECK(d.cdf(-1.0) == 0.0);
}

TEST_CASE("empirical cdf interpolates and caps at one") {
    auto d = ServiceDistribution::empirical({1.0, 2.0}, {0.5, 1.0});
    CHECK(d.cdf(0.5) == doctest::Approx(0.25));
    CHECK(d.cdf(1.5) == doctest::Approx(0.75));
    CHECK(d.cdf(2.0) == 1.0);
    CHECK(d.cdf(3.0) == 1.0);
}

TEST_CASE("integrated survival matches quadrature for every law") {
    std::vector<ServiceDistribution> laws{
        ServiceDistribution::deterministic(1.5),
        ServiceDistribution::exponential(0.7),
        ServiceDistribution::erlang(3, 2.0),
        ServiceDistribution::hyperexponential({0.4, 0.6}, {0.5, 3.0}),
        ServiceDistribution::empirical({0.5, 2.0}, {0.4, 1.0})};
    for (const auto& law : laws) {
        auto bps = law.breakpoints();
        for (double tau : {0.3, 1.0, 2.5}) {
            auto q = integrate([&](double x) { return law.survival(x); }, 0.0,
                               tau, 1e-12, bps);
            CHECK(law.integrated_survival(tau) ==
                  doctest::Approx(q.value).epsilon(1e-9));
        }
    }
}

TEST_CASE("rate function cumulative") {
    auto r = RateFunction::piecewise({0.0, 1.0}, {1.0, 2.0});
    CHECK(r.cumulative(0.0) == 0.0);
    CHECK(r.cumulative(2.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.value(0.5) == 1.0);
    CHECK(r.value(1.0) == 2.0);
    CHECK(r.max_value(5.0) == 2.0);
    CHECK_THROWS_AS(RateFunction::piecewise({0.5, 1.0}, {1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RateFunction::constant(-1.0), std::invalid_argument);
}

TEST_CASE("batch pgf") {
    CHECK(BatchLaw::single().pgf1(0.3) == doctest::Approx(0.3));

    // Geometric(p=0.5) truncated at 50: mass 2^-51 < 1e-12 is recorded.
    std::map<int, double> geo;
    double total = 0.0;
    for (int n = 1; n <= 50; ++n) {
        geo[n] = std::pow(0.5, n);
        total += geo[n];
    }
    geo[50] += 1.0 - total;
    auto g = BatchLaw::univariate(geo);
    CHECK(g.pgf1(1.0) == doctest::Approx(1.0).epsilon(1e-12));

    auto m = BatchLaw::multivariate({{{1, 0}, 0.5}, {{0, 1}, 0.5}});
    const double arg[] = {0.2, 0.4};
    CHECK(m.pgf<double>(arg) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("batch masses must sum to one") {
    CHECK_THROWS_AS(BatchLaw::univariate({{1, 0.6}, {2, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(BatchLaw::univariate({{1, 0.9}}), std::invalid_argument);
}

TEST_CASE("model spec invariants") {
    CustomerClass plain{RateFunction::constant(1.0),
                        ServiceDistribution::exponential(1.0),
                        BatchLaw::single()};
    ModelSpec spec({plain}, RateFunction::constant(0.5));
    CHECK(spec.num_classes() == 1);
    CHECK(spec.is_plain_single_class());
    CHECK(spec.total_arrival_rate() == doctest::Approx(1.0));

    // Shared multivariate batches exclude per-class batch laws.
    CustomerClass batched{RateFunction::constant(1.0),
                          ServiceDistribution::exponential(1.0),
                          BatchLaw::univariate({{1, 0.5}, {2, 0.5}})};
    ModelSpec::SharedBatch shared{
        RateFunction::constant(1.0),
        BatchLaw::multivariate({{{1, 0}, 0.5}, {{0, 1}, 0.5}})};
    CHECK_THROWS_AS(
        ModelSpec({batched, plain}, RateFunction::constant(0.1), shared),
        std::invalid_argument);
}

TEST_CASE("mark vectors validate dimension and range") {
    MarkVector ok = MarkVector::ones(2);
    ok.validate(2);
    MarkVector bad{{0.5}, {1.0, 1.0}};
    CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
    MarkVector out_of_range{{1.5}, {1.0}};
    CHECK_THROWS_AS(out_of_range.validate(1), std::invalid_argument);
}
