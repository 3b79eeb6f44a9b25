#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cataq/busy.hpp"
#include "cataq/quadrature.hpp"

using namespace cataq;

namespace {

ModelSpec mg_inf(double lambda, ServiceDistribution service, double nu) {
    return ModelSpec({{RateFunction::constant(lambda), std::move(service),
                       BatchLaw::single()}},
                     RateFunction::constant(nu));
}

ModelSpec md_inf(double lambda, double b, double nu) {
    return mg_inf(lambda, ServiceDistribution::deterministic(b), nu);
}

}  // namespace

TEST_CASE("no arrivals keeps the system always idle") {
    auto spec = mg_inf(0.0, ServiceDistribution::exponential(1.0), 0.5);
    for (double s : {0.5, 1.0, 2.0})
        CHECK(lt_idle(spec, s).value == doctest::Approx(1.0 / s).epsilon(1e-8));
}

TEST_CASE("deterministic idle transform closed form") {
    auto spec = md_inf(1.0, 1.0, 1.0);
    // (s + v + lam e^{-Wb}) / (sW) at s=1: (2 + e^{-3}) / 3.
    CHECK(lt_idle(spec, 1.0).value ==
          doctest::Approx((2.0 + std::exp(-3.0)) / 3.0).epsilon(1e-9));
    for (double s : {0.1, 1.0, 5.0}) {
        auto forms = md_closed_forms(spec, s);
        CHECK(lt_idle(spec, s).value ==
              doctest::Approx(forms.p0_tilde_derived).epsilon(1e-8));
    }
}

TEST_CASE("small-s limit of s times the idle transform") {
    auto spec = md_inf(1.0, 1.0, 1.0);
    auto forms = md_closed_forms(spec, 1.0);
    CHECK(forms.limit_reference ==
          doctest::Approx((1.0 + std::exp(-2.0)) / 2.0).epsilon(1e-12));
    CHECK(forms.limit_derived == doctest::Approx(forms.limit_reference));
    const double s = 1e-5;
    CHECK(s * lt_idle(spec, s).value ==
          doctest::Approx(forms.limit_reference).epsilon(1e-4));
}

TEST_CASE("transform shift identity") {
    // s P~0(s) = (v+s) p~0(v+s) across service laws.
    const double nu = 0.5;
    std::vector<ServiceDistribution> laws{
        ServiceDistribution::exponential(1.0),
        ServiceDistribution::deterministic(1.0),
        ServiceDistribution::erlang(2, 2.0)};
    for (const auto& law : laws) {
        auto with = mg_inf(1.0, law, nu);
        auto without = mg_inf(1.0, law, 0.0);
        for (double s : {0.25, 0.5, 1.0, 2.0}) {
            const double lhs = s * lt_idle(with, s).value;
            const double rhs = (nu + s) * lt_idle(without, nu + s).value;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
            CHECK(std::abs(lhs - rhs) <= 1e-8);
        }
    }
}

TEST_CASE("busy-period lst properties") {
    auto spec = md_inf(1.0, 1.0, 1.0);
    double prev = 1.0;
    for (double s : {1e-7, 0.5, 1.0, 2.0, 4.0}) {
        auto v = lst_busy_period(spec, s);
        CHECK(!v.flagged);
        CHECK(v.value <= prev + 1e-9);  // LSTs decrease in s
        CHECK(v.value >= 0.0);
        prev = v.value;
    }
    CHECK(lst_busy_period(spec, 1e-8).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("deterministic busy-period closed form") {
    auto spec = md_inf(1.0, 1.0, 1.0);
    for (double s : {0.25, 0.5, 1.0, 2.0}) {
        auto forms = md_closed_forms(spec, s);
        CHECK(lst_busy_period(spec, s).value ==
              doctest::Approx(forms.busy_lst).epsilon(1e-8));
    }
}

TEST_CASE("classical deterministic reduction without catastrophes") {
    auto spec = md_inf(1.0, 1.0, 0.0);
    for (double s : {0.5, 1.0, 2.0}) {
        const double expect =
            (1.0 + s) / (1.0 + s * std::exp((1.0 + s) * 1.0));
        CHECK(lst_busy_period(spec, s).value ==
              doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("classical reduction for general service") {
    // Without catastrophes the relation becomes the classical busy-period
    // transform built from the plain idle probability.
    auto spec = mg_inf(1.0, ServiceDistribution::exponential(1.0), 0.0);
    const double s = 1.0;
    auto denom = laplace_integral(
        [](double t) {
            return std::exp(-(1.0 - std::exp(-t)));  // p0 of M|M|inf
        },
        s, 1e-12);
    const double expect = 1.0 + (s - 1.0 / denom.value) / 1.0;
    CHECK(lst_busy_period(spec, s).value ==
          doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("busy cycle is the busy period damped by the idle factor") {
    auto spec = mg_inf(1.0, ServiceDistribution::exponential(1.0), 0.0);
    const double s = 1.0;
    CHECK(lst_busy_cycle(spec, s).value ==
          doctest::Approx(0.5 * lst_busy_period(spec, s).value)
              .epsilon(1e-10));
    CHECK(lst_busy_cycle(spec, 1e-8).value ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("batch and multi-class dispatchers coincide on plain models") {
    auto spec = mg_inf(1.0, ServiceDistribution::exponential(1.0), 0.5);
    for (double s : {0.5, 2.0}) {
        const double base = lst_busy_period(spec, s).value;
        CHECK(lst_busy_batch(spec, s).value ==
              doctest::Approx(base).epsilon(1e-10));
        CHECK(lst_busy_multiclass(spec, s).value ==
              doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("batch busy period is longer than the plain one") {
    ModelSpec batch({{RateFunction::constant(1.0),
                      ServiceDistribution::exponential(1.0),
                      BatchLaw::univariate({{1, 0.5}, {2, 0.5}})}},
                    RateFunction::constant(0.5));
    auto plain = mg_inf(1.0, ServiceDistribution::exponential(1.0), 0.5);
    const double s = 1.0;
    CHECK(lst_busy_batch(batch, s).value <
          lst_busy_period(plain, s).value);
    CHECK(lst_busy_batch(batch, 1e-8).value ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("busy moments against the closed form") {
    auto spec = md_inf(1.0, 1.0, 1.0);
    auto m = busy_moments(spec);
    const double expect = (std::exp(2.0) - 1.0) / (1.0 + std::exp(2.0));
    CHECK(m.mean_closed_form == doctest::Approx(expect).epsilon(1e-12));
    CHECK(m.mean == doctest::Approx(expect).epsilon(1e-4));
    CHECK(!m.flagged);
    CHECK(m.second_moment > m.mean * m.mean);
}

TEST_CASE("busy moments without catastrophes") {
    auto spec = md_inf(1.0, 1.0, 0.0);
    auto m = busy_moments(spec);
    CHECK(m.mean == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-4));
}

TEST_CASE("inverting an exponential transform") {
    auto lst = [](std::complex<double> s) { return 1.0 / (1.0 + s); };
    const double grid[] = {std::log(2.0)};
    auto df = invert_lst(lst, grid);
    CHECK(df[0].value == doctest::Approx(0.5).epsilon(1e-6));
    const double zero[] = {0.0};
    CHECK(invert_lst(lst, zero)[0].value == 0.0);
}

TEST_CASE("inverted busy-period distribution is a df") {
    auto spec = md_inf(1.0, 1.0, 1.0);
    std::vector<double> grid{0.25, 0.5, 0.75, 1.5, 2.0, 4.0};
    auto df = invert_lst(
        [&](std::complex<double> s) {
            return lst_busy_period_complex(spec, s);
        },
        grid);
    double prev = 0.0;
    for (const auto& p : df) {
        CHECK(!p.flagged);
        CHECK(p.value >= prev - 1e-9);
        CHECK(p.value <= 1.0 + 1e-6);
        prev = p.value;
    }
    // A deterministic(1) busy period is at least one service long, minus the
    // chance a catastrophe cut it short.
    CHECK(df.back().value > 0.9);
}

TEST_CASE("homogeneity is required") {
    ModelSpec spec({{RateFunction::constant(1.0),
                     ServiceDistribution::exponential(1.0),
                     BatchLaw::single()}},
                   RateFunction::piecewise({0.0, 1.0}, {0.5, 1.0}));
    CHECK_THROWS_AS(lst_busy_period(spec, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(lt_idle(spec, 1.0), std::invalid_argument);
    auto ok = mg_inf(1.0, ServiceDistribution::exponential(1.0), 0.5);
    CHECK_THROWS_AS(lst_busy_period(ok, -1.0), std::invalid_argument);
}
