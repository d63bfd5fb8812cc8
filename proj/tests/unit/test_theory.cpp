#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "rgg/error.hpp"
#include "rgg/theory.hpp"

using namespace rgg;

namespace {
const double kE100 = std::exp(100.0);
}

TEST_CASE("light-tail radii") {
    const auto g = DensitySpec::gaussian(2);
    const auto radii = light_tail_radii(g, kE100);
    CHECK(radii.r0 == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(std::abs(radii.r1 - 9.857022) < 1e-6);
    CHECK(w_of_n(kE100) == doctest::Approx(std::sqrt(std::log(100.0))));
    CHECK_THROWS_AS(light_tail_radii(g, 15.0), UsageError);
    CHECK_THROWS_AS(light_tail_radii(DensitySpec::heavy_tail(2, 4), 1e4), UsageError);

    for (const auto& spec : {g, DensitySpec::light_tail(3, 0.5), DensitySpec::light_tail(2, 1.0, 2.0),
                             DensitySpec::light_tail(3, 3.0)}) {
        for (double n : {16.0, 1e3, 1e6, kE100}) {
            const auto r = light_tail_radii(spec, n);
            CHECK(psi(spec, r.r0) == doctest::Approx(std::log(n)).epsilon(1e-9));
            const auto rep = classify(spec, n, 0.5);
            const bool flagged =
                std::find(rep.flags.begin(), rep.flags.end(), "PreAsymptotic") != rep.flags.end();
            CHECK((r.r0 <= r.r1 || flagged));
        }
    }
}

TEST_CASE("heavy-tail radii") {
    CHECK(heavy_tail_radii(DensitySpec::heavy_tail(2, 4.0), 1e6).r0 == doctest::Approx(100.0).epsilon(1e-12));
    const auto r = heavy_tail_radii(DensitySpec::heavy_tail(2, 3.0), 1e4);
    CHECK(r.r0 == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(r.r1 == r.r0);
    // n^{1/(alpha-d/2)} grows faster than n^{1/(alpha - eps)} for eps < d/2 and
    // slower than n^{1/(alpha + eps' - d)} for eps' = d/4.
    for (double alpha : {2.5, 3.0, 4.0, 7.0}) {
        const double d = 2.0;
        const double exponent = 1.0 / (alpha - d / 2.0);
        CHECK(exponent > 1.0 / alpha);
        CHECK(exponent < 1.0 / (alpha - 3.0 * d / 4.0));
    }
}

TEST_CASE("superexponential threshold tau") {
    const auto g = DensitySpec::gaussian(2);
    CHECK(std::abs(tau(g, kE100) - 0.23025851) < 1e-8);
    for (double log_n : {1e2, 1e3, 1e4, 1e5}) {
        const double n = std::exp(std::min(log_n, 700.0));
        const double ln = std::log(n);
        CHECK(tau(g, n) * std::sqrt(ln) / std::log(ln) == doctest::Approx(0.5).epsilon(1e-12));
    }
    double prev = tau(g, 1e6);
    for (double n = 2e6; n < 1e300; n *= 10.0) {
        const double t = tau(g, n);
        CHECK(t < prev);
        prev = t;
    }
    CHECK_THROWS_AS(tau(DensitySpec::light_tail(2, 1.0), 1e4), UsageError);
    CHECK_THROWS_AS(tau(DensitySpec::light_tail(2, 0.5), 1e4), UsageError);
    CHECK_THROWS_AS(tau(g, 10.0), UsageError);
}

TEST_CASE("Chernoff function and Poisson bounds") {
    CHECK(chernoff_h(1.0) == 0.0);
    CHECK(chernoff_h(0.0) == 1.0);
    CHECK(chernoff_h(2.0) == doctest::Approx(0.38629436).epsilon(1e-8));
    CHECK_THROWS_AS(chernoff_h(-0.1), UsageError);
    CHECK(poisson_tail_bound(50.0, 50.0, TailSide::Upper) == 1.0);
    CHECK(poisson_tail_bound(50.0, 50.0, TailSide::Lower) == 1.0);
    const double b = poisson_tail_bound(100.0, 200.0, TailSide::Upper);
    CHECK(b == doctest::Approx(std::exp(-38.629436)).epsilon(1e-6));
    CHECK(b == doctest::Approx(1.66e-17).epsilon(0.01));
    CHECK_THROWS_AS(poisson_tail_bound(100.0, 50.0, TailSide::Upper), UsageError);
    CHECK_THROWS_AS(poisson_tail_bound(100.0, 150.0, TailSide::Lower), UsageError);

    for (double n : {10.0, 100.0}) {
        const auto draws = oracle::poisson_draws(n, 100000, 3);
        for (double ratio : {1.2, 1.5, 2.0}) {
            const double k = ratio * n;
            const double p = std::count_if(draws.begin(), draws.end(), [k](auto x) { return x >= k; }) / 1e5;
            CHECK(p <= poisson_tail_bound(n, k, TailSide::Upper));
        }
        for (double ratio : {0.5, 0.8}) {
            const double k = ratio * n;
            const double p = std::count_if(draws.begin(), draws.end(), [k](auto x) { return x <= k; }) / 1e5;
            CHECK(p <= poisson_tail_bound(n, k, TailSide::Lower));
        }
    }
}

TEST_CASE("expected isolated vertices") {
    const auto g = DensitySpec::gaussian(2);
    CHECK(expected_isolated(g, 0.0, 0.1, 2.0) == 0.0);
    CHECK(expected_isolated(g, 1e-9, 0.1, 2.0) < 1e-8);
    // A narrow bulk inside a wide probing ball: every ball has mass ~ 1.
    const auto narrow = DensitySpec::light_tail(2, 2.0, 0.05);
    const double n = 5.0;
    const double expected = n * (1.0 - tail_mass(narrow, 0.1)) * std::exp(-n);
    CHECK(expected_isolated(narrow, n, 1.0, 0.1) == doctest::Approx(expected).epsilon(1e-6));

    double prev = std::numeric_limits<double>::infinity();
    for (double r : {0.02, 0.05, 0.1, 0.2, 0.5}) {
        const double e = expected_isolated(g, 1e4, r, 3.0);
        CHECK(e < prev);
        prev = e;
    }
    prev = 0.0;
    for (double R : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const double e = expected_isolated(g, 1e4, 0.05, R);
        CHECK(e > prev);
        prev = e;
    }
    CHECK_THROWS_AS(expected_isolated(g, 10.0, 0.0, 1.0), UsageError);
}

TEST_CASE("tail emptiness") {
    const auto g = DensitySpec::gaussian(2);
    CHECK(tail_empty_prob(g, 7.0, 0.0) == doctest::Approx(std::exp(-7.0)).epsilon(1e-10));
    CHECK(tail_empty_prob(g, 7.0, std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(tail_empty_prob(g, 1e3, 3.0) == doctest::Approx(0.8839).epsilon(1e-4));
    CHECK(tail_empty_prob(g, 1e3, 3.0) == doctest::Approx(std::exp(-1000.0 * std::exp(-9.0))).epsilon(1e-9));
}

TEST_CASE("concentration radii") {
    const auto g = DensitySpec::gaussian(2);
    const auto c = concentration_radii(g, kE100, 1.0, 0.5);
    CHECK(c.delta == doctest::Approx(std::log(6.0 * std::numbers::pi) + 1.0).epsilon(1e-14));
    CHECK(2.0 - g.norm_constant() * std::exp(c.delta) / 3.0 == doctest::Approx(2.0 - 2.0 * std::exp(1.0)));
    CHECK(std::abs(c.a_n - 92.1937) < 1e-4);
    CHECK(std::abs(c.r0 - 9.6018) < 1e-4);
    CHECK(c.r1 >= c.r0);
    CHECK_FALSE(c.pre_asymptotic);

    double prev = std::numeric_limits<double>::infinity();
    for (double log_n : {50.0, 100.0, 200.0}) {
        const auto cr = concentration_radii(g, std::exp(log_n), 1.0, 0.5);
        CHECK(cr.r1 >= cr.r0);
        CHECK(cr.r1 - cr.r0 < prev);
        prev = cr.r1 - cr.r0;
    }
    CHECK(concentration_radii(g, 1e3, 0.1, 0.5).pre_asymptotic);
    CHECK_THROWS_AS(concentration_radii(g, kE100, 1.0, 1.5), UsageError);
    CHECK_THROWS_AS(concentration_radii(DensitySpec::light_tail(2, 1.0), kE100, 1.0, 0.5), UsageError);
}

TEST_CASE("classification rules") {
    const auto heavy = DensitySpec::heavy_tail(2, 4.0);
    for (double n : {10.0, 1e4, 1e8}) {
        const auto rep = classify(heavy, n, 1.0);
        CHECK(rep.prediction == Prediction::DisconnectedWhp);
        CHECK(rep.regime == Regime::HeavyTail);
    }
    CHECK(classify(DensitySpec::light_tail(2, 0.5), 1e5, 1.0).prediction == Prediction::DisconnectedWhp);

    const auto g = DensitySpec::gaussian(2);
    const double t = tau(g, kE100);
    CHECK(classify(g, kE100, 0.1 * t).prediction == Prediction::DisconnectedWhp);
    CHECK(classify(g, kE100, 10.0 * t).prediction == Prediction::ConcentrationRegime);
    CHECK(classify(g, kE100, t).prediction == Prediction::Untheorized);

    const auto expo = DensitySpec::light_tail(2, 1.0);
    CHECK(classify(expo, 1e4, 0.5).prediction == Prediction::DisconnectedWhp);
    ClassifyOptions tight;
    tight.k_exp = 0.1;
    CHECK(classify(expo, 1e4, 0.5, std::nullopt, tight).prediction == Prediction::Untheorized);

    const auto big = classify(g, 1e4, 1.5);
    CHECK(std::find(big.flags.begin(), big.flags.end(), "RadiusAboveOne") != big.flags.end());
}

TEST_CASE("report serialisation") {
    const auto rep = classify(DensitySpec::gaussian(2), 1e6, 0.05, 0.5);
    const auto j = to_json(rep);
    for (const char* key : {"r0", "r1", "tau", "prediction", "expected_isolated", "tail_empty_prob", "a_n", "b_n"}) {
        CHECK(j.contains(key));
    }
    CHECK(j.at("prediction") == "DisconnectedWhp");
    CHECK(j.at("options").at("c_lo") == 0.5);
    const auto table = to_table(rep);
    CHECK(table.find("tau") != std::string::npos);
    CHECK(table.find("DisconnectedWhp") != std::string::npos);
    const auto heavy = to_json(classify(DensitySpec::heavy_tail(2, 4.0), 1e4, 1.0));
    CHECK(heavy.at("tau").is_null());
}
