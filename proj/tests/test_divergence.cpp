#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dmpi/divergence.hpp"
#include "dmpi/numeric.hpp"
#include "dmpi/rng.hpp"
#include "exact_polya.hpp"

using namespace dmpi;

namespace {

// largest-remainder rounding of frequencies to integer counts
CountVector counts_from_freq(const std::vector<double>& freq, std::int64_t total) {
    CountVector c;
    c.counts.resize(freq.size());
    c.total = total;
    std::vector<std::pair<double, std::size_t>> rem;
    std::int64_t assigned = 0;
    for (std::size_t k = 0; k < freq.size(); ++k) {
        const double raw = freq[k] * static_cast<double>(total);
        c.counts[k] = static_cast<std::int64_t>(std::floor(raw));
        assigned += c.counts[k];
        rem.push_back({raw - std::floor(raw), k});
    }
    std::sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::int64_t i = 0; i < total - assigned; ++i)
        ++c.counts[rem[static_cast<std::size_t>(i)].second];
    return c;
}

std::vector<double> random_mass(int k, Rng& rng) {
    std::vector<double> m(static_cast<std::size_t>(k));
    double s = 0.0;
    for (auto& v : m) {
        v = rng.uniform01() + 1e-3;
        s += v;
    }
    for (auto& v : m) v /= s;
    return m;
}

} // namespace

TEST_CASE("polya_log_marginal matches hand-computed ratios") {
    CHECK(polya_log_marginal({{1, 0}, 1}, std::vector<double>{1.0, 1.0}) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(polya_log_marginal({{0, 0, 0}, 0}, std::vector<double>{2.0, 3.0, 4.0}) ==
          doctest::Approx(0.0));
    CHECK(polya_log_marginal({{2, 1}, 3}, std::vector<double>{2.0, 1.0}) ==
          doctest::Approx(std::log(0.3)).epsilon(1e-12));
    CHECK_THROWS_WITH_AS(polya_log_marginal({{1, 0}, 1}, std::vector<double>{1.0}),
                         doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("polya_log_marginal agrees with the exact integer oracle") {
    Rng rng(7001);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform01() * 3);
        std::vector<std::int64_t> n(static_cast<std::size_t>(k)), a(static_cast<std::size_t>(k));
        CountVector cv;
        cv.total = 0;
        for (int j = 0; j < k; ++j) {
            n[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(rng.uniform01() * 6);
            a[static_cast<std::size_t>(j)] = 1 + static_cast<std::int64_t>(rng.uniform01() * 6);
            cv.total += n[static_cast<std::size_t>(j)];
        }
        cv.counts = n;
        std::vector<double> alpha(a.begin(), a.end());
        CHECK(polya_log_marginal(cv, alpha) ==
              doctest::Approx(dmpi_test::exact_polya_log(n, a)).epsilon(1e-12));
    }
}

TEST_CASE("kl_divergence") {
    CHECK(kl_divergence(MassVector{0.5, 0.5}, MassVector{0.5, 0.5}) == 0.0);
    CHECK(kl_divergence(MassVector{1.0, 0.0}, MassVector{0.5, 0.5}) ==
          doctest::Approx(std::log(2.0)));
    CHECK(kl_divergence(MassVector{0.5, 0.5}, MassVector{1.0, 0.0}) == pos_inf);
}

TEST_CASE("js_divergence_weighted") {
    const JsWeights w1{1.0, 10};
    CHECK(js_divergence_weighted(MassVector{0.3, 0.7}, MassVector{0.3, 0.7}, w1) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(js_divergence_weighted(MassVector{1.0, 0.0}, MassVector{0.0, 1.0}, w1) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // vanishing theory weight: the divergence collapses (rate lambda*ln(1/lambda))
    const JsWeights tiny{1e-9, 10};
    CHECK(js_divergence_weighted(MassVector{1.0, 0.0}, MassVector{0.5, 0.5}, tiny) <= 5e-8);
    // nonnegative on random pairs, zero only at coincidence
    Rng rng(7002);
    for (int t = 0; t < 100; ++t) {
        const auto z = random_mass(6, rng);
        const auto q = random_mass(6, rng);
        const JsWeights w{std::exp(rng.uniform(-3.0, 3.0)), 100};
        CHECK(js_divergence_weighted(z, q, w) >= 0.0);
        CHECK(js_divergence_weighted(z, q, w) > 1e-8); // distinct masses separate
    }
}

TEST_CASE("js_log_likelihood peaks at ln N and tracks the exact marginal") {
    const MassVector z{0.25, 0.5, 0.25};
    CHECK(js_log_likelihood(z, z, JsWeights{0.7, 50000}) ==
          doctest::Approx(std::log(50000.0)).epsilon(1e-9));

    // Stirling-band agreement with the exact marginal at matched counts
    Rng rng(7003);
    const int k = 20;
    const double delta = 1.0;
    const auto zf = random_mass(k, rng);
    const auto qf = random_mass(k, rng);
    double prev_scaled = pos_inf;
    for (const auto& [nn, mm] : std::vector<std::pair<std::int64_t, std::int64_t>>{
             {1000, 500}, {10000, 5000}}) {
        const CountVector n = counts_from_freq(zf, nn);
        const CountVector m = counts_from_freq(qf, mm);
        const Concentrations conc = dirichlet_concentrations(m, delta);
        const MassVector q = conc.mass();
        const double lambda = conc.scale / static_cast<double>(nn);
        const double approx =
            js_log_likelihood(relative_frequencies(n), q, JsWeights{lambda, nn});
        const double exact = polya_log_marginal(n, conc.alpha);
        const double scaled = std::abs(exact - approx) / static_cast<double>(nn);
        CHECK(scaled < 0.1);
        CHECK(scaled < prev_scaled); // error shrinks as both samples scale up
        prev_scaled = scaled;
    }
}

TEST_CASE("js_log_likelihood_kl_limit") {
    const MassVector z{0.5, 0.5};
    CHECK(js_log_likelihood_kl_limit(z, z, 10) == doctest::Approx(std::log(10.0)));
    CHECK(js_log_likelihood_kl_limit(z, MassVector{0.25, 0.75}, 10) ==
          doctest::Approx(0.8641747307351410).epsilon(1e-12));
    CHECK(js_log_likelihood_kl_limit(MassVector{0.5, 0.5}, MassVector{1.0, 0.0}, 10) == neg_inf);

    // large-lambda JS likelihood approaches the hard-restriction form
    Rng rng(7004);
    const auto z2 = random_mass(20, rng);
    const auto q2 = random_mass(20, rng);
    const std::int64_t n = 1000;
    const double a = js_log_likelihood(z2, q2, JsWeights{1e8, n});
    const double b = js_log_likelihood_kl_limit(z2, q2, n);
    CHECK(std::abs(a - b) < 1e-4);
}

TEST_CASE("single_draw_log_predictive") {
    CHECK(single_draw_log_predictive(0, {{3, 7}, 10}, 1.0, 2) ==
          doctest::Approx(std::log(5.0 / 13.0)).epsilon(1e-12));
    // uniform counts: identical value in every bin
    const CountVector u{{25, 25, 25, 25}, 100};
    const double v0 = single_draw_log_predictive(0, u, 0.5, 4);
    for (int k = 1; k < 4; ++k) CHECK(single_draw_log_predictive(k, u, 0.5, 4) == v0);
    CHECK(v0 == doctest::Approx(std::log((25.0 + 0.5 + 1.0) / (100.0 + 2.0 + 1.0))));
    // large-N limit: predictive mass approaches the empirical frequency
    const std::int64_t big = 1000000;
    const CountVector big_counts{{big / 4, 3 * big / 4}, big};
    CHECK(single_draw_log_predictive(1, big_counts, 1.0, 2) ==
          doctest::Approx(std::log(0.75)).epsilon(1e-4));
    CHECK_THROWS_AS(single_draw_log_predictive(5, u, 1.0, 4), Error);
}

TEST_CASE("predictive_mass") {
    CHECK(predictive_mass(0, {{0, 0}, 0}, std::vector<double>{1.0, 1.0}) == doctest::Approx(0.5));
    const CountVector n{{9, 1}, 10};
    const std::vector<double> alpha{1.0, 1.0};
    CHECK(predictive_mass(0, n, alpha) == doctest::Approx(10.0 / 12.0));
    CHECK(predictive_mass(1, n, alpha) == doctest::Approx(2.0 / 12.0));
    // normalizes over bins and is strictly positive
    Rng rng(7005);
    for (int t = 0; t < 20; ++t) {
        const int k = 3 + static_cast<int>(rng.uniform01() * 4);
        CountVector cv;
        cv.counts.resize(static_cast<std::size_t>(k));
        cv.total = 0;
        std::vector<double> a(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            cv.counts[static_cast<std::size_t>(j)] =
                static_cast<std::int64_t>(rng.uniform01() * 8);
            cv.total += cv.counts[static_cast<std::size_t>(j)];
            a[static_cast<std::size_t>(j)] = 0.5 + rng.uniform01() * 3.0;
        }
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            const double p = predictive_mass(j, cv, a);
            CHECK(p > 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("js_log_prior") {
    const MassVector xi{0.7, 0.3};
    CHECK(js_log_prior(xi, xi, PriorWeights{0.001, 10000}) ==
          doctest::Approx(std::log(10000.0)).epsilon(1e-9));

    // single-draw collection concentrated in the modal bin (frozen oracle value)
    CHECK(js_log_prior(xi, MassVector{1.0, 0.0}, PriorWeights{1e-4, 10000}) ==
          doctest::Approx(8.853686854874345).epsilon(1e-12));

    // at fixed tau the divergence penalty is linear in H
    const MassVector om{0.6, 0.4};
    const double tau = 0.01;
    const double pen1 = std::log(10000.0) - js_log_prior(xi, om, PriorWeights{tau, 10000});
    const double pen10 = std::log(100000.0) - js_log_prior(xi, om, PriorWeights{tau, 100000});
    CHECK(pen10 == doctest::Approx(10.0 * pen1).epsilon(1e-10));

    // zero-zero bins contribute nothing; the value never exceeds ln H
    CHECK(js_log_prior(MassVector{0.7, 0.3, 0.0}, MassVector{1.0, 0.0, 0.0},
                       PriorWeights{1e-4, 10000}) ==
          doctest::Approx(8.853686854874345).epsilon(1e-12));
    Rng rng(7006);
    for (int t = 0; t < 50; ++t) {
        const auto a = random_mass(5, rng);
        const auto b = random_mass(5, rng);
        CHECK(js_log_prior(a, b, PriorWeights{0.05, 2000}) <= std::log(2000.0) + 1e-9);
    }
}
