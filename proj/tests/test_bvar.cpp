#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dmpi/bvar.hpp"
#include "dmpi/numeric.hpp"

using namespace dmpi;

namespace {

const NkpcParams truth{0.98, 0.8, 0.8, 0.001, 0.00025};

// diffuse relative to the calibration's tiny innovation variances
const NiwHyper diffuse{0.0, 1e-8, 1e-10, 5.0};

struct Ols {
    double a[2][2];
    double s11, s12, s22;
};

Ols ols_fit(const std::vector<std::array<double, 2>>& y) {
    double xx00 = 0, xx01 = 0, xx11 = 0, xy[2][2] = {{0, 0}, {0, 0}};
    const std::size_t t_eff = y.size() - 1;
    for (std::size_t t = 0; t < t_eff; ++t) {
        xx00 += y[t][0] * y[t][0];
        xx01 += y[t][0] * y[t][1];
        xx11 += y[t][1] * y[t][1];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) xy[i][j] += y[t][j] * y[t + 1][i];
    }
    const double det = xx00 * xx11 - xx01 * xx01;
    Ols o{};
    for (int i = 0; i < 2; ++i) {
        o.a[i][0] = (xy[i][0] * xx11 - xy[i][1] * xx01) / det;
        o.a[i][1] = (xy[i][1] * xx00 - xy[i][0] * xx01) / det;
    }
    for (std::size_t t = 0; t < t_eff; ++t) {
        const double e0 = y[t + 1][0] - o.a[0][0] * y[t][0] - o.a[0][1] * y[t][1];
        const double e1 = y[t + 1][1] - o.a[1][0] * y[t][0] - o.a[1][1] * y[t][1];
        o.s11 += e0 * e0;
        o.s12 += e0 * e1;
        o.s22 += e1 * e1;
    }
    o.s11 /= static_cast<double>(t_eff);
    o.s12 /= static_cast<double>(t_eff);
    o.s22 /= static_cast<double>(t_eff);
    return o;
}

} // namespace

TEST_CASE("posterior concentrates on the least-squares fit") {
    Rng sim_rng(301);
    const auto y = simulate_series(truth, ModelVariant::CorrectFullRank, 100000, 500, sim_rng);
    const Ols o = ols_fit(y);

    Rng rng(302);
    const std::int64_t n = 4000;
    const auto draws = posterior_sample_var(y, diffuse, n, rng);
    REQUIRE(draws.size() == static_cast<std::size_t>(n));

    double mean_a22 = 0.0, mean_a12 = 0.0, mean_s11 = 0.0, mean_s12 = 0.0, mean_s22 = 0.0;
    for (const auto& d : draws) {
        mean_a12 += d.coef[0][1];
        mean_a22 += d.coef[1][1];
        mean_s11 += d.s11;
        mean_s12 += d.s12;
        mean_s22 += d.s22;
    }
    const double dn = static_cast<double>(n);
    mean_a12 /= dn;
    mean_a22 /= dn;
    mean_s11 /= dn;
    mean_s12 /= dn;
    mean_s22 /= dn;

    CHECK(std::abs(mean_a22 - 0.8) < 0.01);
    CHECK(std::abs(mean_a22 - o.a[1][1]) < 0.01);

    auto sd_of = [&](auto getter) {
        double m = 0.0, s = 0.0;
        for (const auto& d : draws) m += getter(d);
        m /= dn;
        for (const auto& d : draws) s += (getter(d) - m) * (getter(d) - m);
        return std::sqrt(s / (dn - 1.0));
    };
    CHECK(std::abs(mean_a12 - o.a[0][1]) <
          3.0 * sd_of([](const VarDraw& d) { return d.coef[0][1]; }));
    CHECK(std::abs(mean_s11 - o.s11) < 3.0 * sd_of([](const VarDraw& d) { return d.s11; }));
    CHECK(std::abs(mean_s12 - o.s12) < 3.0 * sd_of([](const VarDraw& d) { return d.s12; }));
    CHECK(std::abs(mean_s22 - o.s22) < 3.0 * sd_of([](const VarDraw& d) { return d.s22; }));
}

TEST_CASE("every posterior covariance draw is symmetric positive definite") {
    Rng sim_rng(303);
    const auto y = simulate_series(truth, ModelVariant::CorrectFullRank, 2000, 500, sim_rng);
    Rng rng(304);
    VarSampleDiagnostics diag;
    const auto draws = posterior_sample_var(y, diffuse, 2000, rng, &diag);
    for (const auto& d : draws) {
        CHECK(d.s11 > 0.0);
        CHECK(d.s22 > 0.0);
        CHECK(d.s11 * d.s22 - d.s12 * d.s12 > 0.0);
    }
    CHECK(diag.pd_rejects == 0);
}

TEST_CASE("edge cases and determinism") {
    Rng sim_rng(305);
    const auto y = simulate_series(truth, ModelVariant::CorrectFullRank, 300, 100, sim_rng);

    Rng r1(306), r2(306);
    const auto d1 = posterior_sample_var(y, diffuse, 100, r1);
    const auto d2 = posterior_sample_var(y, diffuse, 100, r2);
    REQUIRE(d1.size() == d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
        CHECK(d1[i].coef == d2[i].coef);
        CHECK(d1[i].s11 == d2[i].s11);
    }

    Rng r3(307);
    CHECK(posterior_sample_var(y, diffuse, 0, r3).empty());

    // constant series: the lagged design is singular
    const std::vector<std::array<double, 2>> flat(50, {1.0, 1.0});
    CHECK_THROWS_WITH_AS(posterior_sample_var(flat, diffuse, 10, r3),
                         doctest::Contains("DegenerateDesign"), Error);
}

TEST_CASE("draw_to_moments extracts the five entries") {
    VarDraw d;
    d.coef = {{{0.0, 0.16}, {0.0, 0.8}}};
    d.s11 = 1.25e-7;
    d.s12 = 2.5e-7;
    d.s22 = 1e-6;
    const MomentVector m = draw_to_moments(d);
    CHECK(m == MomentVector{0.16, 0.8, 1.25e-7, 2.5e-7, 1e-6});

    VarDraw ident;
    ident.coef = {{{0.3, 0.1}, {0.2, 0.7}}};
    ident.s11 = 1.0;
    ident.s12 = 0.0;
    ident.s22 = 1.0;
    const MomentVector mi = draw_to_moments(ident);
    CHECK(mi[2] == 1.0);
    CHECK(mi[3] == 0.0);
    CHECK(mi[4] == 1.0);
}

TEST_CASE("build_empirical_panel fixes totals and reports clamps") {
    Rng sim_rng(308);
    const auto y = simulate_series(truth, ModelVariant::CorrectFullRank, 300, 100, sim_rng);
    Rng rng(309);
    const auto draws = posterior_sample_var(y, diffuse, 500, rng);

    std::vector<SupportGrid> grids = {
        {0.0, 2.0, 20}, {0.0, 2.0, 20}, {0.0, 5e-7, 20}, {0.0, 1e-6, 20}, {0.0, 5e-6, 20}};
    const MomentPanel p = build_empirical_panel(draws, grids);
    for (const auto& c : p.counts) {
        CHECK(c.total == 500);
        std::int64_t sum = 0;
        for (auto v : c.counts) sum += v;
        CHECK(sum == 500);
    }

    // deliberately narrow support: the clamp counter must fire
    std::vector<SupportGrid> narrow = grids;
    narrow[1] = {0.79, 0.81, 20};
    const MomentPanel pn = build_empirical_panel(draws, narrow);
    CHECK(pn.clamps.clamped() > 0);

    // identical draws give one-bin histograms
    const std::vector<VarDraw> same(10, draws.front());
    const MomentPanel ps = build_empirical_panel(same, grids);
    for (const auto& c : ps.counts)
        CHECK(*std::max_element(c.counts.begin(), c.counts.end()) == 10);
}
