#include "dmpi/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace dmpi {

namespace {

// series expansion of P(a,x), valid for x < a + 1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), valid for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw Error("InvalidArgument", "gamma_p domain");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi_squared_quantile(double dof, double prob) {
    if (!(dof > 0.0) || !(prob > 0.0) || !(prob < 1.0))
        throw Error("InvalidArgument", "chi_squared_quantile domain");
    double lo = 0.0;
    double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
    while (gamma_p(0.5 * dof, 0.5 * hi) < prob) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_p(0.5 * dof, 0.5 * mid) < prob)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

double percentile(std::vector<double> x, double q) {
    if (x.empty()) throw Error("EmptySample", "percentile of empty vector");
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * x[lo] + w * x[hi];
}

} // namespace dmpi
