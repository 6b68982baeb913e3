#ifndef DMPI_NUMERIC_HPP
#define DMPI_NUMERIC_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dmpi/error.hpp"

namespace dmpi {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

// log(sum(exp(x))) with max subtraction; empty input -> -inf
inline double log_sum_exp(std::span<const double> x) {
    double m = neg_inf;
    for (double v : x)
        if (v > m) m = v;
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

inline double mean(std::span<const double> x) {
    if (x.empty()) throw Error("EmptySample", "mean of empty vector");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
double gamma_p(double a, double x);

// Quantile of the chi-squared distribution with d degrees of freedom,
// solved by bisection on gamma_p.
double chi_squared_quantile(double dof, double prob);

// Empirical percentile with linear interpolation (q in [0,1]).
double percentile(std::vector<double> x, double q);

} // namespace dmpi

#endif
