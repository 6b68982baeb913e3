#include "dmpi/divergence.hpp"

#include <cmath>

#include "dmpi/numeric.hpp"

namespace dmpi {

namespace {

void check_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw Error("ShapeMismatch", "mass vectors differ in length");
}

} // namespace

double polya_log_marginal(const CountVector& n, std::span<const double> alpha) {
    check_same_length(n.counts.size(), alpha.size());
    double alpha_sum = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0)) throw Error("InvalidArgument", "concentrations must be positive");
        alpha_sum += a;
    }
    const double nn = static_cast<double>(n.total);
    double lp = std::lgamma(nn + 1.0) + std::lgamma(alpha_sum) - std::lgamma(nn + alpha_sum);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const double nk = static_cast<double>(n.counts[k]);
        lp += std::lgamma(nk + alpha[k]) - std::lgamma(nk + 1.0) - std::lgamma(alpha[k]);
    }
    return lp;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    check_same_length(p.size(), q.size());
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue; // 0*ln0 = 0
        if (q[k] <= 0.0) return pos_inf;
        d += p[k] * (std::log(p[k]) - std::log(q[k]));
    }
    return d < 0.0 ? 0.0 : d;
}

double js_divergence_weighted(std::span<const double> zeta, std::span<const double> q,
                              const JsWeights& w) {
    check_same_length(zeta.size(), q.size());
    w.validate();
    const double lam = w.lambda;
    const double wz = 1.0 / (1.0 + lam);
    const double wq = lam / (1.0 + lam);
    double d = 0.0;
    for (std::size_t k = 0; k < zeta.size(); ++k) {
        const double m = wz * zeta[k] + wq * q[k];
        if (zeta[k] > 0.0) d += wz * zeta[k] * (std::log(zeta[k]) - std::log(m));
        if (q[k] > 0.0) d += wq * q[k] * (std::log(q[k]) - std::log(m));
    }
    return d < 0.0 ? 0.0 : d; // clamp fp residue; the divergence is nonnegative
}

double js_log_likelihood(std::span<const double> zeta, std::span<const double> q,
                         const JsWeights& w) {
    const double nn = static_cast<double>(w.n_draws);
    return std::log(nn) - (1.0 + w.lambda) * nn * js_divergence_weighted(zeta, q, w);
}

double js_log_likelihood_kl_limit(std::span<const double> zeta, std::span<const double> q,
                                  std::int64_t n_draws) {
    const double nn = static_cast<double>(n_draws);
    const double kl = kl_divergence(zeta, q);
    if (!std::isfinite(kl)) return neg_inf;
    return std::log(nn) - nn * kl;
}

double single_draw_log_predictive(int theory_bin, const CountVector& n, double delta, int bins) {
    if (theory_bin < 0 || theory_bin >= bins ||
        static_cast<std::size_t>(bins) != n.counts.size())
        throw Error("ShapeMismatch", "theory bin out of range");
    if (n.total < 1) throw Error("EmptySample", "need at least one empirical draw");
    const double nk = static_cast<double>(n.counts[static_cast<std::size_t>(theory_bin)]);
    const double nn = static_cast<double>(n.total);
    return std::log(nk + delta + 1.0) - std::log(nn + delta * static_cast<double>(bins) + 1.0);
}

double predictive_mass(int k, const CountVector& n, std::span<const double> alpha) {
    check_same_length(n.counts.size(), alpha.size());
    if (k < 0 || static_cast<std::size_t>(k) >= alpha.size())
        throw Error("ShapeMismatch", "bin out of range");
    double alpha_sum = 0.0;
    for (double a : alpha) alpha_sum += a;
    const double nk = static_cast<double>(n.counts[static_cast<std::size_t>(k)]);
    return (nk + alpha[static_cast<std::size_t>(k)]) /
           (static_cast<double>(n.total) + alpha_sum);
}

double js_log_prior(std::span<const double> xi, std::span<const double> omega,
                    const PriorWeights& w) {
    check_same_length(xi.size(), omega.size());
    w.validate();
    const double hh = static_cast<double>(w.h_draws);
    const JsWeights jw{w.tau, w.h_draws};
    return std::log(hh) - (1.0 + w.tau) * hh * js_divergence_weighted(xi, omega, jw);
}

} // namespace dmpi
