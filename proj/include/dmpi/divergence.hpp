#ifndef DMPI_DIVERGENCE_HPP
#define DMPI_DIVERGENCE_HPP

#include <cstdint>
#include <span>

#include "dmpi/histogram.hpp"

namespace dmpi {

// Weights of the likelihood-side divergence: lambda is the ratio of smoothed
// theoretical to empirical draw totals, (M + delta*K) / N.
struct JsWeights {
    double lambda = 1.0;
    std::int64_t n_draws = 1; // N

    void validate() const {
        if (!(lambda > 0.0)) throw Error("InvalidArgument", "lambda must be positive");
        if (n_draws < 1) throw Error("InvalidArgument", "need at least one empirical draw");
    }
};

// Weights of the prior-side divergence: tau = M / H against a reference
// sample of H draws.
struct PriorWeights {
    double tau = 1.0;
    std::int64_t h_draws = 1; // H

    void validate() const {
        if (!(tau > 0.0)) throw Error("InvalidArgument", "tau must be positive");
        if (h_draws < 1) throw Error("InvalidArgument", "need at least one reference draw");
    }
};

// Exact log marginal likelihood of counts n under a Dirichlet-multinomial
// (Polya) model with concentrations alpha, evaluated entirely via lgamma.
double polya_log_marginal(const CountVector& n, std::span<const double> alpha);

// Kullback-Leibler divergence sum_k p_k (ln p_k - ln q_k) with 0*ln0 = 0;
// +infinity when p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Weighted Jensen-Shannon divergence with mixture
// m_k = zeta_k/(1+lambda) + lambda*q_k/(1+lambda); the two sums are weighted
// 1/(1+lambda) and lambda/(1+lambda).  Always finite under 0*ln0 = 0.
double js_divergence_weighted(std::span<const double> zeta, std::span<const double> q,
                              const JsWeights& w);

// Log quasi-likelihood ln N - (1+lambda) * N * D_JS; equals ln N when the
// two mass vectors coincide.
double js_log_likelihood(std::span<const double> zeta, std::span<const double> q,
                         const JsWeights& w);

// Hard-restriction limit (lambda -> infinity): ln N - N * KL(zeta || q).
// Support violations propagate as -infinity.
double js_log_likelihood_kl_limit(std::span<const double> zeta, std::span<const double> q,
                                  std::int64_t n_draws);

// Single-theoretical-draw limit: log predictive mass of the bin the draw
// falls into, ln((n_k + delta + 1) / (N + delta*K + 1)).
double single_draw_log_predictive(int theory_bin, const CountVector& n, double delta, int bins);

// Posterior predictive mass of bin k: (n_k + alpha_k) / (N + sum(alpha)).
double predictive_mass(int k, const CountVector& n, std::span<const double> alpha);

// Log prior-coherence kernel ln H - (1+tau) * H * D_JS^tau(xi || omega);
// no additive smoothing on either histogram.
double js_log_prior(std::span<const double> xi, std::span<const double> omega,
                    const PriorWeights& w);

} // namespace dmpi

#endif
