#ifndef DMPI_EVALUATION_HPP
#define DMPI_EVALUATION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dmpi/error.hpp"

namespace dmpi {

// Post-burn-in draws of the structural-parameter collection, flattened so
// that each stored draw is one point in R^(M*B), together with the kernel
// value and its likelihood/prior parts at the reference smoothing level.
struct PosteriorStore {
    int m_rows = 1;
    int n_params = 1;
    std::vector<double> draws; // row-major, n() x dim()
    std::vector<double> log_kernel;
    std::vector<double> log_lik;
    std::vector<double> log_prior;

    std::size_t dim() const {
        return static_cast<std::size_t>(m_rows) * static_cast<std::size_t>(n_params);
    }
    std::size_t n() const { return log_kernel.size(); }
    std::span<const double> draw(std::size_t i) const {
        return {draws.data() + i * dim(), dim()};
    }
};

// Modified harmonic mean estimate of the log normalizing constant of the
// stored kernel.  The instrumental density is multivariate normal at the
// draw mean/covariance, truncated to its truncation_prob highest-density
// ellipsoid and renormalized; the average of f/kernel is accumulated in log
// space.  A singular draw covariance is ridge-regularized and flagged.
double log_marginal_likelihood_mhm(const PosteriorStore& store, double truncation_prob,
                                   bool* ridged = nullptr);

// Same harmonic-mean computation with the instrumental density's Gaussian
// normalizer dropped, which removes the reference volume of the draw space
// from the estimate.  The absolute level is meaningless; differences across
// runs of different dimension M*B are comparable, which is what the
// evidence columns of the experiment summaries report.
double relative_log_marginal_likelihood(const PosteriorStore& store, double truncation_prob,
                                        bool* ridged = nullptr);

double twice_log_bayes_factor(double logml_a, double logml_b);

struct Decomposition {
    double mean_log_lik = 0.0;
    double mean_log_prior = 0.0;
};

Decomposition decompose(const PosteriorStore& store);

// One replication's headline numbers: pooled posterior means per structural
// parameter plus the evaluation metrics.
struct ReplicationResult {
    std::vector<double> post_mean;
    double log_ml = 0.0;
    double log_lik = 0.0;
    double log_prior = 0.0;
};

struct McSummary {
    int replications = 0;
    std::vector<double> param_mean;     // Monte Carlo mean of posterior means
    std::vector<double> param_lo95;     // 2.5th percentile across replications
    std::vector<double> param_hi95;     // 97.5th percentile across replications
    double log_ml_mean = 0.0, log_ml_sd = 0.0;
    double log_lik_mean = 0.0, log_lik_sd = 0.0;
    double log_prior_mean = 0.0, log_prior_sd = 0.0;
};

McSummary aggregate_replications(const std::vector<ReplicationResult>& runs);

} // namespace dmpi

#endif
