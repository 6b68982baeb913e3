#include "dmpi/evaluation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "dmpi/numeric.hpp"

namespace dmpi {

namespace {

double harmonic_mean_log_ml(const PosteriorStore& store, double truncation_prob, bool* ridged,
                            bool normalized_f) {
    if (!(truncation_prob > 0.0 && truncation_prob < 1.0))
        throw Error("InvalidArgument", "truncation probability must lie in (0,1)");
    const std::size_t d = store.dim();
    const std::size_t n = store.n();
    if (n < d + 2) throw Error("InsufficientDraws", "need at least dim+2 stored draws");
    if (ridged != nullptr) *ridged = false;

    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const Eigen::Map<const MatrixXd> x(store.draws.data(), static_cast<Eigen::Index>(d),
                                       static_cast<Eigen::Index>(n)); // columns are draws
    const VectorXd mu = x.rowwise().mean();
    const MatrixXd centered = x.colwise() - mu;
    MatrixXd cov = (centered * centered.transpose()) / static_cast<double>(n - 1);

    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-10;
        llt.compute(cov);
        if (ridged != nullptr) *ridged = true;
        if (llt.info() != Eigen::Success)
            throw Error("SingularCovariance", "draw covariance not factorizable after ridge");
    }
    const MatrixXd l = llt.matrixL();
    double log_det = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        log_det += 2.0 * std::log(l(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));

    // truncation radius and the exact normal mass inside it
    const double radius2 = chi_squared_quantile(static_cast<double>(d), truncation_prob);
    const double inside_mass = gamma_p(0.5 * static_cast<double>(d), 0.5 * radius2);
    const double log_norm =
        normalized_f ? -0.5 * static_cast<double>(d) * std::log(2.0 * M_PI) - 0.5 * log_det -
                           std::log(inside_mass)
                     : 0.0;

    std::vector<double> log_ratios;
    log_ratios.reserve(n);
    VectorXd delta(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        delta = x.col(static_cast<Eigen::Index>(i)) - mu;
        const VectorXd z = llt.matrixL().solve(delta);
        const double q = z.squaredNorm();
        if (q > radius2) continue; // f vanishes outside the ellipsoid
        const double log_f = log_norm - 0.5 * q;
        log_ratios.push_back(log_f - store.log_kernel[i]);
    }
    if (log_ratios.empty())
        throw Error("InsufficientDraws", "no stored draw falls inside the truncation region");
    const double log_mean = log_sum_exp(log_ratios) - std::log(static_cast<double>(n));
    return -log_mean;
}

} // namespace

double log_marginal_likelihood_mhm(const PosteriorStore& store, double truncation_prob,
                                   bool* ridged) {
    return harmonic_mean_log_ml(store, truncation_prob, ridged, true);
}

double relative_log_marginal_likelihood(const PosteriorStore& store, double truncation_prob,
                                        bool* ridged) {
    return harmonic_mean_log_ml(store, truncation_prob, ridged, false);
}

double twice_log_bayes_factor(double logml_a, double logml_b) {
    return 2.0 * (logml_a - logml_b);
}

Decomposition decompose(const PosteriorStore& store) {
    if (store.n() == 0) throw Error("EmptySample", "empty posterior store");
    Decomposition d;
    d.mean_log_lik = mean(store.log_lik);
    d.mean_log_prior = mean(store.log_prior);
    return d;
}

McSummary aggregate_replications(const std::vector<ReplicationResult>& runs) {
    if (runs.empty()) throw Error("EmptySample", "no replications to aggregate");
    const std::size_t b = runs.front().post_mean.size();
    for (const auto& r : runs)
        if (r.post_mean.size() != b)
            throw Error("ShapeMismatch", "replications disagree on parameter count");

    McSummary s;
    s.replications = static_cast<int>(runs.size());
    s.param_mean.resize(b);
    s.param_lo95.resize(b);
    s.param_hi95.resize(b);
    std::vector<double> col(runs.size());
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t r = 0; r < runs.size(); ++r) col[r] = runs[r].post_mean[j];
        s.param_mean[j] = mean(col);
        s.param_lo95[j] = percentile(col, 0.025);
        s.param_hi95[j] = percentile(col, 0.975);
    }
    std::vector<double> ml(runs.size()), lik(runs.size()), pri(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        ml[r] = runs[r].log_ml;
        lik[r] = runs[r].log_lik;
        pri[r] = runs[r].log_prior;
    }
    s.log_ml_mean = mean(ml);
    s.log_ml_sd = sample_sd(ml);
    s.log_lik_mean = mean(lik);
    s.log_lik_sd = sample_sd(lik);
    s.log_prior_mean = mean(pri);
    s.log_prior_sd = sample_sd(pri);
    return s;
}

} // namespace dmpi
