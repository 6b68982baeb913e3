#ifndef DMPI_SAMPLER_HPP
#define DMPI_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dmpi/divergence.hpp"
#include "dmpi/evaluation.hpp"
#include "dmpi/histogram.hpp"
#include "dmpi/nkpc.hpp"
#include "dmpi/priors.hpp"
#include "dmpi/rng.hpp"

namespace dmpi {

// One particle: M joint draws of the B structural parameters, row-major.
struct ThetaSet {
    int m_rows = 1;
    int n_params = 1;
    std::vector<double> values;

    static ThetaSet zeros(int m, int b) {
        ThetaSet t;
        t.m_rows = m;
        t.n_params = b;
        t.values.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(b), 0.0);
        return t;
    }
    double& at(int r, int j) {
        return values[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_params) +
                      static_cast<std::size_t>(j)];
    }
    double at(int r, int j) const {
        return values[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_params) +
                      static_cast<std::size_t>(j)];
    }
    std::span<const double> row(int r) const {
        return {values.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(n_params),
                static_cast<std::size_t>(n_params)};
    }
};

struct KernelParts {
    double log_lik = 0.0;
    double log_prior = 0.0;

    double total() const { return log_lik + log_prior; }
};

// Target interface for the mutation step; implemented by the moment-matching
// kernel below and by toy targets in the test suites.
class LogKernel {
public:
    virtual ~LogKernel() = default;
    virtual KernelParts eval(const ThetaSet& theta) const = 0;
};

// Writes the moment vector implied by one parameter row; returns false when
// the row is outside the model's admissible region.
using MomentMapFn =
    std::function<bool(std::span<const double> params, std::span<double> moments)>;

enum class LikelihoodMode {
    Js,                  // divergence-based quasi-likelihood
    SingleDrawPredictive // M = 1 predictive-mass form (rejection-style limit)
};

// Conditional posterior kernel over theta sets given a fixed empirical
// moment panel and a fixed prior reference sample:
//   sum_b log prior-coherence(xi_b, omega_b) + sum_i log quasi-lik(zeta_i, q_i)
// where omega_b are the parameter histograms of the M rows and q_i the
// smoothed theoretical moment histograms.
class DmpiKernel : public LogKernel {
public:
    DmpiKernel(const MomentPanel& empirical, const ReferenceSample& reference,
               MomentMapFn moment_map, int m_rows, double delta,
               std::vector<std::pair<double, double>> param_support,
               LikelihoodMode mode = LikelihoodMode::Js);

    KernelParts eval(const ThetaSet& theta) const override;

    double delta() const { return delta_; }
    void set_delta(double d);
    int m_rows() const { return m_rows_; }
    int n_params() const { return static_cast<int>(reference_->n_params()); }
    std::int64_t n_draws() const { return empirical_->counts.front().total; }
    LikelihoodMode mode() const { return mode_; }
    const MomentPanel& empirical() const { return *empirical_; }
    const ReferenceSample& reference() const { return *reference_; }
    const MomentMapFn& moment_map() const { return map_; }

private:
    const MomentPanel* empirical_;
    const ReferenceSample* reference_;
    MomentMapFn map_;
    int m_rows_;
    double delta_;
    std::vector<std::pair<double, double>> param_support_;
    LikelihoodMode mode_;

    std::vector<MassVector> zeta_;     // empirical frequencies per moment
    std::vector<MassVector> log_zeta_; // ln zeta, -inf entries unused
    std::vector<MassVector> log_xi_;   // ln reference mass per parameter

    mutable std::vector<std::vector<std::int64_t>> theory_scratch_;
    mutable std::vector<std::vector<std::int64_t>> omega_scratch_;
    mutable std::vector<double> moment_scratch_;

    double likelihood_part(const ThetaSet& theta) const;
    double prior_part(const ThetaSet& theta) const;
};

double conditional_log_posterior(const ThetaSet& theta, const LogKernel& kernel);

struct ParticleSet {
    std::vector<ThetaSet> particles;
    std::vector<double> weights; // normalized so that their mean is 1
    std::vector<KernelParts> cached;

    std::size_t size() const { return particles.size(); }
};

ParticleSet init_particles(const std::vector<PriorSpec>& specs, int n_particles, int m_rows,
                           Rng& rng);

void refresh_cache(ParticleSet& ps, const LogKernel& kernel);

// Effective sample size Z / ((1/Z) sum W^2) of mean-one weights.
double ess(std::span<const double> weights);

// Reweight by the cached kernel values (log space, max subtraction) and
// renormalize to mean one.
void correct(ParticleSet& ps);

// Multinomial resampling by W/Z with replacement; weights reset to one.
// Systematic resampling is available behind the flag, default off.
void select(ParticleSet& ps, Rng& rng, bool systematic = false);

struct ProposalScales {
    double psi = 0.25;
    std::vector<double> omega; // per-parameter proposal SDs (diagonal)
};

// Gaussian random-walk move on every entry of each particle, accepted by the
// Metropolis ratio of the kernel.  Proposals with -inf kernel are rejected
// without consuming an acceptance uniform.  Returns the number accepted.
std::size_t mutate(ParticleSet& ps, const LogKernel& kernel, const ProposalScales& scales,
                   Rng& rng);

struct DeltaSchedule {
    double initial = 1.0;
    double floor = 1.0;
    bool adaptive = false;
    double increase_step = 100.0;   // added when acceptance collapses
    double low_acceptance = 0.001;  // collapse threshold
    int decay_every = 1000;         // iterations between decays
    bool decay_subtract = false;    // false: delta *= 0.9, true: delta -= 0.1
};

struct SamplerSettings {
    std::int64_t iterations = 1000000;
    std::int64_t burn_in = 990000;
    std::int64_t thin = 1;
    double ess_threshold = 0.5; // as a fraction of Z
    double psi0 = 0.25;
    std::vector<double> omega;       // empty = filled with prior SDs by the caller
    double accept_lo = 0.08;         // psi adaptation band
    double accept_hi = 0.12;
    std::int64_t adapt_window = 1000;
    bool adapt_psi = true;
    bool systematic_resampling = false;
    DeltaSchedule delta;
    std::int64_t trace_every = 1;
};

struct DiagnosticsRow {
    std::int64_t iter = 0;
    double ess = 0.0;
    double acceptance_rate = 0.0;
    double delta = 0.0;
    double psi = 0.0;
    double log_kernel_mean = 0.0;
};

struct RunOutput {
    PosteriorStore store;
    std::vector<DiagnosticsRow> trace;
    double final_psi = 0.0;
    double final_delta = 0.0;
    double overall_acceptance = 0.0;
    std::int64_t mutation_steps = 0;
};

// Iterate correction -> selection -> (mutation when the effective sample
// size falls below the threshold; a single particle always mutates), with
// psi adapted toward the acceptance band during burn-in and the smoothing
// schedule applied; post-burn-in particles and kernel parts are stored at
// the schedule floor.
RunOutput smc_mh_run(ParticleSet init, DmpiKernel& kernel, const SamplerSettings& settings,
                     Rng& rng);

// Same loop against an arbitrary fixed target (no smoothing schedule);
// exposed for property tests of the mutation kernel.
RunOutput smc_mh_run_fixed(ParticleSet init, const LogKernel& kernel,
                           const SamplerSettings& settings, Rng& rng);

// true when every moment pair falls in the same bin of its grid
bool abc_accept(const MomentVector& m_a, const MomentVector& m_e,
                const std::vector<SupportGrid>& grids);

} // namespace dmpi

#endif
