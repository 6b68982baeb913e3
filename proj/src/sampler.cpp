#include "dmpi/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "dmpi/numeric.hpp"

namespace dmpi {

DmpiKernel::DmpiKernel(const MomentPanel& empirical, const ReferenceSample& reference,
                       MomentMapFn moment_map, int m_rows, double delta,
                       std::vector<std::pair<double, double>> param_support,
                       LikelihoodMode mode)
    : empirical_(&empirical),
      reference_(&reference),
      map_(std::move(moment_map)),
      m_rows_(m_rows),
      delta_(delta),
      param_support_(std::move(param_support)),
      mode_(mode) {
    if (m_rows_ < 1) throw Error("InvalidArgument", "need at least one theoretical draw");
    if (!(delta_ > 0.0)) throw Error("InvalidSmoothing", "delta must be positive");
    if (param_support_.size() != reference_->n_params())
        throw Error("ShapeMismatch", "one support interval per parameter required");
    if (mode_ == LikelihoodMode::SingleDrawPredictive && m_rows_ != 1)
        throw Error("InvalidArgument", "predictive mode requires a single theoretical draw");

    const std::size_t n_mom = empirical_->n_moments();
    zeta_.resize(n_mom);
    log_zeta_.resize(n_mom);
    theory_scratch_.resize(n_mom);
    for (std::size_t i = 0; i < n_mom; ++i) {
        zeta_[i] = relative_frequencies(empirical_->counts[i]);
        log_zeta_[i].resize(zeta_[i].size());
        for (std::size_t k = 0; k < zeta_[i].size(); ++k)
            log_zeta_[i][k] = zeta_[i][k] > 0.0 ? std::log(zeta_[i][k]) : 0.0;
        theory_scratch_[i].assign(zeta_[i].size(), 0);
    }
    const std::size_t b = reference_->n_params();
    log_xi_.resize(b);
    omega_scratch_.resize(b);
    for (std::size_t j = 0; j < b; ++j) {
        const MassVector& xi = reference_->hist_mass[j];
        log_xi_[j].resize(xi.size());
        for (std::size_t k = 0; k < xi.size(); ++k)
            log_xi_[j][k] = xi[k] > 0.0 ? std::log(xi[k]) : 0.0;
        omega_scratch_[j].assign(xi.size(), 0);
    }
    moment_scratch_.assign(n_mom, 0.0);
}

void DmpiKernel::set_delta(double d) {
    if (!(d > 0.0)) throw Error("InvalidSmoothing", "delta must be positive");
    delta_ = d;
}

double DmpiKernel::likelihood_part(const ThetaSet& theta) const {
    const std::size_t n_mom = empirical_->n_moments();
    for (std::size_t i = 0; i < n_mom; ++i)
        std::fill(theory_scratch_[i].begin(), theory_scratch_[i].end(), 0);

    for (int r = 0; r < m_rows_; ++r) {
        if (!map_(theta.row(r), moment_scratch_)) return neg_inf;
        for (std::size_t i = 0; i < n_mom; ++i) {
            const int k = bin_index(moment_scratch_[i], empirical_->grids[i]);
            ++theory_scratch_[i][static_cast<std::size_t>(k)];
        }
    }

    const double nn = static_cast<double>(n_draws());
    double total = 0.0;
    for (std::size_t i = 0; i < n_mom; ++i) {
        const std::size_t bins = zeta_[i].size();
        if (mode_ == LikelihoodMode::SingleDrawPredictive) {
            int hit = 0;
            for (std::size_t k = 0; k < bins; ++k)
                if (theory_scratch_[i][k] > 0) { hit = static_cast<int>(k); break; }
            total += single_draw_log_predictive(hit, empirical_->counts[i], delta_,
                                                static_cast<int>(bins));
            continue;
        }
        const double scale = static_cast<double>(m_rows_) + delta_ * static_cast<double>(bins);
        const double lambda = scale / nn;
        const double wz = 1.0 / (1.0 + lambda);
        const double wq = lambda / (1.0 + lambda);
        const double q0 = delta_ / scale;
        const double log_q0 = std::log(q0);
        double d = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            const double z = zeta_[i][k];
            const std::int64_t tc = theory_scratch_[i][k];
            const double q = tc == 0 ? q0 : (delta_ + static_cast<double>(tc)) / scale;
            const double log_q = tc == 0 ? log_q0 : std::log(q);
            const double m = wz * z + wq * q;
            const double log_m = std::log(m);
            if (z > 0.0) d += wz * z * (log_zeta_[i][k] - log_m);
            d += wq * q * (log_q - log_m);
        }
        if (d < 0.0) d = 0.0;
        total += std::log(nn) - (1.0 + lambda) * nn * d;
    }
    return total;
}

double DmpiKernel::prior_part(const ThetaSet& theta) const {
    const std::size_t b = reference_->n_params();
    const double hh = static_cast<double>(reference_->h_draws);
    const double tau = static_cast<double>(m_rows_) / hh;
    const double wz = 1.0 / (1.0 + tau);
    const double wt = tau / (1.0 + tau);
    const double log_one_plus_tau = std::log1p(tau);

    double total = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        auto& counts = omega_scratch_[j];
        std::fill(counts.begin(), counts.end(), 0);
        for (int r = 0; r < m_rows_; ++r)
            ++counts[static_cast<std::size_t>(
                bin_index(theta.at(r, static_cast<int>(j)), reference_->grids[j]))];

        const MassVector& xi = reference_->hist_mass[j];
        double d = 0.0;
        double xi_on_active = 0.0; // reference mass on bins the particle occupies
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k] == 0) continue;
            const double w = static_cast<double>(counts[k]) / static_cast<double>(m_rows_);
            const double m = wz * xi[k] + wt * w;
            const double log_m = std::log(m);
            if (xi[k] > 0.0) {
                d += wz * xi[k] * (log_xi_[j][k] - log_m);
                xi_on_active += xi[k];
            }
            d += wt * w * (std::log(w) - log_m);
        }
        // bins without particle mass contribute wz * xi_k * ln(1+tau)
        d += wz * (1.0 - xi_on_active) * log_one_plus_tau;
        if (d < 0.0) d = 0.0;
        total += std::log(hh) - (1.0 + tau) * hh * d;
    }
    return total;
}

KernelParts DmpiKernel::eval(const ThetaSet& theta) const {
    if (theta.m_rows != m_rows_ || theta.n_params != n_params())
        throw Error("ShapeMismatch", "theta set does not match the kernel dimensions");
    for (int r = 0; r < theta.m_rows; ++r)
        for (int j = 0; j < theta.n_params; ++j) {
            const double x = theta.at(r, j);
            const auto& [lo, hi] = param_support_[static_cast<std::size_t>(j)];
            if (!(x >= lo && x <= hi)) return {neg_inf, neg_inf};
        }
    const double lik = likelihood_part(theta);
    if (!std::isfinite(lik)) return {neg_inf, neg_inf};
    return {lik, prior_part(theta)};
}

double conditional_log_posterior(const ThetaSet& theta, const LogKernel& kernel) {
    return kernel.eval(theta).total();
}

ParticleSet init_particles(const std::vector<PriorSpec>& specs, int n_particles, int m_rows,
                           Rng& rng) {
    if (n_particles < 1) throw Error("InvalidArgument", "need at least one particle");
    ParticleSet ps;
    ps.particles.reserve(static_cast<std::size_t>(n_particles));
    const int b = static_cast<int>(specs.size());
    for (int z = 0; z < n_particles; ++z) {
        ThetaSet t = ThetaSet::zeros(m_rows, b);
        for (int r = 0; r < m_rows; ++r)
            for (int j = 0; j < b; ++j)
                t.at(r, j) = sample_prior(specs[static_cast<std::size_t>(j)], rng);
        ps.particles.push_back(std::move(t));
    }
    ps.weights.assign(static_cast<std::size_t>(n_particles), 1.0);
    ps.cached.assign(static_cast<std::size_t>(n_particles), KernelParts{});
    return ps;
}

void refresh_cache(ParticleSet& ps, const LogKernel& kernel) {
    for (std::size_t z = 0; z < ps.size(); ++z) ps.cached[z] = kernel.eval(ps.particles[z]);
}

double ess(std::span<const double> weights) {
    const double z = static_cast<double>(weights.size());
    double sum_sq = 0.0;
    double sum = 0.0;
    for (double w : weights) {
        sum += w;
        sum_sq += w * w;
    }
    if (sum <= 0.0) throw Error("DegenerateWeights", "all particle weights vanish");
    return z / (sum_sq / z);
}

void correct(ParticleSet& ps) {
    const std::size_t z = ps.size();
    double max_log = neg_inf;
    for (std::size_t i = 0; i < z; ++i) {
        const double lk = ps.cached[i].total();
        if (lk > max_log) max_log = lk;
    }
    if (!std::isfinite(max_log))
        throw Error("AllParticlesDead", "every particle has a vanishing kernel value");
    double sum = 0.0;
    std::vector<double> unnorm(z);
    for (std::size_t i = 0; i < z; ++i) {
        const double lk = ps.cached[i].total();
        unnorm[i] = std::isfinite(lk) ? std::exp(lk - max_log) * ps.weights[i] : 0.0;
        sum += unnorm[i];
    }
    if (sum <= 0.0) throw Error("AllParticlesDead", "weights collapsed in correction");
    for (std::size_t i = 0; i < z; ++i)
        ps.weights[i] = unnorm[i] * static_cast<double>(z) / sum; // mean one
}

void select(ParticleSet& ps, Rng& rng, bool systematic) {
    const std::size_t z = ps.size();
    std::vector<double> cum(z);
    double acc = 0.0;
    for (std::size_t i = 0; i < z; ++i) {
        acc += ps.weights[i] / static_cast<double>(z);
        cum[i] = acc;
    }
    cum.back() = 1.0;

    std::vector<std::size_t> picks(z);
    if (systematic) {
        const double u0 = rng.uniform01() / static_cast<double>(z);
        std::size_t j = 0;
        for (std::size_t i = 0; i < z; ++i) {
            const double u = u0 + static_cast<double>(i) / static_cast<double>(z);
            while (cum[j] < u) ++j;
            picks[i] = j;
        }
    } else {
        for (std::size_t i = 0; i < z; ++i) {
            const double u = rng.uniform01();
            picks[i] = static_cast<std::size_t>(
                std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        }
    }

    std::vector<ThetaSet> new_particles;
    std::vector<KernelParts> new_cache;
    new_particles.reserve(z);
    new_cache.reserve(z);
    for (std::size_t i = 0; i < z; ++i) {
        new_particles.push_back(ps.particles[picks[i]]);
        new_cache.push_back(ps.cached[picks[i]]);
    }
    ps.particles = std::move(new_particles);
    ps.cached = std::move(new_cache);
    std::fill(ps.weights.begin(), ps.weights.end(), 1.0);
}

std::size_t mutate(ParticleSet& ps, const LogKernel& kernel, const ProposalScales& scales,
                   Rng& rng) {
    std::size_t accepted = 0;
    for (std::size_t z = 0; z < ps.size(); ++z) {
        ThetaSet proposal = ps.particles[z];
        for (int r = 0; r < proposal.m_rows; ++r)
            for (int j = 0; j < proposal.n_params; ++j)
                proposal.at(r, j) +=
                    scales.psi * scales.omega[static_cast<std::size_t>(j)] * rng.normal();

        const KernelParts cand = kernel.eval(proposal);
        if (!std::isfinite(cand.total())) continue; // auto-reject, no uniform consumed
        const double current = ps.cached[z].total();
        bool accept;
        if (!std::isfinite(current)) {
            accept = true; // any admissible proposal revives a dead particle
        } else {
            const double log_u = std::log(1.0 - rng.uniform01());
            accept = log_u <= cand.total() - current;
        }
        if (accept) {
            ps.particles[z] = std::move(proposal);
            ps.cached[z] = cand;
            ++accepted;
        }
    }
    return accepted;
}

bool abc_accept(const MomentVector& m_a, const MomentVector& m_e,
                const std::vector<SupportGrid>& grids) {
    if (grids.size() != m_a.size()) throw Error("ShapeMismatch", "one grid per moment required");
    for (std::size_t i = 0; i < grids.size(); ++i)
        if (bin_index(m_a[i], grids[i]) != bin_index(m_e[i], grids[i])) return false;
    return true;
}

namespace {

// Shared correction/selection/mutation loop.  set_delta is null for fixed
// targets; otherwise it applies the smoothing schedule and reports cache
// invalidation.
RunOutput run_loop(ParticleSet ps, const LogKernel& kernel, const SamplerSettings& settings,
                   Rng& rng, DmpiKernel* schedulable) {
    if (settings.omega.empty())
        throw Error("InvalidArgument", "proposal scales must be supplied");
    if (settings.burn_in < 0 || settings.burn_in >= settings.iterations)
        throw Error("InvalidArgument", "burn-in must lie inside the iteration count");

    const std::size_t z = ps.size();
    const double c_threshold = settings.ess_threshold * static_cast<double>(z);

    RunOutput out;
    const int m = ps.particles.front().m_rows;
    const int b = ps.particles.front().n_params;
    out.store.m_rows = m;
    out.store.n_params = b;

    double psi = settings.psi0;
    double delta = schedulable != nullptr ? schedulable->delta() : 0.0;
    ProposalScales scales{psi, settings.omega};

    refresh_cache(ps, kernel);

    std::int64_t window_proposed = 0;
    std::int64_t window_accepted = 0;
    std::int64_t total_proposed = 0;
    std::int64_t total_accepted = 0;

    for (std::int64_t n = 1; n <= settings.iterations; ++n) {
        double ess_n = static_cast<double>(z);
        if (z > 1) {
            correct(ps);
            ess_n = ess(ps.weights);
            select(ps, rng, settings.systematic_resampling);
        }

        const bool do_mutate = z == 1 || ess_n < c_threshold;
        if (do_mutate) {
            scales.psi = psi;
            const std::size_t acc = mutate(ps, kernel, scales, rng);
            window_accepted += static_cast<std::int64_t>(acc);
            window_proposed += static_cast<std::int64_t>(z);
            total_accepted += static_cast<std::int64_t>(acc);
            total_proposed += static_cast<std::int64_t>(z);
            ++out.mutation_steps;
        }

        const bool in_burn_in = n <= settings.burn_in;
        if (window_proposed >= settings.adapt_window) {
            const double rate =
                static_cast<double>(window_accepted) / static_cast<double>(window_proposed);
            if (in_burn_in && settings.adapt_psi) {
                if (rate < settings.accept_lo) psi *= 0.9;
                else if (rate > settings.accept_hi) psi *= 1.1;
            }
            if (schedulable != nullptr && settings.delta.adaptive && in_burn_in &&
                rate < settings.delta.low_acceptance) {
                delta += settings.delta.increase_step;
                schedulable->set_delta(delta);
                refresh_cache(ps, kernel);
            }
            window_proposed = 0;
            window_accepted = 0;
        }
        if (schedulable != nullptr && settings.delta.adaptive && in_burn_in &&
            settings.delta.decay_every > 0 && n % settings.delta.decay_every == 0) {
            double next = settings.delta.decay_subtract ? delta - 0.1 : delta * 0.9;
            if (next < settings.delta.floor) next = settings.delta.floor;
            if (next != delta) {
                delta = next;
                schedulable->set_delta(delta);
                refresh_cache(ps, kernel);
            }
        }
        if (schedulable != nullptr && n == settings.burn_in && delta != settings.delta.floor) {
            // reported draws are all evaluated at a common smoothing level
            delta = settings.delta.floor;
            schedulable->set_delta(delta);
            refresh_cache(ps, kernel);
        }

        if (!in_burn_in && (n - settings.burn_in) % settings.thin == 0) {
            for (std::size_t i = 0; i < z; ++i) {
                const ThetaSet& t = ps.particles[i];
                out.store.draws.insert(out.store.draws.end(), t.values.begin(), t.values.end());
                out.store.log_kernel.push_back(ps.cached[i].total());
                out.store.log_lik.push_back(ps.cached[i].log_lik);
                out.store.log_prior.push_back(ps.cached[i].log_prior);
            }
        }

        if (settings.trace_every > 0 && n % settings.trace_every == 0) {
            DiagnosticsRow row;
            row.iter = n;
            row.ess = ess_n;
            row.acceptance_rate =
                total_proposed > 0
                    ? static_cast<double>(total_accepted) / static_cast<double>(total_proposed)
                    : 0.0;
            row.delta = schedulable != nullptr ? delta : 0.0;
            row.psi = psi;
            double lk_sum = 0.0;
            for (std::size_t i = 0; i < z; ++i) lk_sum += ps.cached[i].total();
            row.log_kernel_mean = lk_sum / static_cast<double>(z);
            out.trace.push_back(row);
        }
    }

    out.final_psi = psi;
    out.final_delta = delta;
    out.overall_acceptance =
        total_proposed > 0
            ? static_cast<double>(total_accepted) / static_cast<double>(total_proposed)
            : 0.0;
    return out;
}

} // namespace

RunOutput smc_mh_run(ParticleSet init, DmpiKernel& kernel, const SamplerSettings& settings,
                     Rng& rng) {
    kernel.set_delta(settings.delta.initial);
    return run_loop(std::move(init), kernel, settings, rng, &kernel);
}

RunOutput smc_mh_run_fixed(ParticleSet init, const LogKernel& kernel,
                           const SamplerSettings& settings, Rng& rng) {
    return run_loop(std::move(init), kernel, settings, rng, nullptr);
}

} // namespace dmpi
