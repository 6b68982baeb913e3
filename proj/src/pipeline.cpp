#include "dmpi/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "dmpi/bvar.hpp"
#include "dmpi/csv.hpp"
#include "dmpi/numeric.hpp"

namespace dmpi {

namespace fs = std::filesystem;

namespace {

// stream labels for seed derivation: replication -> module -> chain
enum StreamLabel : std::uint64_t {
    StreamData = 1,
    StreamEmpirical = 2,
    StreamReference = 3,
    StreamInit = 4,
    StreamChain = 5,
};

std::string rep_dir(const PipelineOptions& opts, int rep) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rep%03d", rep);
    return (fs::path(opts.out_dir) / buf).string();
}

std::string m_tag(int m) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "m%04d", m);
    return buf;
}

void write_series_csv(const std::string& path,
                      const std::vector<std::array<double, 2>>& series) {
    CsvWriter w(path);
    w.field("t").field("d_pi").field("phi");
    w.endrow();
    for (std::size_t t = 0; t < series.size(); ++t) {
        w.field(static_cast<std::int64_t>(t)).field(series[t][0]).field(series[t][1]);
        w.endrow();
    }
}

void write_empirical_draws_csv(const std::string& path, std::span<const VarDraw> draws) {
    CsvWriter w(path);
    w.field("draw_id").field("m1").field("m2").field("m3").field("m4").field("m5");
    w.endrow();
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const MomentVector m = draw_to_moments(draws[i]);
        w.field(static_cast<std::int64_t>(i));
        for (double v : m) w.field(v);
        w.endrow();
    }
}

void write_panel_csv(const std::string& path, const MomentPanel& panel) {
    CsvWriter w(path);
    w.field("moment_id")
        .field("bin_index")
        .field("bin_lower")
        .field("bin_upper")
        .field("count")
        .field("frequency");
    w.endrow();
    for (std::size_t i = 0; i < panel.n_moments(); ++i) {
        const SupportGrid& g = panel.grids[i];
        const CountVector& c = panel.counts[i];
        for (int k = 0; k < g.bins; ++k) {
            const auto count = c.counts[static_cast<std::size_t>(k)];
            w.field(static_cast<std::int64_t>(i))
                .field(static_cast<std::int64_t>(k))
                .field(g.lower + g.width() * k)
                .field(g.lower + g.width() * (k + 1))
                .field(count)
                .field(static_cast<double>(count) / static_cast<double>(c.total));
            w.endrow();
        }
    }
}

void write_trace_csv(const std::string& path, const std::vector<DiagnosticsRow>& trace) {
    CsvWriter w(path);
    w.field("iter").field("ess").field("acceptance_rate").field("delta").field("psi").field(
        "log_kernel_mean");
    w.endrow();
    for (const auto& r : trace) {
        w.field(r.iter)
            .field(r.ess)
            .field(r.acceptance_rate)
            .field(r.delta)
            .field(r.psi)
            .field(r.log_kernel_mean);
        w.endrow();
    }
}

void write_draws_csv(const std::string& path, const PosteriorStore& store,
                     const std::vector<std::string>& names, int particles) {
    CsvWriter w(path);
    w.field("iter").field("particle").field("member");
    for (const auto& n : names) w.field(n);
    w.endrow();
    const std::size_t b = static_cast<std::size_t>(store.n_params);
    for (std::size_t i = 0; i < store.n(); ++i) {
        const auto row = store.draw(i);
        const std::int64_t iter = static_cast<std::int64_t>(i) / particles;
        const std::int64_t particle = static_cast<std::int64_t>(i) % particles;
        for (int r = 0; r < store.m_rows; ++r) {
            w.field(iter).field(particle).field(static_cast<std::int64_t>(r));
            for (std::size_t j = 0; j < b; ++j)
                w.field(row[static_cast<std::size_t>(r) * b + j]);
            w.endrow();
        }
    }
}

std::vector<double> pooled_posterior_mean(const PosteriorStore& store) {
    const std::size_t b = static_cast<std::size_t>(store.n_params);
    std::vector<double> mean(b, 0.0);
    if (store.n() == 0) throw Error("EmptySample", "no stored draws");
    for (std::size_t i = 0; i < store.n(); ++i) {
        const auto row = store.draw(i);
        for (int r = 0; r < store.m_rows; ++r)
            for (std::size_t j = 0; j < b; ++j)
                mean[j] += row[static_cast<std::size_t>(r) * b + j];
    }
    const double denom = static_cast<double>(store.n()) * static_cast<double>(store.m_rows);
    for (double& v : mean) v /= denom;
    return mean;
}

SamplerSettings settings_for_chain(const ExperimentConfig& cfg) {
    SamplerSettings s;
    s.iterations = cfg.iterations;
    s.burn_in = cfg.burn_in;
    s.thin = cfg.thin;
    s.ess_threshold = cfg.ess_threshold;
    s.psi0 = cfg.psi0;
    s.accept_lo = cfg.accept_lo;
    s.accept_hi = cfg.accept_hi;
    s.adapt_window = cfg.adapt_window;
    s.adapt_psi = cfg.adapt_psi;
    s.systematic_resampling = cfg.systematic_resampling;
    s.delta = cfg.delta;
    s.trace_every = cfg.trace_every;
    s.omega.clear();
    for (const auto& p : cfg.params) s.omega.push_back(prior_sd(p.prior));
    return s;
}

// Initialization: a single-draw random-walk chain whose tail seeds the
// M-member particle members.
ThetaSet init_theta_from_rwmh(const ExperimentConfig& cfg, const MomentPanel& empirical,
                              const ReferenceSample& reference, int m, Rng& rng) {
    const int b = cfg.n_params();
    NkpcMomentMap map{cfg.variant, cfg.variance_flags()};
    DmpiKernel kernel(empirical, reference,
                      [map](std::span<const double> p, std::span<double> out) {
                          return map(p, out);
                      },
                      1, cfg.delta.floor, cfg.param_supports(), LikelihoodMode::Js);

    SamplerSettings s = settings_for_chain(cfg);
    s.iterations = cfg.init_iterations;
    s.burn_in = cfg.init_iterations / 2;
    s.thin = 1;
    s.trace_every = 0;
    s.delta.adaptive = false;
    s.delta.initial = cfg.delta.floor;

    ParticleSet ps = init_particles(cfg.prior_specs(), 1, 1, rng);
    RunOutput out = smc_mh_run(ps, kernel, s, rng);

    const std::size_t stored = out.store.n();
    if (stored < static_cast<std::size_t>(m))
        throw Error("InsufficientDraws", "initialization chain shorter than M");
    ThetaSet theta = ThetaSet::zeros(m, b);
    for (int r = 0; r < m; ++r) {
        const auto row = out.store.draw(stored - static_cast<std::size_t>(m) +
                                        static_cast<std::size_t>(r));
        for (int j = 0; j < b; ++j) theta.at(r, j) = row[static_cast<std::size_t>(j)];
    }
    return theta;
}

ChainResult run_chain(const ExperimentConfig& cfg, const MomentPanel& empirical,
                      const ReferenceSample& reference, int m, Rng& rng_init, Rng& rng_chain) {
    const auto t0 = std::chrono::steady_clock::now();

    NkpcMomentMap map{cfg.variant, cfg.variance_flags()};
    DmpiKernel kernel(empirical, reference,
                      [map](std::span<const double> p, std::span<double> out) {
                          return map(p, out);
                      },
                      m, cfg.delta.initial, cfg.param_supports(), cfg.likelihood_mode);

    ParticleSet ps = init_particles(cfg.prior_specs(), cfg.particles, m, rng_chain);
    if (cfg.init_rwmh) {
        const ThetaSet seed_theta = init_theta_from_rwmh(cfg, empirical, reference, m, rng_init);
        for (auto& particle : ps.particles) particle = seed_theta;
    }

    const SamplerSettings settings = settings_for_chain(cfg);
    RunOutput out = smc_mh_run(ps, kernel, settings, rng_chain);

    ChainResult res;
    res.m = m;
    res.post_mean = pooled_posterior_mean(out.store);
    const Decomposition dec = decompose(out.store);
    res.log_lik = dec.mean_log_lik;
    res.log_prior = dec.mean_log_prior;
    res.log_ml =
        relative_log_marginal_likelihood(out.store, cfg.truncation_prob, &res.mhm_ridged);
    res.acceptance = out.overall_acceptance;
    res.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.store = std::move(out.store);

    if (!out.trace.empty()) res.store_trace = std::move(out.trace);
    return res;
}

void write_summary(const std::string& csv_path, const std::string& txt_path,
                   const ExperimentConfig& cfg, const std::vector<int>& m_values,
                   const std::vector<McSummary>& summaries) {
    CsvWriter w(csv_path);
    w.field("m").field("parameter").field("mc_mean").field("lo95").field("hi95");
    w.endrow();
    for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
        const McSummary& s = summaries[mi];
        for (std::size_t j = 0; j < cfg.params.size(); ++j) {
            w.field(m_values[mi])
                .field(cfg.params[j].name)
                .field(s.param_mean[j])
                .field(s.param_lo95[j])
                .field(s.param_hi95[j]);
            w.endrow();
        }
        w.field(m_values[mi]).field("log_ml").field(s.log_ml_mean).field(s.log_ml_sd).field(0.0);
        w.endrow();
        w.field(m_values[mi])
            .field("log_likelihood")
            .field(s.log_lik_mean)
            .field(s.log_lik_sd)
            .field(0.0);
        w.endrow();
        w.field(m_values[mi])
            .field("log_prior")
            .field(s.log_prior_mean)
            .field(s.log_prior_sd)
            .field(0.0);
        w.endrow();
    }

    std::FILE* f = std::fopen(txt_path.c_str(), "wb");
    if (f == nullptr) throw Error("IoError", "cannot open '" + txt_path + "'");
    std::fprintf(f, "%-6s", "M");
    for (const auto& p : cfg.params) std::fprintf(f, " %16s", p.name.c_str());
    std::fprintf(f, " %12s %14s %12s\n", "log_ml", "log_lik", "log_prior");
    for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
        const McSummary& s = summaries[mi];
        std::fprintf(f, "%-6d", m_values[mi]);
        for (std::size_t j = 0; j < cfg.params.size(); ++j)
            std::fprintf(f, " %16.5g", s.param_mean[j]);
        std::fprintf(f, " %12.2f %14.2f %12.2f\n", s.log_ml_mean, s.log_lik_mean,
                     s.log_prior_mean);
        std::fprintf(f, "%-6s", "");
        for (std::size_t j = 0; j < cfg.params.size(); ++j) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "(%.4g,%.4g)", s.param_lo95[j], s.param_hi95[j]);
            std::fprintf(f, " %16s", buf);
        }
        std::fprintf(f, " %12s %14s %12s\n", "", "", "");
    }
    std::fclose(f);
}

} // namespace

std::string cmd_simulate(const ExperimentConfig& cfg, const std::string& out_path) {
    Rng rng(derive_seed(cfg.seed, {StreamData, 0}));
    const auto series =
        simulate_series(cfg.true_params, cfg.dgp_variant, cfg.sim_keep,
                        static_cast<int>(cfg.sim_total) - cfg.sim_keep, rng);
    write_series_csv(out_path, series);
    return out_path;
}

ReplicationRun run_replication(const ExperimentConfig& cfg, int replication,
                               const PipelineOptions& opts) {
    const auto rep = static_cast<std::uint64_t>(replication);
    ReplicationRun out;
    out.replication = replication;

    // Step 1: simulate data, sample the reduced-form posterior, fix the panel.
    Rng rng_data(derive_seed(cfg.seed, {StreamData, rep}));
    const auto series =
        simulate_series(cfg.true_params, cfg.dgp_variant, cfg.sim_keep,
                        static_cast<int>(cfg.sim_total) - cfg.sim_keep, rng_data);

    Rng rng_emp(derive_seed(cfg.seed, {StreamEmpirical, rep}));
    VarSampleDiagnostics var_diag;
    const auto var_draws = posterior_sample_var(series, cfg.hyper, cfg.n_draws, rng_emp, &var_diag);
    out.var_pd_rejects = var_diag.pd_rejects;
    const MomentPanel empirical = build_empirical_panel(var_draws, cfg.moment_grids());
    out.empirical = empirical;

    Rng rng_ref(derive_seed(cfg.seed, {StreamReference, rep}));
    const ReferenceSample reference =
        build_reference_sample(cfg.prior_specs(), cfg.h_draws, cfg.param_grids(), rng_ref);

    std::string dir;
    if (opts.emit_artifacts) {
        dir = rep_dir(opts, replication);
        fs::create_directories(dir);
        write_series_csv((fs::path(dir) / "data.csv").string(), series);
        write_empirical_draws_csv((fs::path(dir) / "empirical_draws.csv").string(), var_draws);
        write_panel_csv((fs::path(dir) / "empirical_hist.csv").string(), empirical);
    }

    // Step 2: one chain per M against the fixed panel.
    for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
        const int m = cfg.m_values[mi];
        Rng rng_init(derive_seed(cfg.seed, {StreamInit, rep, static_cast<std::uint64_t>(mi)}));
        Rng rng_chain(derive_seed(cfg.seed, {StreamChain, rep, static_cast<std::uint64_t>(mi)}));
        ChainResult chain = run_chain(cfg, empirical, reference, m, rng_init, rng_chain);

        if (opts.emit_artifacts) {
            const fs::path mdir = fs::path(dir) / m_tag(m);
            fs::create_directories(mdir);
            std::vector<std::string> names;
            for (const auto& p : cfg.params) names.push_back(p.name);
            write_draws_csv((mdir / "draws.csv").string(), chain.store, names, cfg.particles);
            write_trace_csv((mdir / "diagnostics.csv").string(), chain.store_trace);
        }
        out.chains.push_back(std::move(chain));
    }
    return out;
}

namespace {

ExperimentResult run_all(const ExperimentConfig& cfg, const PipelineOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    if (opts.emit_artifacts) fs::create_directories(opts.out_dir);

    ExperimentResult result;
    result.m_values = cfg.m_values;
    result.replications.resize(static_cast<std::size_t>(cfg.replications));

    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        for (int r = 0; r < cfg.replications; ++r)
            result.replications[static_cast<std::size_t>(r)] = run_replication(cfg, r, opts);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= cfg.replications) return;
                    result.replications[static_cast<std::size_t>(r)] =
                        run_replication(cfg, r, opts);
                }
            });
        for (auto& th : pool) th.join();
    }

    for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
        std::vector<ReplicationResult> rows;
        for (const auto& rep : result.replications) {
            ReplicationResult rr;
            rr.post_mean = rep.chains[mi].post_mean;
            rr.log_ml = rep.chains[mi].log_ml;
            rr.log_lik = rep.chains[mi].log_lik;
            rr.log_prior = rep.chains[mi].log_prior;
            rows.push_back(std::move(rr));
        }
        result.summaries.push_back(aggregate_replications(rows));
    }

    result.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace

ExperimentResult cmd_run(const ExperimentConfig& cfg, const PipelineOptions& opts) {
    ExperimentResult result = run_all(cfg, opts);
    if (opts.emit_artifacts) {
        write_summary((fs::path(opts.out_dir) / "summary.csv").string(),
                      (fs::path(opts.out_dir) / "summary.txt").string(), cfg, result.m_values,
                      result.summaries);
        RunManifest manifest;
        manifest.config_hash = config_hash(cfg);
        manifest.seed = cfg.seed;
        manifest.version = "0.1.0";
        manifest.wall_clock_sec = result.wall_clock_sec;
        manifest.artifacts = {"summary.csv", "summary.txt"};
        std::FILE* f =
            std::fopen((fs::path(opts.out_dir) / "manifest.json").string().c_str(), "wb");
        if (f == nullptr) throw Error("IoError", "cannot write manifest");
        const std::string text = emit_manifest(manifest);
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }
    return result;
}

ExperimentResult cmd_sweep_m(const ExperimentConfig& cfg, const std::vector<int>& m_values,
                             const PipelineOptions& opts) {
    ExperimentConfig sweep_cfg = cfg;
    if (!m_values.empty()) sweep_cfg.m_values = m_values;
    sweep_cfg.validate();
    ExperimentResult result = cmd_run(sweep_cfg, opts);
    if (opts.emit_artifacts) {
        CsvWriter w((fs::path(opts.out_dir) / "sweep.csv").string());
        w.field("m")
            .field("log_ml_mean")
            .field("log_ml_sd")
            .field("log_lik_mean")
            .field("log_lik_sd")
            .field("log_prior_mean")
            .field("log_prior_sd")
            .field("runtime_sec");
        w.endrow();
        for (std::size_t mi = 0; mi < result.m_values.size(); ++mi) {
            const McSummary& s = result.summaries[mi];
            double runtime = 0.0;
            for (const auto& rep : result.replications) runtime += rep.chains[mi].runtime_sec;
            w.field(result.m_values[mi])
                .field(s.log_ml_mean)
                .field(s.log_ml_sd)
                .field(s.log_lik_mean)
                .field(s.log_lik_sd)
                .field(s.log_prior_mean)
                .field(s.log_prior_sd)
                .field(runtime);
            w.endrow();
        }
    }
    return result;
}

} // namespace dmpi
