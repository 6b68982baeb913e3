#ifndef DMPI_PIPELINE_HPP
#define DMPI_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "dmpi/config.hpp"
#include "dmpi/evaluation.hpp"
#include "dmpi/sampler.hpp"

namespace dmpi {

struct PipelineOptions {
    std::string out_dir;
    int threads = 1;
    bool emit_artifacts = true;
    bool dry_run = false;
};

// One (replication, M) chain with its evaluation.
struct ChainResult {
    int m = 1;
    std::vector<double> post_mean; // pooled posterior mean per parameter
    double log_ml = 0.0;
    double log_lik = 0.0;
    double log_prior = 0.0;
    double acceptance = 0.0;
    double runtime_sec = 0.0;
    bool mhm_ridged = false;
    PosteriorStore store;
    std::vector<DiagnosticsRow> store_trace;
};

struct ReplicationRun {
    int replication = 0;
    MomentPanel empirical; // the fixed moment panel of this replication
    std::int64_t var_pd_rejects = 0;
    std::vector<ChainResult> chains; // one per M, in config order
};

struct ExperimentResult {
    std::vector<ReplicationRun> replications;
    // summaries per M across replications, in config order
    std::vector<int> m_values;
    std::vector<McSummary> summaries;
    double wall_clock_sec = 0.0;
};

// Simulate one data set from the calibrated data-generating process and
// write it as (t, d_pi, phi).
std::string cmd_simulate(const ExperimentConfig& cfg, const std::string& out_path);

// Full two-step pipeline over all replications and m_values.
ExperimentResult cmd_run(const ExperimentConfig& cfg, const PipelineOptions& opts);

// Same pipeline restricted to the supplied m_values, with a per-M curve of
// the evaluation metrics written to sweep.csv.
ExperimentResult cmd_sweep_m(const ExperimentConfig& cfg, const std::vector<int>& m_values,
                             const PipelineOptions& opts);

// Internal building block, exposed for tests: run one replication end to
// end with its derived random streams.
ReplicationRun run_replication(const ExperimentConfig& cfg, int replication,
                               const PipelineOptions& opts);

} // namespace dmpi

#endif
