#ifndef DMPI_CONFIG_HPP
#define DMPI_CONFIG_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmpi/bvar.hpp"
#include "dmpi/histogram.hpp"
#include "dmpi/nkpc.hpp"
#include "dmpi/priors.hpp"
#include "dmpi/sampler.hpp"

namespace dmpi {

// One estimated structural parameter: its researcher prior, the units its
// draws live in (a sigma prior may be stated for the standard deviation or
// for the variance), and an optional histogram support override.
struct ParamConfig {
    std::string name;
    PriorSpec prior;
    bool variance_units = false;
    std::optional<SupportGrid> grid_override;
};

// Full description of one Monte Carlo experiment.  Defaults reproduce the
// baseline misspecified-model configuration; every scale knob is explicit.
struct ExperimentConfig {
    // estimated model and the data-generating calibration
    ModelVariant variant = ModelVariant::MisspecifiedSingular;
    ModelVariant dgp_variant = ModelVariant::CorrectFullRank;
    NkpcParams true_params{};

    // simulated sample: total length and the kept tail
    std::int64_t sim_total = 30000;
    int sim_keep = 300;

    // empirical stage
    std::int64_t n_draws = 50000; // N
    NiwHyper hyper{};

    // moment discretization (shared bin count, per-moment supports)
    int moment_bins = 300;
    std::array<std::pair<double, double>, n_nkpc_moments> moment_supports = {
        std::pair<double, double>{0.0, 2.0},   // a12
        std::pair<double, double>{0.0, 2.0},   // a22
        std::pair<double, double>{0.0, 0.015}, // sigma11_sq
        std::pair<double, double>{0.0, 0.005}, // sigma12
        std::pair<double, double>{0.0, 0.005}, // sigma22_sq
    };

    // structural parameters (order defines the theta layout)
    std::vector<ParamConfig> params;

    // prior reference sample
    std::int64_t h_draws = 50000; // H
    int param_bins = 300;

    // sampler
    int particles = 1; // Z
    std::vector<int> m_values = {1, 10, 50, 100, 200, 300};
    std::int64_t iterations = 1000000;
    std::int64_t burn_in = 990000;
    std::int64_t thin = 1;
    bool init_rwmh = true;
    std::int64_t init_iterations = 30000;
    double psi0 = 0.25;
    double accept_lo = 0.08;
    double accept_hi = 0.12;
    std::int64_t adapt_window = 1000;
    bool adapt_psi = true;
    double ess_threshold = 0.5;
    bool systematic_resampling = false;
    DeltaSchedule delta{};
    LikelihoodMode likelihood_mode = LikelihoodMode::Js;
    std::int64_t trace_every = 10;

    // evaluation and replication control
    double truncation_prob = 0.9;
    int replications = 30;
    std::uint64_t seed = 42;

    int n_params() const { return static_cast<int>(params.size()); }

    std::vector<PriorSpec> prior_specs() const;
    std::vector<SupportGrid> moment_grids() const;
    std::vector<SupportGrid> param_grids() const;
    std::vector<std::pair<double, double>> param_supports() const;
    std::vector<bool> variance_flags() const;

    void validate() const;
};

// Baseline parameter blocks for the two model variants, informative priors
// centered on the calibration.
std::vector<ParamConfig> default_params(ModelVariant variant);

ExperimentConfig default_config(ModelVariant variant);

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string emit_config(const ExperimentConfig& cfg); // canonical, round-trips

std::uint64_t config_hash(const ExperimentConfig& cfg);

// Provenance record for one run: enough to reproduce the artifacts.
struct RunManifest {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version;
    double wall_clock_sec = 0.0;
    std::vector<std::string> artifacts;
};

std::string emit_manifest(const RunManifest& m);

} // namespace dmpi

#endif
