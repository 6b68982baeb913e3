#ifndef DMPI_PRIORS_HPP
#define DMPI_PRIORS_HPP

#include <optional>
#include <string>
#include <vector>

#include "dmpi/histogram.hpp"
#include "dmpi/rng.hpp"

namespace dmpi {

enum class PriorFamily { Beta, Gamma, Normal, TruncatedNormal, Uniform };

std::string to_string(PriorFamily f);
PriorFamily prior_family_from_string(const std::string& s);

// Researcher prior for one structural parameter, stated as mean/SD with
// optional truncation bounds.  For TruncatedNormal the mean/SD refer to the
// untruncated parent (location/scale); default bounds are (0, +inf).
// Uniform is stated by its bounds alone.
struct PriorSpec {
    PriorFamily family = PriorFamily::Normal;
    double mean = 0.0;
    double sd = 1.0;
    std::optional<std::pair<double, double>> bounds;
};

// Moment-matched internal parameters of each family.
struct PriorParams {
    // Beta: a, b.  Gamma: a = shape, b = scale.  Normal / TruncatedNormal:
    // a = location, b = scale.  Uniform: a = lower, b = upper.
    double a = 0.0;
    double b = 0.0;
    double lo = 0.0; // effective support lower bound
    double hi = 0.0; // effective support upper bound
};

PriorParams parameterize(const PriorSpec& spec);

double sample_prior(const PriorSpec& spec, Rng& rng);

// Mean and SD of the spec as stated (Uniform derives them from the bounds).
double prior_mean(const PriorSpec& spec);
double prior_sd(const PriorSpec& spec);

// Support interval used to validate proposals.
std::pair<double, double> prior_support(const PriorSpec& spec);

// Default histogram support for a parameter: the natural prior range.
SupportGrid default_param_grid(const PriorSpec& spec, int bins);

// Fixed reference sample: H joint i.i.d. draws from independent researcher
// priors, with per-parameter histograms cached on the given grids.
struct ReferenceSample {
    std::int64_t h_draws = 0;
    std::vector<SupportGrid> grids;
    std::vector<CountVector> hist_counts;
    std::vector<MassVector> hist_mass;
    std::vector<double> draws; // row-major H x B

    std::size_t n_params() const { return grids.size(); }
};

ReferenceSample build_reference_sample(const std::vector<PriorSpec>& specs, std::int64_t h_draws,
                                       const std::vector<SupportGrid>& grids, Rng& rng);

} // namespace dmpi

#endif
