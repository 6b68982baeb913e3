#include "dmpi/priors.hpp"

#include <cmath>

#include "dmpi/numeric.hpp"

namespace dmpi {

std::string to_string(PriorFamily f) {
    switch (f) {
        case PriorFamily::Beta: return "beta";
        case PriorFamily::Gamma: return "gamma";
        case PriorFamily::Normal: return "normal";
        case PriorFamily::TruncatedNormal: return "truncated_normal";
        case PriorFamily::Uniform: return "uniform";
    }
    return "unknown";
}

PriorFamily prior_family_from_string(const std::string& s) {
    if (s == "beta") return PriorFamily::Beta;
    if (s == "gamma") return PriorFamily::Gamma;
    if (s == "normal") return PriorFamily::Normal;
    if (s == "truncated_normal") return PriorFamily::TruncatedNormal;
    if (s == "uniform") return PriorFamily::Uniform;
    throw Error("InfeasiblePrior", "unknown prior family '" + s + "'");
}

PriorParams parameterize(const PriorSpec& spec) {
    PriorParams p;
    switch (spec.family) {
        case PriorFamily::Beta: {
            if (!(spec.mean > 0.0 && spec.mean < 1.0))
                throw Error("InfeasiblePrior", "beta mean must lie in (0,1)");
            const double var = spec.sd * spec.sd;
            if (!(var > 0.0 && var < spec.mean * (1.0 - spec.mean)))
                throw Error("InfeasiblePrior", "beta needs sd^2 < mean*(1-mean)");
            // a = mean*v, b = (1-mean)*v with v = mean(1-mean)/sd^2 - 1
            const double v = spec.mean * (1.0 - spec.mean) / var - 1.0;
            p.a = spec.mean * v;
            p.b = (1.0 - spec.mean) * v;
            p.lo = 0.0;
            p.hi = 1.0;
            return p;
        }
        case PriorFamily::Gamma: {
            if (!(spec.mean > 0.0 && spec.sd > 0.0))
                throw Error("InfeasiblePrior", "gamma needs positive mean and sd");
            p.a = spec.mean * spec.mean / (spec.sd * spec.sd); // shape
            p.b = spec.sd * spec.sd / spec.mean;               // scale
            p.lo = 0.0;
            p.hi = pos_inf;
            return p;
        }
        case PriorFamily::Normal: {
            if (!(spec.sd > 0.0)) throw Error("InfeasiblePrior", "normal needs positive sd");
            p.a = spec.mean;
            p.b = spec.sd;
            p.lo = neg_inf;
            p.hi = pos_inf;
            return p;
        }
        case PriorFamily::TruncatedNormal: {
            if (!(spec.sd > 0.0))
                throw Error("InfeasiblePrior", "truncated normal needs positive sd");
            p.a = spec.mean;
            p.b = spec.sd;
            p.lo = spec.bounds ? spec.bounds->first : 0.0;
            p.hi = spec.bounds ? spec.bounds->second : pos_inf;
            if (!(p.hi > p.lo)) throw Error("InfeasiblePrior", "empty truncation interval");
            return p;
        }
        case PriorFamily::Uniform: {
            if (!spec.bounds) throw Error("InfeasiblePrior", "uniform requires bounds");
            p.a = spec.bounds->first;
            p.b = spec.bounds->second;
            if (!(p.b > p.a)) throw Error("InfeasiblePrior", "uniform bounds out of order");
            p.lo = p.a;
            p.hi = p.b;
            return p;
        }
    }
    throw Error("InfeasiblePrior", "unhandled prior family");
}

double sample_prior(const PriorSpec& spec, Rng& rng) {
    const PriorParams p = parameterize(spec);
    switch (spec.family) {
        case PriorFamily::Beta: return rng.beta(p.a, p.b);
        case PriorFamily::Gamma: return rng.gamma(p.a, p.b);
        case PriorFamily::Normal: return rng.normal(p.a, p.b);
        case PriorFamily::TruncatedNormal: return rng.truncated_normal(p.a, p.b, p.lo, p.hi);
        case PriorFamily::Uniform: return rng.uniform(p.a, p.b);
    }
    throw Error("InfeasiblePrior", "unhandled prior family");
}

double prior_mean(const PriorSpec& spec) {
    if (spec.family == PriorFamily::Uniform) {
        const PriorParams p = parameterize(spec);
        return 0.5 * (p.a + p.b);
    }
    return spec.mean;
}

double prior_sd(const PriorSpec& spec) {
    if (spec.family == PriorFamily::Uniform) {
        const PriorParams p = parameterize(spec);
        return (p.b - p.a) / std::sqrt(12.0);
    }
    return spec.sd;
}

std::pair<double, double> prior_support(const PriorSpec& spec) {
    const PriorParams p = parameterize(spec);
    return {p.lo, p.hi};
}

SupportGrid default_param_grid(const PriorSpec& spec, int bins) {
    SupportGrid g;
    g.bins = bins;
    switch (spec.family) {
        case PriorFamily::Beta:
            g.lower = 0.0;
            g.upper = 1.0;
            break;
        case PriorFamily::Gamma:
        case PriorFamily::TruncatedNormal: {
            const PriorParams p = parameterize(spec);
            g.lower = std::max(0.0, p.lo);
            g.upper = spec.mean + 10.0 * spec.sd;
            if (std::isfinite(p.hi) && p.hi < g.upper) g.upper = p.hi;
            break;
        }
        case PriorFamily::Normal:
            g.lower = spec.mean - 10.0 * spec.sd;
            g.upper = spec.mean + 10.0 * spec.sd;
            break;
        case PriorFamily::Uniform: {
            const PriorParams p = parameterize(spec);
            g.lower = p.a;
            g.upper = p.b;
            break;
        }
    }
    g.validate();
    return g;
}

ReferenceSample build_reference_sample(const std::vector<PriorSpec>& specs, std::int64_t h_draws,
                                       const std::vector<SupportGrid>& grids, Rng& rng) {
    if (specs.size() != grids.size())
        throw Error("ShapeMismatch", "one grid per parameter required");
    if (h_draws < 1) throw Error("EmptySample", "reference sample needs draws");

    ReferenceSample ref;
    ref.h_draws = h_draws;
    ref.grids = grids;
    const std::size_t b = specs.size();
    ref.draws.resize(static_cast<std::size_t>(h_draws) * b);
    for (std::int64_t h = 0; h < h_draws; ++h)
        for (std::size_t j = 0; j < b; ++j)
            ref.draws[static_cast<std::size_t>(h) * b + j] = sample_prior(specs[j], rng);

    ref.hist_counts.resize(b);
    ref.hist_mass.resize(b);
    std::vector<double> column(static_cast<std::size_t>(h_draws));
    for (std::size_t j = 0; j < b; ++j) {
        for (std::int64_t h = 0; h < h_draws; ++h)
            column[static_cast<std::size_t>(h)] = ref.draws[static_cast<std::size_t>(h) * b + j];
        ref.hist_counts[j] = count_histogram(column, grids[j]);
        ref.hist_mass[j] = relative_frequencies(ref.hist_counts[j]);
    }
    return ref;
}

} // namespace dmpi
