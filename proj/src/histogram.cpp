#include "dmpi/histogram.hpp"

#include <cmath>

namespace dmpi {

int bin_index(double x, const SupportGrid& grid) {
    grid.validate();
    if (!std::isfinite(x)) throw Error("NonFiniteDraw", "cannot bin a non-finite value");
    if (x < grid.lower) return 0;
    if (x >= grid.upper) return grid.bins - 1;
    const int k = static_cast<int>(std::floor((x - grid.lower) / grid.width()));
    // floating-point guard: x just below upper can round up to bins
    return k >= grid.bins ? grid.bins - 1 : (k < 0 ? 0 : k);
}

CountVector count_histogram(std::span<const double> draws, const SupportGrid& grid,
                            ClampStats* clamps) {
    grid.validate();
    if (draws.empty()) throw Error("EmptySample", "count_histogram needs at least one draw");
    CountVector out;
    out.counts.assign(static_cast<std::size_t>(grid.bins), 0);
    for (double x : draws) {
        if (!std::isfinite(x)) throw Error("NonFiniteDraw", "cannot bin a non-finite value");
        if (clamps != nullptr) {
            if (x < grid.lower) ++clamps->below;
            else if (x > grid.upper) ++clamps->above; // x == upper closes the last bin
        }
        ++out.counts[static_cast<std::size_t>(bin_index(x, grid))];
    }
    out.total = static_cast<std::int64_t>(draws.size());
    return out;
}

MassVector relative_frequencies(const CountVector& c) {
    if (c.total <= 0) throw Error("EmptySample", "relative frequencies of an empty histogram");
    MassVector mass(c.counts.size());
    for (std::size_t k = 0; k < c.counts.size(); ++k)
        mass[k] = static_cast<double>(c.counts[k]) / static_cast<double>(c.total);
    return mass;
}

Concentrations dirichlet_concentrations(const CountVector& theory_counts, double delta) {
    if (!(delta > 0.0)) throw Error("InvalidSmoothing", "delta must be positive");
    Concentrations out;
    out.alpha.resize(theory_counts.counts.size());
    for (std::size_t k = 0; k < out.alpha.size(); ++k)
        out.alpha[k] = delta + static_cast<double>(theory_counts.counts[k]);
    out.scale = static_cast<double>(theory_counts.total) +
                delta * static_cast<double>(theory_counts.counts.size());
    return out;
}

} // namespace dmpi
