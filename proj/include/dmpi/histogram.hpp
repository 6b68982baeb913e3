#ifndef DMPI_HISTOGRAM_HPP
#define DMPI_HISTOGRAM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dmpi/error.hpp"

namespace dmpi {

// Equal-width binning of a fixed finite support [lower, upper] into K bins.
// Bin k covers [lower + k*w, lower + (k+1)*w) with the last bin closed on
// the right; out-of-support values are clamped into the edge bins so that
// histogram totals are preserved.
struct SupportGrid {
    double lower = 0.0;
    double upper = 1.0;
    int bins = 2;

    double width() const { return (upper - lower) / static_cast<double>(bins); }

    void validate() const {
        if (!(upper > lower)) throw Error("InvalidGrid", "upper must exceed lower");
        if (bins < 2) throw Error("InvalidGrid", "need at least 2 bins");
    }
};

struct CountVector {
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
};

using MassVector = std::vector<double>;

// Counts of draws clamped into the edge bins, reported for diagnostics.
struct ClampStats {
    std::int64_t below = 0;
    std::int64_t above = 0;

    std::int64_t clamped() const { return below + above; }
    ClampStats& operator+=(const ClampStats& o) {
        below += o.below;
        above += o.above;
        return *this;
    }
};

int bin_index(double x, const SupportGrid& grid);

CountVector count_histogram(std::span<const double> draws, const SupportGrid& grid,
                            ClampStats* clamps = nullptr);

MassVector relative_frequencies(const CountVector& c);

// Smoothed Dirichlet concentrations: alpha[k] = delta + counts[k], so that the
// implied mass alpha[k]/scale is strictly positive in every bin.
struct Concentrations {
    std::vector<double> alpha;
    double scale = 0.0; // sum(alpha) = total + delta * K

    MassVector mass() const {
        MassVector q(alpha.size());
        for (std::size_t k = 0; k < alpha.size(); ++k) q[k] = alpha[k] / scale;
        return q;
    }
};

Concentrations dirichlet_concentrations(const CountVector& theory_counts, double delta);

// A set of moments binned on fixed per-moment supports; the per-moment
// totals all equal the number of draws that produced the panel.
struct MomentPanel {
    std::vector<SupportGrid> grids;
    std::vector<CountVector> counts;
    ClampStats clamps;

    std::size_t n_moments() const { return grids.size(); }
};

} // namespace dmpi

#endif
