#ifndef DMPI_NKPC_HPP
#define DMPI_NKPC_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "dmpi/histogram.hpp"
#include "dmpi/rng.hpp"

namespace dmpi {

// Structural parameters of the single-equation Phillips-curve model:
//   d_pi_t = beta * E_t d_pi_{t+1} + kappa * phi_t + v_t
//   phi_t  = rho * phi_{t-1} + eps_t
// with kappa = (1 - mu_p)(1 - beta*mu_p) / mu_p.
struct NkpcParams {
    double beta = 0.98;
    double mu_p = 0.8;
    double rho = 0.8;
    double sigma_eps = 0.001;
    double sigma_v = 0.00025; // ignored by the singular variant
};

// The full-rank variant keeps both shocks; the singular variant drops the
// Phillips-curve shock, leaving one shock for two observables.
enum class ModelVariant { CorrectFullRank, MisspecifiedSingular };

std::string to_string(ModelVariant v);
ModelVariant model_variant_from_string(const std::string& s);

double kappa(double beta, double mu_p);

// true when the fundamental solution exists and shock scales are admissible
bool params_valid(const NkpcParams& p, ModelVariant v);

// Population moments of the implied bivariate VAR(1) in (d_pi, phi):
// [a12, a22, sigma11_sq, sigma12, sigma22_sq].
using MomentVector = std::array<double, 5>;

inline constexpr int n_nkpc_moments = 5;

MomentVector population_moments(const NkpcParams& p, ModelVariant v);

// Simulate the restricted VAR with i.i.d. normal shocks from a zero initial
// state; the first burn_in points are discarded.  Column 0 is d_pi,
// column 1 is phi.
std::vector<std::array<double, 2>> simulate_series(const NkpcParams& p, ModelVariant v,
                                                   int keep, int burn_in, Rng& rng);

// Map a packed parameter row (beta, mu_p, rho, sigma_eps[, sigma_v]) to the
// moment vector; entries flagged in sqrt_entries are drawn in variance units
// and converted before use.  Returns false for rows violating the model
// invariants.
struct NkpcMomentMap {
    ModelVariant variant = ModelVariant::CorrectFullRank;
    std::vector<bool> sqrt_entries; // empty = all entries already in natural units

    int n_params() const { return variant == ModelVariant::CorrectFullRank ? 5 : 4; }
    bool operator()(std::span<const double> params, std::span<double> moments) const;
};

// Bin the moments implied by each of the M parameter rows onto the given
// supports; the resulting per-moment totals all equal M.
MomentPanel theoretical_panel(std::span<const double> theta, int m_rows,
                              const NkpcMomentMap& map,
                              const std::vector<SupportGrid>& grids);

} // namespace dmpi

#endif
