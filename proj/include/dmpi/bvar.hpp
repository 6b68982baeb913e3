#ifndef DMPI_BVAR_HPP
#define DMPI_BVAR_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dmpi/histogram.hpp"
#include "dmpi/nkpc.hpp"
#include "dmpi/rng.hpp"

namespace dmpi {

// One posterior draw of the bivariate VAR(1) without intercept:
// y_t = A y_{t-1} + e_t, e_t ~ N(0, Sigma) with Sigma symmetric PD.
struct VarDraw {
    std::array<std::array<double, 2>, 2> coef;  // A
    double s11 = 1.0, s12 = 0.0, s22 = 1.0;     // Sigma entries
};

// Conjugate normal-inverse-Wishart hyperparameters.  The coefficient prior
// is matric normal with common mean and scalar precision; the innovation
// covariance prior is inverse Wishart with diagonal scale.
struct NiwHyper {
    double coef_prior_mean = 0.0;      // every entry of the prior mean matrix
    double coef_prior_precision = 1e-6; // >= 0; zero is the improper limit
    double iw_scale = 0.01;            // scale matrix iw_scale * I
    double iw_dof = 5.0;               // > dimension + 1

    void validate() const {
        if (coef_prior_precision < 0.0)
            throw Error("InvalidArgument", "coefficient precision must be nonnegative");
        if (!(iw_scale > 0.0)) throw Error("InvalidArgument", "inverse-Wishart scale must be positive");
        if (!(iw_dof > 3.0)) throw Error("InvalidArgument", "inverse-Wishart dof must exceed dim+1");
    }
};

struct VarSampleDiagnostics {
    std::int64_t pd_rejects = 0; // draws discarded for failing the PD check
};

// Direct sampling from the conjugate posterior: Sigma from its inverse-
// Wishart marginal, coefficients from the matric-normal conditional.
std::vector<VarDraw> posterior_sample_var(std::span<const std::array<double, 2>> data,
                                          const NiwHyper& hyper, std::int64_t n_draws, Rng& rng,
                                          VarSampleDiagnostics* diag = nullptr);

// [a12, a22, sigma11_sq, sigma12, sigma22_sq]
MomentVector draw_to_moments(const VarDraw& d);

// Bin the moment vectors of all draws; the result is held fixed while the
// structural parameters are sampled.
MomentPanel build_empirical_panel(std::span<const VarDraw> draws,
                                  const std::vector<SupportGrid>& grids);

} // namespace dmpi

#endif
