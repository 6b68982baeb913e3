#include "dmpi/nkpc.hpp"

#include <cmath>

namespace dmpi {

std::string to_string(ModelVariant v) {
    return v == ModelVariant::CorrectFullRank ? "correct" : "misspecified";
}

ModelVariant model_variant_from_string(const std::string& s) {
    if (s == "correct") return ModelVariant::CorrectFullRank;
    if (s == "misspecified") return ModelVariant::MisspecifiedSingular;
    throw Error("InvalidArgument", "unknown model variant '" + s + "'");
}

double kappa(double beta, double mu_p) {
    if (mu_p == 0.0) throw Error("DegenerateCalvo", "mu_p must be nonzero");
    return (1.0 - mu_p) * (1.0 - beta * mu_p) / mu_p;
}

bool params_valid(const NkpcParams& p, ModelVariant v) {
    if (!(p.beta > 0.0 && p.beta < 1.0)) return false;
    if (!(p.mu_p > 0.0 && p.mu_p < 1.0)) return false;
    if (!(p.rho > -1.0 && p.rho < 1.0)) return false;
    if (!(p.sigma_eps > 0.0)) return false;
    if (v == ModelVariant::CorrectFullRank && !(p.sigma_v >= 0.0)) return false;
    if (!(1.0 - p.beta * p.rho > 0.0)) return false;
    return true;
}

MomentVector population_moments(const NkpcParams& p, ModelVariant v) {
    if (!params_valid(p, v)) throw Error("InvalidArgument", "parameters violate model invariants");
    // Fundamental solution d_pi_t = c*phi_t + v_t with c = kappa/(1 - beta*rho),
    // so the VAR(1) loading on phi_{t-1} is c*rho and the innovation in the
    // d_pi equation is c*eps_t + v_t.
    const double c = kappa(p.beta, p.mu_p) / (1.0 - p.beta * p.rho);
    const double s_eps2 = p.sigma_eps * p.sigma_eps;
    MomentVector m;
    m[0] = c * p.rho;    // a12
    m[1] = p.rho;        // a22
    m[2] = c * c * s_eps2; // sigma11_sq (singular part)
    if (v == ModelVariant::CorrectFullRank) m[2] += p.sigma_v * p.sigma_v;
    m[3] = c * s_eps2;   // sigma12
    m[4] = s_eps2;       // sigma22_sq
    return m;
}

std::vector<std::array<double, 2>> simulate_series(const NkpcParams& p, ModelVariant v,
                                                   int keep, int burn_in, Rng& rng) {
    if (keep < 1) throw Error("InvalidArgument", "need at least one observation");
    if (burn_in < 0) throw Error("InvalidArgument", "negative burn-in");
    const double c = kappa(p.beta, p.mu_p) / (1.0 - p.beta * p.rho);
    const bool two_shocks = v == ModelVariant::CorrectFullRank;

    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(keep));
    double phi_prev = 0.0;
    for (int t = 0; t < burn_in + keep; ++t) {
        const double eps = p.sigma_eps > 0.0 ? rng.normal(0.0, p.sigma_eps) : 0.0;
        const double vshock =
            two_shocks && p.sigma_v > 0.0 ? rng.normal(0.0, p.sigma_v) : 0.0;
        const double d_pi = c * p.rho * phi_prev + c * eps + vshock;
        const double phi = p.rho * phi_prev + eps;
        if (t >= burn_in) out[static_cast<std::size_t>(t - burn_in)] = {d_pi, phi};
        phi_prev = phi;
    }
    return out;
}

bool NkpcMomentMap::operator()(std::span<const double> params, std::span<double> moments) const {
    const int b = n_params();
    if (params.size() != static_cast<std::size_t>(b) || moments.size() != n_nkpc_moments)
        throw Error("ShapeMismatch", "parameter row does not match the model variant");
    double vals[5] = {0, 0, 0, 0, 0};
    for (int j = 0; j < b; ++j) {
        double x = params[static_cast<std::size_t>(j)];
        if (!sqrt_entries.empty() && sqrt_entries[static_cast<std::size_t>(j)]) {
            if (x < 0.0) return false;
            x = std::sqrt(x);
        }
        vals[j] = x;
    }
    NkpcParams p;
    p.beta = vals[0];
    p.mu_p = vals[1];
    p.rho = vals[2];
    p.sigma_eps = vals[3];
    p.sigma_v = b == 5 ? vals[4] : 0.0;
    if (!params_valid(p, variant)) return false;
    const MomentVector m = population_moments(p, variant);
    for (int i = 0; i < n_nkpc_moments; ++i) moments[static_cast<std::size_t>(i)] = m[i];
    return true;
}

MomentPanel theoretical_panel(std::span<const double> theta, int m_rows,
                              const NkpcMomentMap& map,
                              const std::vector<SupportGrid>& grids) {
    if (grids.size() != n_nkpc_moments)
        throw Error("ShapeMismatch", "expected one grid per moment");
    const int b = map.n_params();
    if (theta.size() != static_cast<std::size_t>(m_rows) * static_cast<std::size_t>(b))
        throw Error("ShapeMismatch", "parameter matrix does not match m_rows");

    MomentPanel panel;
    panel.grids = grids;
    panel.counts.resize(grids.size());
    for (std::size_t i = 0; i < grids.size(); ++i) {
        panel.counts[i].counts.assign(static_cast<std::size_t>(grids[i].bins), 0);
        panel.counts[i].total = m_rows;
    }
    double moments[n_nkpc_moments];
    for (int r = 0; r < m_rows; ++r) {
        const auto row = theta.subspan(static_cast<std::size_t>(r) * static_cast<std::size_t>(b),
                                       static_cast<std::size_t>(b));
        if (!map(row, moments))
            throw Error("InvalidArgument", "parameter row violates model invariants");
        for (std::size_t i = 0; i < grids.size(); ++i) {
            const double x = moments[i];
            if (x < grids[i].lower) ++panel.clamps.below;
            else if (x > grids[i].upper) ++panel.clamps.above;
            ++panel.counts[i].counts[static_cast<std::size_t>(bin_index(x, grids[i]))];
        }
    }
    return panel;
}

} // namespace dmpi
