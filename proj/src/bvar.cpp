#include "dmpi/bvar.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

namespace dmpi {

namespace {

using Eigen::Matrix2d;

// lower-triangular Bartlett factor of a Wishart(I, dof) draw
Matrix2d bartlett_factor(double dof, Rng& rng) {
    Matrix2d a = Matrix2d::Zero();
    a(0, 0) = std::sqrt(rng.chi_squared(dof));
    a(1, 1) = std::sqrt(rng.chi_squared(dof - 1.0));
    a(1, 0) = rng.normal();
    return a;
}

} // namespace

std::vector<VarDraw> posterior_sample_var(std::span<const std::array<double, 2>> data,
                                          const NiwHyper& hyper, std::int64_t n_draws, Rng& rng,
                                          VarSampleDiagnostics* diag) {
    hyper.validate();
    if (data.size() <= 10) throw Error("InvalidArgument", "series too short");
    for (const auto& row : data)
        if (!std::isfinite(row[0]) || !std::isfinite(row[1]))
            throw Error("NonFiniteDraw", "series contains non-finite values");
    if (n_draws < 0) throw Error("InvalidArgument", "negative draw count");

    // regression Y = X B + E with X the lagged series and B = A'
    const std::size_t t_eff = data.size() - 1;
    Matrix2d xtx = Matrix2d::Zero();
    Matrix2d xty = Matrix2d::Zero();
    Matrix2d yty = Matrix2d::Zero();
    for (std::size_t t = 0; t < t_eff; ++t) {
        const Eigen::Vector2d x(data[t][0], data[t][1]);
        const Eigen::Vector2d y(data[t + 1][0], data[t + 1][1]);
        xtx += x * x.transpose();
        xty += x * y.transpose();
        yty += y * y.transpose();
    }
    {
        const Eigen::SelfAdjointEigenSolver<Matrix2d> es(xtx);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > 1e-12 * std::max(1.0, hi)))
            throw Error("DegenerateDesign", "lagged regressors are collinear or constant");
    }

    const double prec = hyper.coef_prior_precision;
    const Matrix2d b0 = Matrix2d::Constant(hyper.coef_prior_mean);
    const Matrix2d kn = xtx + prec * Matrix2d::Identity();
    const Matrix2d vn = kn.inverse();
    const Matrix2d bn = vn * (prec * b0 + xty);
    const Matrix2d sn = hyper.iw_scale * Matrix2d::Identity() + yty +
                        prec * b0.transpose() * b0 - bn.transpose() * kn * bn;
    const double nun = hyper.iw_dof + static_cast<double>(t_eff);

    // Sigma^-1 ~ Wishart(Sn^-1, nun): factor Sn^-1 = C C', draw W = C A A' C'
    const Matrix2d sn_inv = sn.inverse();
    Eigen::LLT<Matrix2d> llt_sninv(sn_inv);
    if (llt_sninv.info() != Eigen::Success)
        throw Error("DegenerateDesign", "posterior scale matrix not positive definite");
    const Matrix2d c = llt_sninv.matrixL();
    const Matrix2d lv = Eigen::LLT<Matrix2d>(vn).matrixL();

    std::vector<VarDraw> out;
    out.reserve(static_cast<std::size_t>(n_draws));
    while (out.size() < static_cast<std::size_t>(n_draws)) {
        const Matrix2d t = c * bartlett_factor(nun, rng); // W = t t'
        // Sigma = W^-1 = t'^-1 t^-1
        const Matrix2d tinv = t.triangularView<Eigen::Lower>().solve(Matrix2d::Identity());
        const Matrix2d sigma = tinv.transpose() * tinv;

        Eigen::LLT<Matrix2d> lsig(sigma);
        if (lsig.info() != Eigen::Success || !(sigma(0, 0) > 0.0) || !(sigma(1, 1) > 0.0)) {
            if (diag != nullptr) ++diag->pd_rejects;
            continue;
        }

        Matrix2d z;
        z(0, 0) = rng.normal();
        z(0, 1) = rng.normal();
        z(1, 0) = rng.normal();
        z(1, 1) = rng.normal();
        const Matrix2d b = bn + lv * z * Matrix2d(lsig.matrixL()).transpose();

        VarDraw d;
        const Matrix2d a = b.transpose();
        d.coef = {{{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}}};
        d.s11 = sigma(0, 0);
        d.s12 = 0.5 * (sigma(0, 1) + sigma(1, 0));
        d.s22 = sigma(1, 1);
        out.push_back(d);
    }
    return out;
}

MomentVector draw_to_moments(const VarDraw& d) {
    return {d.coef[0][1], d.coef[1][1], d.s11, d.s12, d.s22};
}

MomentPanel build_empirical_panel(std::span<const VarDraw> draws,
                                  const std::vector<SupportGrid>& grids) {
    if (draws.empty()) throw Error("EmptySample", "empirical panel needs draws");
    if (grids.size() != n_nkpc_moments)
        throw Error("ShapeMismatch", "expected one grid per moment");

    MomentPanel panel;
    panel.grids = grids;
    panel.counts.resize(grids.size());
    for (std::size_t i = 0; i < grids.size(); ++i) {
        panel.counts[i].counts.assign(static_cast<std::size_t>(grids[i].bins), 0);
        panel.counts[i].total = static_cast<std::int64_t>(draws.size());
    }
    for (const VarDraw& d : draws) {
        const MomentVector m = draw_to_moments(d);
        for (std::size_t i = 0; i < grids.size(); ++i) {
            if (m[i] < grids[i].lower) ++panel.clamps.below;
            else if (m[i] > grids[i].upper) ++panel.clamps.above;
            ++panel.counts[i].counts[static_cast<std::size_t>(bin_index(m[i], grids[i]))];
        }
    }
    return panel;
}

} // namespace dmpi
