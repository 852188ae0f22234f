#pragma once

#include <utility>

#include "ordprobit/model.hpp"

namespace ordprobit {

// Coordinate-ascent state of the fully factorized approximation.
// After every full sweep, betabar = V (prior_shift + X' zbar).
struct MfvbState {
    Eigen::VectorXd zbar;         // E_q[z_i]
    Eigen::VectorXd betabar;      // E_q[beta]
    Eigen::MatrixXd V;            // (Sigma0^{-1} + X'X)^{-1}
    Eigen::VectorXd prior_shift;  // Sigma0^{-1} mu0
};

struct MfvbOptions {
    double epsilon = 1e-6;
    int max_iterations = 1000;
};

struct MfvbResult {
    GaussianPosterior posterior;
    FitReport report;
};

// Variable part of the evidence lower bound (the additive constant is
// dropped, so traces are comparable within a fit, not across priors):
//   sum_i log[Phi(a_hi - x_i'betabar) - Phi(a_lo - x_i'betabar)]
//   - (betabar - mu0)' Sigma0^{-1} (betabar - mu0) / 2.
double elbo_mfvb(const MfvbState& state, const OrdinalDataset& dataset,
                 const GaussianPrior& prior, const Thresholds& thresholds);

MfvbResult fit_mfvb(const OrdinalDataset& dataset, const GaussianPrior& prior,
                    const Thresholds& thresholds, const MfvbOptions& options = {});

// Shared by the fitters: zbar_i initialized at the truncated-normal mean
// under the prior-mean linear predictor.
Eigen::VectorXd initial_zbar(const OrdinalDataset& dataset, const GaussianPrior& prior,
                             const Thresholds& thresholds);

// Shared by the fitters and the Gibbs sampler: (Sigma0^{-1} + X'X)^{-1} and
// Sigma0^{-1} mu0, formed through a single Cholesky factorization each.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> posterior_precision_pieces(
    const Eigen::MatrixXd& X, const GaussianPrior& prior);

}  // namespace ordprobit
