#pragma once

#include "ordprobit/model.hpp"

namespace ordprobit {

// Site parameters of the EP approximation: site i contributes precision
// k_i x_i x_i' and shift w_i x_i. k_i may be negative; sites need not be
// proper densities. log_z holds the site normalizers entering the marginal
// likelihood approximation.
struct EpSites {
    Eigen::VectorXd k;
    Eigen::VectorXd w;
    Eigen::VectorXd log_z;
};

// Global approximation in covariance form: S = Q^{-1}, natural shift r.
struct EpGlobal {
    SpdMatrix S;
    Eigen::VectorXd r;
};

// Moments of the tilted (cavity x likelihood-factor) distribution. The
// Selection-Normal closed form gives them from univariate zeta functions and
// a rank-one correction; log_z = log[Phi(v) - Phi(u)] <= 0.
struct HybridMoments {
    double log_z;
    Eigen::VectorXd mean;
    SpdMatrix covariance;
};

HybridMoments hybrid_moments(const SpdMatrix& cavity_S, const Eigen::VectorXd& cavity_r,
                             const Eigen::VectorXd& x, const Interval& interval);

struct EpOptions {
    double epsilon = 1e-6;
    int max_sweeps = 100;
    // Site parameters move damping * new + (1 - damping) * old. The default 1
    // is the plain update; lower it if a fit reports skipped sites.
    double damping = 1.0;
};

struct EpResult {
    GaussianPosterior posterior;
    EpSites sites;
    FitReport report;
};

EpResult fit_ep(const OrdinalDataset& dataset, const GaussianPrior& prior,
                const Thresholds& thresholds, const EpOptions& options = {});

// log of the integral of the unnormalized site product:
//   log Psi(r_ep, Q_ep) - log Psi(r_0, Q_0) - sum_i log Z_i,
// the EP approximation of the log marginal likelihood.
double ep_log_marginal(const EpGlobal& global, const EpSites& sites,
                       const GaussianPrior& prior);

}  // namespace ordprobit
