#pragma once

#include <optional>
#include <vector>

#include "ordprobit/model.hpp"

namespace ordprobit {

// Partially factorized approximation: one truncated-normal site per
// observation with locations xi_i, shared scales sigma_star_i
// = (1 - x_i' V x_i)^{-1/2}, and the exact conditional Gaussian for beta
// given z carried through V. Holds everything needed to sample beta.
struct PmfPosterior {
    Eigen::VectorXd xi;
    Eigen::VectorXd sigma_star;       // every entry >= 1
    SpdMatrix V;
    std::vector<Interval> intervals;  // [alpha_{y_i-1}, alpha_{y_i}]
    GaussianPrior prior;
    Eigen::MatrixXd X;

    Eigen::Index n() const { return xi.size(); }
    Eigen::Index p() const { return X.cols(); }
};

struct PmfOptions {
    double epsilon = 1e-6;
    int max_iterations = 1000;
    bool compute_moments = true;
};

struct PmfResult {
    PmfPosterior posterior;
    std::optional<GaussianPosterior> moments;
    FitReport report;
};

struct PmfState {
    Eigen::VectorXd zbar;
    Eigen::VectorXd xi;
    Eigen::VectorXd sigma_star;
};

// Variable part of the PMF evidence lower bound, evaluated without forming
// any n-by-n matrix: quadratic forms in (I - X V X') collapse to
// z'z - (X'z)' V (X'z).
double elbo_pmf(const PmfState& state, const OrdinalDataset& dataset,
                const GaussianPrior& prior, const Thresholds& thresholds);

PmfResult fit_pmf(const OrdinalDataset& dataset, const GaussianPrior& prior,
                  const Thresholds& thresholds, const PmfOptions& options = {});

// Independent draws from the beta marginal: z from the optimal
// truncated-normal sites, then beta from the conditional Gaussian.
// Returns count rows of length p.
Eigen::MatrixXd pmf_sample_beta(const PmfPosterior& post, int count, RngStream& rng);

}  // namespace ordprobit
