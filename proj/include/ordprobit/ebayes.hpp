#pragma once

#include <optional>

#include "ordprobit/ep.hpp"
#include "ordprobit/mfvb.hpp"
#include "ordprobit/pmf.hpp"

namespace ordprobit {

enum class FitMethod { mfvb, pmf, ep };

struct EbOptions {
    FitMethod method = FitMethod::ep;
    double outer_tolerance = 1e-6;
    int max_outer_iterations = 50;
    MfvbOptions mfvb;
    PmfOptions pmf;
    EpOptions ep;
};

struct EbResult {
    Thresholds thresholds;
    GaussianPosterior posterior;         // Gaussian moments of the chosen method
    std::optional<PmfResult> pmf_fit;    // full PMF output when method == pmf
    std::optional<EpSites> ep_sites;     // when method == ep
    FitReport outer_report;              // the alternation itself
    FitReport fit_report;                // final inner fit at the final cutpoints
};

// Cutpoint gradient of the approximate marginal likelihood at a frozen
// posterior mean: component k sums phi/Phi-difference ratios over the
// observations whose truncation interval touches alpha_k.
Eigen::VectorXd grad_alpha(const Eigen::VectorXd& betabar, const OrdinalDataset& dataset,
                           const Thresholds& thresholds);

// Offset-parameterized profile log-likelihood of the cutpoints,
// sum_i log[Phi(alpha_{y_i} - o_i) - Phi(alpha_{y_i-1} - o_i)],
// and its gradient / tridiagonal Hessian in alpha. Exposed for the Newton
// step and for derivative checks.
double alpha_objective(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y, int K,
                       const Thresholds& thresholds);
Eigen::VectorXd alpha_gradient(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y,
                               int K, const Thresholds& thresholds);
Eigen::MatrixXd alpha_hessian(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y,
                              int K, const Thresholds& thresholds);

// One full inner optimization: maximizes alpha_objective over the cutpoints
// in log-increment space by Newton with backtracking; falls back to a
// golden-section coordinate search when Newton cannot make progress.
// Returns the maximizer; sets used_fallback when the fallback ran.
Thresholds maximize_alpha(const Eigen::VectorXd& offsets, const Eigen::VectorXi& y, int K,
                          const Thresholds& start, bool* used_fallback = nullptr);

// Alternates fits of the chosen method with Newton threshold updates until
// the cutpoints move less than outer_tolerance in the max norm.
EbResult estimate_thresholds(const OrdinalDataset& dataset, const GaussianPrior& prior,
                             const EbOptions& options = {});

}  // namespace ordprobit
