#pragma once

#include <functional>
#include <vector>

#include "ordprobit/model.hpp"

namespace ordprobit {

struct PosteriorSamples {
    Eigen::MatrixXd draws;  // one row per retained iteration
    int burn_in = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// Data-augmentation Gibbs sampler at fixed thresholds:
//   beta | z ~ N(V(Sigma0^{-1}mu0 + X'z), V),   z_i | beta ~ TN(interval_i, x_i'beta, 1).
// Returns the post-burn-in beta draws; bitwise reproducible from the stream.
PosteriorSamples gibbs_fit(const OrdinalDataset& dataset, const GaussianPrior& prior,
                           const Thresholds& thresholds, int iterations, int burn_in,
                           RngStream& rng);

// Same chain with caller-supplied truncation intervals (used by tests to
// reduce the chain to the conjugate Gaussian linear model).
PosteriorSamples gibbs_fit_intervals(const Eigen::MatrixXd& X,
                                     const std::vector<Interval>& intervals,
                                     const GaussianPrior& prior, int iterations,
                                     int burn_in, RngStream& rng);

// 100 (1 - total variation) between the kernel-density estimate of a sampled
// marginal and an approximating density, integrated on a 512-point grid.
// The (mean, sd) overload evaluates a Gaussian approximation. Symmetric,
// bounded in [0, 100]. coordinate is 0-based.
double accuracy_score(const PosteriorSamples& samples, double approx_mean,
                      double approx_sd, Eigen::Index coordinate);
double accuracy_score(const PosteriorSamples& samples,
                      const std::function<double(double)>& approx_density,
                      Eigen::Index coordinate);

}  // namespace ordprobit
