#pragma once

#include <vector>

#include "ordprobit/model.hpp"
#include "ordprobit/pmf.hpp"

namespace ordprobit {

// Class probabilities p_k = F_k - F_{k-1} for one query row, derived from a
// shared cumulative vector with F_0 = 0 and F_K = 1, so they telescope to 1
// exactly.
struct PredictiveDistribution {
    Eigen::VectorXd probabilities;  // length K
    Eigen::VectorXd cumulative;     // length K-1, F_1..F_{K-1}
};

// Closed form under a Gaussian posterior:
//   F_k(x) = Phi[(alpha_k - x'mu) / sqrt(1 + x'Sigma x)].
std::vector<PredictiveDistribution> predict_gaussian(const GaussianPosterior& post,
                                                     const Thresholds& thresholds,
                                                     const Eigen::MatrixXd& Xnew);

// Monte Carlo under the PMF posterior: averages the conditional-Gaussian
// cumulative probabilities over z-draws. One set of draws is shared across
// all categories and query rows, which keeps every cumulative vector
// monotone draw by draw.
std::vector<PredictiveDistribution> predict_pmf(const PmfPosterior& post,
                                                const Thresholds& thresholds,
                                                const Eigen::MatrixXd& Xnew, int draws,
                                                RngStream& rng);

// Arg-max category; ties break to the smallest k.
int classify(const PredictiveDistribution& dist);

}  // namespace ordprobit
