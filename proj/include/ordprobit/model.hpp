#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ordprobit/numkern.hpp"

namespace ordprobit {

// Ordinal regression data: design matrix X (rows x_i'), responses y_i in
// {1, ..., K}. n = 0 is legal; p = 0 is not.
struct OrdinalDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXi y;
    int K = 2;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

struct GaussianPrior {
    Eigen::VectorXd mean;
    SpdMatrix covariance;
};

// Ordered cutpoints alpha_1 < ... < alpha_{K-1}; alpha_0 = -inf and
// alpha_K = +inf are implicit.
class Thresholds {
  public:
    explicit Thresholds(Eigen::VectorXd cutpoints);

    Eigen::Index count() const { return cut_.size(); }     // K - 1
    int categories() const { return static_cast<int>(cut_.size()) + 1; }
    const Eigen::VectorXd& cutpoints() const { return cut_; }

    // Truncation bounds of the latent variable for response category y.
    double lower(int y) const;
    double upper(int y) const;
    Interval interval(int y) const { return {lower(y), upper(y)}; }

  private:
    Eigen::VectorXd cut_;
};

struct GaussianPosterior {
    Eigen::VectorXd mean;
    SpdMatrix covariance;
};

struct FitReport {
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    double elapsed_seconds = 0.0;
    double final_objective = 0.0;
    int skipped_site_events = 0;  // EP sites skipped by SPD guards
    bool used_fallback = false;   // Newton fell back to a derivative-free search
};

// Joint validation: type invariants plus mutual dimension consistency.
// Throws DimensionMismatch, CategoryOutOfRange, NonFiniteInput,
// UnorderedThresholds (the latter is raised by Thresholds itself).
void validate(const OrdinalDataset& dataset, const GaussianPrior& prior,
              const Thresholds& thresholds);

// Log-increment reparameterization: tau_1 = alpha_1,
// tau_k = log(alpha_k - alpha_{k-1}) for k >= 2. A bijection between
// ordered cutpoint vectors and R^{K-1}.
Eigen::VectorXd thresholds_to_tau(const Thresholds& t);
Thresholds tau_to_thresholds(const Eigen::VectorXd& tau);

}  // namespace ordprobit
