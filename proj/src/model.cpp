#include "ordprobit/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ordprobit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Thresholds::Thresholds(Eigen::VectorXd cutpoints) : cut_(std::move(cutpoints)) {
    if (cut_.size() == 0) throw UnorderedThresholds("at least one cutpoint is required");
    if (!cut_.allFinite()) throw NonFiniteInput("cutpoints must be finite");
    for (Eigen::Index k = 1; k < cut_.size(); ++k) {
        if (!(cut_[k - 1] < cut_[k])) {
            throw UnorderedThresholds("cutpoints must be strictly increasing");
        }
    }
}

double Thresholds::lower(int y) const {
    if (y < 1 || y > categories()) throw CategoryOutOfRange("category outside 1..K");
    return y == 1 ? -kInf : cut_[y - 2];
}

double Thresholds::upper(int y) const {
    if (y < 1 || y > categories()) throw CategoryOutOfRange("category outside 1..K");
    return y == categories() ? kInf : cut_[y - 1];
}

void validate(const OrdinalDataset& dataset, const GaussianPrior& prior,
              const Thresholds& thresholds) {
    if (dataset.p() == 0) throw DimensionMismatch("design matrix needs at least one column");
    if (dataset.K < 2) throw CategoryOutOfRange("K must be at least 2");
    if (dataset.y.size() != dataset.n()) {
        throw DimensionMismatch("response length does not match design rows");
    }
    if (!dataset.X.allFinite()) throw NonFiniteInput("design matrix has non-finite entries");
    for (Eigen::Index i = 0; i < dataset.y.size(); ++i) {
        if (dataset.y[i] < 1 || dataset.y[i] > dataset.K) {
            throw CategoryOutOfRange("response " + std::to_string(dataset.y[i]) +
                                     " outside 1.." + std::to_string(dataset.K));
        }
    }
    if (prior.mean.size() != dataset.p() || prior.covariance.dim() != dataset.p()) {
        throw DimensionMismatch("prior dimension does not match design columns");
    }
    if (!prior.mean.allFinite()) throw NonFiniteInput("prior mean has non-finite entries");
    if (thresholds.count() != dataset.K - 1) {
        throw DimensionMismatch("expected K-1 cutpoints");
    }
}

Eigen::VectorXd thresholds_to_tau(const Thresholds& t) {
    const Eigen::VectorXd& a = t.cutpoints();
    Eigen::VectorXd tau(a.size());
    tau[0] = a[0];
    for (Eigen::Index k = 1; k < a.size(); ++k) tau[k] = std::log(a[k] - a[k - 1]);
    return tau;
}

Thresholds tau_to_thresholds(const Eigen::VectorXd& tau) {
    if (tau.size() == 0) throw UnorderedThresholds("tau must be non-empty");
    if (!tau.allFinite()) throw NonFiniteInput("tau must be finite");
    Eigen::VectorXd a(tau.size());
    a[0] = tau[0];
    for (Eigen::Index k = 1; k < tau.size(); ++k) a[k] = a[k - 1] + std::exp(tau[k]);
    return Thresholds(a);
}

}  // namespace ordprobit
