#pragma once

#include <map>
#include <vector>

#include "ordprobit/ebayes.hpp"
#include "ordprobit/oracle.hpp"

namespace ordprobit {

struct SimConfig {
    int n = 500;
    int p = 5;
    int K = 5;
    int replications = 100;
    std::uint64_t seed = 1;
    // Composition of the true coefficient vector. Defaults: 20% zeros,
    // 40% ones, 40% minus-ones.
    double prop_zero = 0.2;
    double prop_pos = 0.4;
    double prop_neg = 0.4;
};

struct GeneratedData {
    OrdinalDataset dataset;
    Eigen::VectorXd true_beta;
    Thresholds true_thresholds;
};

// Covariates U[0,1], columns affinely rescaled to mean 0 and sd 0.5 (sample
// sd, n-1 denominator); latent z_i ~ N(x_i'beta, 1); K-1 cutoffs drawn
// uniformly over [min z, max z], sorted. Cutoffs that leave a category empty
// are redrawn up to 100 times, then DegenerateCutoffs.
GeneratedData gen_dataset(const SimConfig& config, RngStream& rng);

struct MethodError {
    FitMethod method;
    double mean_abs_error_mean = 0.0;  // (1/p) sum_j |E_q - E_mcmc|
    double mean_abs_error_sd = 0.0;    // same for posterior sds
    double elapsed_seconds = 0.0;
};

struct OracleConfig {
    int iterations = 5000;
    int burn_in = 1000;
    std::uint64_t seed = 17;
    std::uint64_t stream = 0;
};

struct BenchResult {
    std::vector<MethodError> errors;
};

// Fits every requested method at the given fixed thresholds and scores the
// posterior means and sds against a Gibbs run on the same thresholds.
// Wall clock covers each fit only.
BenchResult error_vs_oracle(const OrdinalDataset& dataset, const GaussianPrior& prior,
                            const Thresholds& thresholds,
                            const std::vector<FitMethod>& methods,
                            const OracleConfig& oracle_config);

struct CoverageCell {
    FitMethod method;
    int level = 95;                     // nominal percentage
    Eigen::VectorXd coverage_percent;   // per coefficient
};

struct CoverageTable {
    std::vector<CoverageCell> cells;
    int replications = 0;         // successful replications entering the averages
    int failed_replications = 0;  // dropped after a fit failure
};

// Replicated coverage of Wald intervals mu_j +- z sd_j for the true
// coefficients, with thresholds estimated per method via the empirical-Bayes
// alternation. Replications run in parallel on `jobs` threads, each with its
// own substream, so results do not depend on the thread count.
CoverageTable coverage_study(const SimConfig& config, const std::vector<int>& levels,
                             const std::vector<FitMethod>& methods, std::uint64_t seed,
                             int jobs = 1);

struct TimingResult {
    std::vector<FitMethod> methods;
    std::vector<std::vector<double>> elapsed;  // [method][replication] seconds
};

// Wall clock of estimate_thresholds (fit plus threshold optimization) on
// fresh simulated datasets; data generation is excluded from the clock.
TimingResult timing_study(const SimConfig& config, const std::vector<FitMethod>& methods,
                          std::uint64_t seed, int jobs = 1);

const char* method_name(FitMethod m);

}  // namespace ordprobit
