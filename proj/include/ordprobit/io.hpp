#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ordprobit/ebayes.hpp"

namespace ordprobit {

// The file could not be opened, read, or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The file was readable but its content violates the expected format.
struct SchemaError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dataset CSV: header row, one integer column named `y`, every other column
// numeric and taken into X in file order. Missing or non-numeric cells are a
// hard error; 0-based category coding is rejected rather than shifted.
struct CsvDataset {
    OrdinalDataset data;
    std::vector<std::string> feature_names;
};
CsvDataset read_dataset_csv(const std::string& path);

// Covariate-only CSV for prediction: a `y` column, if present, is ignored.
// Columns are matched to `feature_names` by name.
Eigen::MatrixXd read_covariates_csv(const std::string& path,
                                    const std::vector<std::string>& feature_names);

// One-column CSV (header `alpha`) holding the fixed cutpoints.
Thresholds read_thresholds_csv(const std::string& path);

// Headerless rectangular numeric CSV (e.g. a full prior covariance).
Eigen::MatrixXd read_full_matrix_csv(const std::string& path);

// Everything a fit emits; round-trips through the versioned JSON schema.
struct FitOutput {
    FitMethod method = FitMethod::ep;
    std::vector<std::string> feature_names;
    GaussianPrior prior;
    Eigen::VectorXd thresholds;
    bool thresholds_estimated = true;
    GaussianPosterior posterior;
    FitReport report;
    // PMF only: enough state to draw from the posterior again.
    std::optional<PmfPosterior> pmf;
    Eigen::VectorXi pmf_y;  // per-observation categories, rebuild the intervals
};

std::string fit_to_json(const FitOutput& fit);
FitOutput fit_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

FitMethod parse_method(const std::string& name);

}  // namespace ordprobit
