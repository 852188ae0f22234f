#include "ordprobit/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ordprobit {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto begin = cell.find_first_not_of(" \t\r");
        const auto end = cell.find_last_not_of(" \t\r");
        cells.push_back(begin == std::string::npos ? ""
                                                   : cell.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_double(const std::string& cell, const std::string& context) {
    if (cell.empty()) throw SchemaError("missing value in " + context);
    char* tail = nullptr;
    const double v = std::strtod(cell.c_str(), &tail);
    if (tail == cell.c_str() || *tail != '\0') {
        throw SchemaError("non-numeric value '" + cell + "' in " + context);
    }
    return v;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw SchemaError(path + " is empty");
    return rows;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data;
    data.reserve(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
    }
    j["data"] = data;  // row-major
    return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw SchemaError("matrix payload size mismatch");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[i * cols + c];
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), data.size());
}

}  // namespace

CsvDataset read_dataset_csv(const std::string& path) {
    const auto rows = read_csv(path);
    const auto& header = rows.front();
    Eigen::Index y_col = -1;
    std::vector<std::string> features;
    std::vector<Eigen::Index> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") {
            if (y_col >= 0) throw SchemaError("duplicate y column in " + path);
            y_col = static_cast<Eigen::Index>(c);
        } else {
            features.push_back(header[c]);
            feature_cols.push_back(static_cast<Eigen::Index>(c));
        }
    }
    if (y_col < 0) throw SchemaError("no column named 'y' in " + path);
    if (features.empty()) throw SchemaError("no covariate columns in " + path);

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size()) - 1;
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(features.size()));
    Eigen::VectorXi y(n);
    int max_y = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != header.size()) {
            throw SchemaError("row " + std::to_string(i + 2) + " of " + path +
                          " has the wrong number of cells");
        }
        const std::string ctx = path + " row " + std::to_string(i + 2);
        const double yv = parse_double(row[y_col], ctx);
        const int yi = static_cast<int>(yv);
        if (yv != yi) throw SchemaError("non-integer category in " + ctx);
        if (yi == 0) {
            throw SchemaError("category 0 found in " + ctx +
                          "; responses must be coded 1..K");
        }
        if (yi < 1) throw SchemaError("negative category in " + ctx);
        y[i] = yi;
        max_y = std::max(max_y, yi);
        for (std::size_t c = 0; c < feature_cols.size(); ++c) {
            X(i, static_cast<Eigen::Index>(c)) = parse_double(row[feature_cols[c]], ctx);
        }
    }
    return {OrdinalDataset{std::move(X), std::move(y), std::max(2, max_y)},
            std::move(features)};
}

Eigen::MatrixXd read_covariates_csv(const std::string& path,
                                    const std::vector<std::string>& feature_names) {
    const auto rows = read_csv(path);
    const auto& header = rows.front();
    std::vector<Eigen::Index> cols(feature_names.size(), -1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") continue;
        bool known = false;
        for (std::size_t f = 0; f < feature_names.size(); ++f) {
            if (header[c] == feature_names[f]) {
                cols[f] = static_cast<Eigen::Index>(c);
                known = true;
            }
        }
        if (!known) throw SchemaError("column '" + header[c] + "' is not part of the fit");
    }
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        if (cols[f] < 0) throw SchemaError("fit covariate '" + feature_names[f] +
                                       "' is missing from " + path);
    }
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size()) - 1;
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(feature_names.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::string ctx = path + " row " + std::to_string(i + 2);
        if (rows[i + 1].size() != header.size()) {
            throw SchemaError(ctx + " has the wrong number of cells");
        }
        for (std::size_t f = 0; f < feature_names.size(); ++f) {
            X(i, static_cast<Eigen::Index>(f)) = parse_double(rows[i + 1][cols[f]], ctx);
        }
    }
    return X;
}

Thresholds read_thresholds_csv(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.front().size() != 1 || rows.front()[0] != "alpha") {
        throw SchemaError(path + " must have a single column named 'alpha'");
    }
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(rows.size()) - 1);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        alpha[i] = parse_double(rows[i + 1][0], path);
    }
    return Thresholds(std::move(alpha));
}

Eigen::MatrixXd read_full_matrix_csv(const std::string& path) {
    const auto rows = read_csv(path);
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != c) {
            throw SchemaError(path + " is ragged");
        }
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = parse_double(rows[i][j], path + " row " + std::to_string(i + 1));
        }
    }
    return m;
}

FitMethod parse_method(const std::string& name) {
    if (name == "mfvb") return FitMethod::mfvb;
    if (name == "pmf") return FitMethod::pmf;
    if (name == "ep") return FitMethod::ep;
    throw SchemaError("unknown method '" + name + "'; expected mfvb, pmf, or ep");
}

std::string fit_to_json(const FitOutput& fit) {
    json j;
    j["schema_version"] = 1;
    switch (fit.method) {
        case FitMethod::mfvb: j["method"] = "mfvb"; break;
        case FitMethod::pmf: j["method"] = "pmf"; break;
        case FitMethod::ep: j["method"] = "ep"; break;
    }
    j["feature_names"] = fit.feature_names;
    j["prior"]["mean"] = vector_to_json(fit.prior.mean);
    j["prior"]["covariance"] = matrix_to_json(fit.prior.covariance.mat());
    j["thresholds"] = vector_to_json(fit.thresholds);
    j["threshold_mode"] = fit.thresholds_estimated ? "estimated" : "fixed";
    j["posterior"]["mean"] = vector_to_json(fit.posterior.mean);
    j["posterior"]["covariance"] = matrix_to_json(fit.posterior.covariance.mat());
    j["report"]["converged"] = fit.report.converged;
    j["report"]["iterations"] = fit.report.iterations;
    j["report"]["elapsed_seconds"] = fit.report.elapsed_seconds;
    j["report"]["final_objective"] = fit.report.final_objective;
    j["report"]["objective_trace"] = fit.report.objective_trace;
    j["report"]["skipped_site_events"] = fit.report.skipped_site_events;
    j["report"]["used_fallback"] = fit.report.used_fallback;
    if (fit.pmf) {
        j["pmf"]["xi"] = vector_to_json(fit.pmf->xi);
        j["pmf"]["sigma_star"] = vector_to_json(fit.pmf->sigma_star);
        j["pmf"]["V"] = matrix_to_json(fit.pmf->V.mat());
        j["pmf"]["design"] = matrix_to_json(fit.pmf->X);
        j["pmf"]["y"] = std::vector<int>(fit.pmf_y.data(), fit.pmf_y.data() + fit.pmf_y.size());
    }
    return j.dump(2) + "\n";
}

FitOutput fit_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("fit JSON does not parse: ") + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != 1) {
            throw SchemaError("unsupported fit schema version");
        }
        FitOutput fit;
        fit.method = parse_method(j.at("method").get<std::string>());
        fit.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        fit.prior.mean = vector_from_json(j.at("prior").at("mean"));
        fit.prior.covariance = SpdMatrix(matrix_from_json(j.at("prior").at("covariance")));
        fit.thresholds = vector_from_json(j.at("thresholds"));
        fit.thresholds_estimated = j.at("threshold_mode").get<std::string>() == "estimated";
        fit.posterior.mean = vector_from_json(j.at("posterior").at("mean"));
        fit.posterior.covariance =
            SpdMatrix(matrix_from_json(j.at("posterior").at("covariance")));
        const auto& rep = j.at("report");
        fit.report.converged = rep.at("converged").get<bool>();
        fit.report.iterations = rep.at("iterations").get<int>();
        fit.report.elapsed_seconds = rep.at("elapsed_seconds").get<double>();
        fit.report.final_objective = rep.at("final_objective").get<double>();
        fit.report.objective_trace = rep.at("objective_trace").get<std::vector<double>>();
        if (j.contains("pmf")) {
            const auto& pj = j.at("pmf");
            const auto yvec = pj.at("y").get<std::vector<int>>();
            fit.pmf_y = Eigen::Map<const Eigen::VectorXi>(yvec.data(), yvec.size());
            const Thresholds th(fit.thresholds);
            std::vector<Interval> intervals;
            intervals.reserve(yvec.size());
            for (int yi : yvec) intervals.push_back(th.interval(yi));
            fit.pmf = PmfPosterior{vector_from_json(pj.at("xi")),
                                   vector_from_json(pj.at("sigma_star")),
                                   SpdMatrix(matrix_from_json(pj.at("V"))),
                                   std::move(intervals),
                                   fit.prior,
                                   matrix_from_json(pj.at("design"))};
        }
        return fit;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("fit JSON is missing fields: ") + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write to " + path + " failed");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ordprobit
