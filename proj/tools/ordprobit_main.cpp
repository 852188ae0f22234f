// Command-line front end: fit / predict / simulate / compare / benchmark
// over CSV and JSON files. Exit codes: 0 success, 1 domain or validation
// error, 2 I/O error.

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "ordprobit/io.hpp"
#include "ordprobit/predict.hpp"
#include "ordprobit/simbench.hpp"

namespace op = ordprobit;

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ORDPROBIT_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 1;
}

struct PriorSpec {
    double mean = 0.0;
    double variance = 2.0;  // the experimental default
    std::string cov_file;   // optional full covariance, headerless p x p CSV

    op::GaussianPrior build(Eigen::Index p) const {
        if (!cov_file.empty()) {
            return {Eigen::VectorXd::Constant(p, mean),
                    op::SpdMatrix(op::read_full_matrix_csv(cov_file))};
        }
        return {Eigen::VectorXd::Constant(p, mean),
                op::SpdMatrix(variance * Eigen::MatrixXd::Identity(p, p))};
    }
};

op::FitOutput run_single_fit(const op::CsvDataset& csv, const op::GaussianPrior& prior,
                             op::FitMethod method, bool estimate,
                             const std::optional<op::Thresholds>& fixed, double epsilon,
                             int max_iterations) {
    op::FitOutput out;
    out.method = method;
    out.feature_names = csv.feature_names;
    out.prior = prior;
    out.thresholds_estimated = estimate;

    op::EbOptions eb;
    eb.method = method;
    eb.mfvb.epsilon = eb.pmf.epsilon = eb.ep.epsilon = epsilon;
    eb.mfvb.max_iterations = eb.pmf.max_iterations = max_iterations;
    eb.ep.max_sweeps = max_iterations;

    if (estimate) {
        op::EbResult r = op::estimate_thresholds(csv.data, prior, eb);
        out.thresholds = r.thresholds.cutpoints();
        out.posterior = std::move(r.posterior);
        out.report = std::move(r.fit_report);
        out.report.used_fallback = r.outer_report.used_fallback;
        if (method == op::FitMethod::pmf) {
            out.pmf = std::move(r.pmf_fit->posterior);
            out.pmf_y = csv.data.y;
        }
        return out;
    }

    const op::Thresholds& th = *fixed;
    out.thresholds = th.cutpoints();
    switch (method) {
        case op::FitMethod::mfvb: {
            op::MfvbResult r = op::fit_mfvb(csv.data, prior, th, eb.mfvb);
            out.posterior = std::move(r.posterior);
            out.report = std::move(r.report);
            break;
        }
        case op::FitMethod::pmf: {
            op::PmfResult r = op::fit_pmf(csv.data, prior, th, eb.pmf);
            out.posterior = std::move(*r.moments);
            out.report = std::move(r.report);
            out.pmf = std::move(r.posterior);
            out.pmf_y = csv.data.y;
            break;
        }
        case op::FitMethod::ep: {
            op::EpResult r = op::fit_ep(csv.data, prior, th, eb.ep);
            out.posterior = std::move(r.posterior);
            out.report = std::move(r.report);
            break;
        }
    }
    return out;
}

int cmd_fit(const std::string& data_path, const std::string& method_name,
            const PriorSpec& prior_spec, bool estimate, const std::string& thresholds_path,
            double epsilon, int max_iterations, const std::string& out_path) {
    const op::CsvDataset csv = op::read_dataset_csv(data_path);
    const op::GaussianPrior prior = prior_spec.build(csv.data.p());

    std::optional<op::Thresholds> fixed;
    if (!thresholds_path.empty()) {
        fixed = op::read_thresholds_csv(thresholds_path);
        estimate = false;
    }
    if (!estimate && !fixed) {
        throw op::DomainError("fixed-threshold mode requires --thresholds");
    }

    std::vector<op::FitMethod> methods;
    if (method_name == "all") {
        methods = {op::FitMethod::mfvb, op::FitMethod::pmf, op::FitMethod::ep};
    } else {
        methods = {op::parse_method(method_name)};
    }

    std::string payload;
    if (methods.size() == 1) {
        payload = op::fit_to_json(
            run_single_fit(csv, prior, methods[0], estimate, fixed, epsilon, max_iterations));
    } else {
        payload = "[\n";
        for (std::size_t i = 0; i < methods.size(); ++i) {
            payload += op::fit_to_json(
                run_single_fit(csv, prior, methods[i], estimate, fixed, epsilon,
                               max_iterations));
            if (i + 1 < methods.size()) {
                payload.back() = ',';
                payload += "\n";
            }
        }
        payload += "]\n";
    }
    op::write_text_file(out_path, payload);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_predict(const std::string& fit_path, const std::string& data_path, int draws,
                std::uint64_t seed, const std::string& out_path) {
    const op::FitOutput fit = op::fit_from_json(op::read_text_file(fit_path));
    const Eigen::MatrixXd Xnew = op::read_covariates_csv(data_path, fit.feature_names);
    const op::Thresholds thresholds(fit.thresholds);

    std::vector<op::PredictiveDistribution> preds;
    if (fit.method == op::FitMethod::pmf) {
        if (!fit.pmf) throw op::IoError("PMF fit JSON lacks the pmf block");
        op::RngStream rng(seed, 0);
        preds = op::predict_pmf(*fit.pmf, thresholds, Xnew, draws, rng);
    } else {
        preds = op::predict_gaussian(fit.posterior, thresholds, Xnew);
    }

    const int K = thresholds.categories();
    std::ostringstream csv;
    for (int k = 1; k <= K; ++k) csv << "prob_" << k << ",";
    for (int k = 1; k <= K - 1; ++k) csv << "cum_" << k << ",";
    csv << "class\n";
    for (const auto& d : preds) {
        for (Eigen::Index k = 0; k < d.probabilities.size(); ++k) {
            csv << fmt(d.probabilities[k]) << ",";
        }
        for (Eigen::Index k = 0; k < d.cumulative.size(); ++k) {
            csv << fmt(d.cumulative[k]) << ",";
        }
        csv << op::classify(d) << "\n";
    }
    op::write_text_file(out_path, csv.str());
    std::cout << "wrote " << out_path << " (" << preds.size() << " rows)\n";
    return 0;
}

int cmd_simulate(int n, int p, int K, std::uint64_t seed, const std::string& out_path,
                 const std::string& beta_path, const std::string& alpha_path) {
    op::SimConfig config;
    config.n = n;
    config.p = p;
    config.K = K;
    op::RngStream rng(seed, 0);
    const op::GeneratedData gen = op::gen_dataset(config, rng);

    std::ostringstream csv;
    csv << "y";
    for (int j = 1; j <= p; ++j) csv << ",x" << j;
    csv << "\n";
    for (int i = 0; i < n; ++i) {
        csv << gen.dataset.y[i];
        for (int j = 0; j < p; ++j) csv << "," << fmt(gen.dataset.X(i, j));
        csv << "\n";
    }
    op::write_text_file(out_path, csv.str());
    if (!beta_path.empty()) {
        std::ostringstream b;
        b << "beta\n";
        for (int j = 0; j < p; ++j) b << fmt(gen.true_beta[j]) << "\n";
        op::write_text_file(beta_path, b.str());
    }
    if (!alpha_path.empty()) {
        std::ostringstream a;
        a << "alpha\n";
        for (Eigen::Index k = 0; k < gen.true_thresholds.count(); ++k) {
            a << fmt(gen.true_thresholds.cutpoints()[k]) << "\n";
        }
        op::write_text_file(alpha_path, a.str());
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

std::vector<op::FitMethod> parse_methods(const std::string& arg) {
    if (arg == "all") return {op::FitMethod::mfvb, op::FitMethod::pmf, op::FitMethod::ep};
    std::vector<op::FitMethod> out;
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(op::parse_method(tok));
    if (out.empty()) throw op::DomainError("no methods given");
    return out;
}

int cmd_compare(const std::string& data_path, const PriorSpec& prior_spec,
                const std::string& methods_arg, const std::string& thresholds_path,
                const std::string& estimate_with, int gibbs_iters, int burn_in,
                std::uint64_t seed, const std::string& out_path) {
    const op::CsvDataset csv = op::read_dataset_csv(data_path);
    const op::GaussianPrior prior = prior_spec.build(csv.data.p());
    std::optional<op::Thresholds> thresholds;
    if (!thresholds_path.empty()) {
        thresholds = op::read_thresholds_csv(thresholds_path);
    } else {
        op::EbOptions eb;
        eb.method = op::parse_method(estimate_with);
        thresholds = op::estimate_thresholds(csv.data, prior, eb).thresholds;
    }
    op::OracleConfig oc;
    oc.iterations = gibbs_iters;
    oc.burn_in = burn_in;
    oc.seed = seed;
    const op::BenchResult bench = op::error_vs_oracle(csv.data, prior, *thresholds,
                                                      parse_methods(methods_arg), oc);
    std::ostringstream json;
    json << "{\n  \"thresholds\": [";
    for (Eigen::Index k = 0; k < thresholds->count(); ++k) {
        json << (k ? "," : "") << fmt(thresholds->cutpoints()[k]);
    }
    json << "],\n  \"methods\": [\n";
    for (std::size_t i = 0; i < bench.errors.size(); ++i) {
        const auto& e = bench.errors[i];
        json << "    {\"method\": \"" << op::method_name(e.method)
             << "\", \"mean_abs_error_mean\": " << fmt(e.mean_abs_error_mean)
             << ", \"mean_abs_error_sd\": " << fmt(e.mean_abs_error_sd)
             << ", \"elapsed_seconds\": " << fmt(e.elapsed_seconds) << "}"
             << (i + 1 < bench.errors.size() ? ",\n" : "\n");
    }
    json << "  ]\n}\n";
    op::write_text_file(out_path, json.str());

    std::cout << "method  mean-error  sd-error  seconds\n";
    for (const auto& e : bench.errors) {
        std::cout << std::left << std::setw(7) << op::method_name(e.method) << " "
                  << std::setw(11) << std::setprecision(4) << e.mean_abs_error_mean
                  << std::setw(10) << e.mean_abs_error_sd << e.elapsed_seconds << "\n";
    }
    return 0;
}

int cmd_benchmark(int n, int p, int K, int reps, std::uint64_t seed,
                  const std::string& methods_arg, bool coverage,
                  const std::string& levels_arg, int gibbs_iters, int burn_in, int jobs,
                  int failure_budget, const std::string& out_prefix) {
    if (reps <= 0) throw op::DomainError("reps must be positive");
    const std::vector<op::FitMethod> methods = parse_methods(methods_arg);
    op::SimConfig config;
    config.n = n;
    config.p = p;
    config.K = K;
    config.replications = reps;
    config.seed = seed;

    std::ostringstream csv, json;
    if (coverage) {
        std::vector<int> levels;
        std::stringstream ss(levels_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) levels.push_back(std::stoi(tok));
        const op::CoverageTable table =
            op::coverage_study(config, levels, methods, seed, jobs);
        if (table.failed_replications > failure_budget) {
            throw op::DomainError(std::to_string(table.failed_replications) +
                                  " replications failed (budget " +
                                  std::to_string(failure_budget) + ")");
        }
        csv << "method,level,coefficient,coverage_percent\n";
        json << "{\n  \"replications\": " << table.replications << ",\n  \"cells\": [\n";
        for (std::size_t i = 0; i < table.cells.size(); ++i) {
            const auto& cell = table.cells[i];
            for (int j = 0; j < p; ++j) {
                csv << op::method_name(cell.method) << "," << cell.level << "," << (j + 1)
                    << "," << fmt(cell.coverage_percent[j]) << "\n";
            }
            json << "    {\"method\": \"" << op::method_name(cell.method)
                 << "\", \"level\": " << cell.level << ", \"coverage_percent\": [";
            for (int j = 0; j < p; ++j) json << (j ? "," : "") << fmt(cell.coverage_percent[j]);
            json << "]}" << (i + 1 < table.cells.size() ? ",\n" : "\n");
        }
        json << "  ]\n}\n";

        std::cout << "coverage over " << table.replications << " replications\n";
        std::cout << "method  level  mean-coverage\n";
        for (const auto& cell : table.cells) {
            std::cout << std::left << std::setw(7) << op::method_name(cell.method) << " "
                      << std::setw(6) << cell.level << " " << std::setprecision(4)
                      << cell.coverage_percent.mean() << "\n";
        }
    } else {
        // One row per replication x method x metric; thresholds estimated
        // once per replication (EP direction) and shared across methods and
        // the Gibbs reference.
        csv << "replication,method,metric,value\n";
        json << "{\n  \"rows\": [\n";
        int failures = 0;
        bool first_row = true;
        std::vector<std::vector<double>> errs(methods.size()), sds(methods.size()),
            times(methods.size());
        for (int r = 0; r < reps; ++r) {
            op::RngStream rng(seed, static_cast<std::uint64_t>(r));
            try {
                const op::GeneratedData gen = op::gen_dataset(config, rng);
                const op::GaussianPrior prior{
                    Eigen::VectorXd::Zero(p),
                    op::SpdMatrix(2.0 * Eigen::MatrixXd::Identity(p, p))};
                op::EbOptions eb;
                const op::Thresholds alpha =
                    op::estimate_thresholds(gen.dataset, prior, eb).thresholds;
                op::OracleConfig oc;
                oc.iterations = gibbs_iters;
                oc.burn_in = burn_in;
                oc.seed = seed;
                oc.stream = 1000003ULL + static_cast<std::uint64_t>(r);
                const op::BenchResult bench =
                    op::error_vs_oracle(gen.dataset, prior, alpha, methods, oc);
                for (std::size_t mi = 0; mi < bench.errors.size(); ++mi) {
                    const auto& e = bench.errors[mi];
                    errs[mi].push_back(e.mean_abs_error_mean);
                    sds[mi].push_back(e.mean_abs_error_sd);
                    times[mi].push_back(e.elapsed_seconds);
                    const char* name = op::method_name(e.method);
                    csv << r << "," << name << ",mean_error," << fmt(e.mean_abs_error_mean)
                        << "\n"
                        << r << "," << name << ",sd_error," << fmt(e.mean_abs_error_sd)
                        << "\n"
                        << r << "," << name << ",elapsed_seconds,"
                        << fmt(e.elapsed_seconds) << "\n";
                    json << (first_row ? "" : ",\n") << "    {\"replication\": " << r
                         << ", \"method\": \"" << name << "\", \"mean_error\": "
                         << fmt(e.mean_abs_error_mean)
                         << ", \"sd_error\": " << fmt(e.mean_abs_error_sd)
                         << ", \"elapsed_seconds\": " << fmt(e.elapsed_seconds) << "}";
                    first_row = false;
                }
            } catch (const std::exception& ex) {
                ++failures;
                std::cerr << "replication " << r << " failed: " << ex.what() << "\n";
                if (failures > failure_budget) throw;
            }
        }
        json << "\n  ]\n}\n";

        std::cout << "method  mean-error  sd-error  median-seconds\n";
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            auto median = [](std::vector<double> v) {
                std::sort(v.begin(), v.end());
                return v.empty() ? 0.0 : v[v.size() / 2];
            };
            const double me =
                errs[mi].empty()
                    ? 0.0
                    : std::accumulate(errs[mi].begin(), errs[mi].end(), 0.0) / errs[mi].size();
            const double se =
                sds[mi].empty()
                    ? 0.0
                    : std::accumulate(sds[mi].begin(), sds[mi].end(), 0.0) / sds[mi].size();
            std::cout << std::left << std::setw(7) << op::method_name(methods[mi]) << " "
                      << std::setw(11) << std::setprecision(4) << me << std::setw(10) << se
                      << median(times[mi]) << "\n";
        }
    }
    op::write_text_file(out_prefix + ".csv", csv.str());
    op::write_text_file(out_prefix + ".json", json.str());
    std::cout << "wrote " << out_prefix << ".csv and " << out_prefix << ".json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate Bayesian inference for cumulative probit regression"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model to a dataset CSV");
    std::string fit_data, fit_method = "ep", fit_thresholds, fit_out = "fit.json";
    PriorSpec fit_prior;
    bool fit_estimate = true;
    double fit_epsilon = 1e-6;
    int fit_max_iter = 1000;
    fit->add_option("--data", fit_data, "dataset CSV (y + covariates)")->required();
    fit->add_option("--method", fit_method, "mfvb|pmf|ep|all (default ep)");
    fit->add_option("--prior-mean", fit_prior.mean, "prior mean (scalar, default 0)");
    fit->add_option("--prior-var", fit_prior.variance,
                    "prior variance (diagonal, default 2)");
    fit->add_option("--prior-cov-file", fit_prior.cov_file,
                    "full prior covariance, headerless p x p CSV");
    fit->add_flag("--estimate-thresholds,!--no-estimate-thresholds", fit_estimate,
                  "estimate cutpoints by empirical Bayes (default on)");
    fit->add_option("--thresholds", fit_thresholds, "fixed cutpoints CSV (column 'alpha')");
    fit->add_option("--epsilon", fit_epsilon, "convergence tolerance (default 1e-6)");
    fit->add_option("--max-iterations", fit_max_iter, "iteration/sweep cap (default 1000)");
    fit->add_option("--out", fit_out, "output JSON path (default fit.json)");

    // predict
    auto* predict = app.add_subcommand("predict", "predict categories for new rows");
    std::string pred_fit, pred_data, pred_out = "predictions.csv";
    int pred_draws = 1000;
    std::uint64_t pred_seed = default_seed();
    predict->add_option("--fit", pred_fit, "fit JSON from the fit subcommand")->required();
    predict->add_option("--data", pred_data, "covariate CSV (y column optional)")->required();
    predict->add_option("--draws", pred_draws, "Monte Carlo draws for PMF (default 1000)");
    predict->add_option("--seed", pred_seed, "RNG seed (default $ORDPROBIT_SEED or 1)");
    predict->add_option("--out", pred_out, "output CSV path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset CSV");
    int sim_n = 500, sim_p = 5, sim_K = 5;
    std::uint64_t sim_seed = default_seed();
    std::string sim_out = "simulated.csv", sim_beta, sim_alpha;
    simulate->add_option("--n", sim_n, "observations (default 500)");
    simulate->add_option("--p", sim_p, "covariates (default 5)");
    simulate->add_option("--K", sim_K, "categories (default 5)");
    simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--out", sim_out, "dataset CSV path");
    simulate->add_option("--beta-out", sim_beta, "write the true coefficients here");
    simulate->add_option("--thresholds-out", sim_alpha, "write the true cutpoints here");

    // compare
    auto* compare = app.add_subcommand("compare", "score methods against the Gibbs oracle");
    std::string cmp_data, cmp_methods = "all", cmp_thresholds, cmp_estimate_with = "ep",
                cmp_out = "compare.json";
    PriorSpec cmp_prior;
    int cmp_iters = 5000, cmp_burn = 1000;
    std::uint64_t cmp_seed = default_seed();
    compare->add_option("--data", cmp_data, "dataset CSV")->required();
    compare->add_option("--methods", cmp_methods, "comma list or 'all' (default all)");
    compare->add_option("--prior-mean", cmp_prior.mean, "prior mean (default 0)");
    compare->add_option("--prior-var", cmp_prior.variance, "prior variance (default 2)");
    compare->add_option("--prior-cov-file", cmp_prior.cov_file,
                        "full prior covariance, headerless p x p CSV");
    compare->add_option("--thresholds", cmp_thresholds, "fixed cutpoints CSV");
    compare->add_option("--estimate-with", cmp_estimate_with,
                        "method that estimates shared cutpoints (default ep)");
    compare->add_option("--gibbs-iters", cmp_iters, "Gibbs iterations (default 5000)");
    compare->add_option("--burn-in", cmp_burn, "Gibbs burn-in (default 1000)");
    compare->add_option("--seed", cmp_seed, "RNG seed");
    compare->add_option("--out", cmp_out, "output JSON path");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "replicated simulation study");
    int b_n = 500, b_p = 5, b_K = 5, b_reps = 10, b_iters = 5000, b_burn = 1000, b_jobs = 1,
        b_budget = 0;
    std::uint64_t b_seed = default_seed();
    std::string b_methods = "all", b_levels = "80,90,95", b_out = "benchmark";
    bool b_coverage = false;
    bench->add_option("--n", b_n, "observations per replication (default 500)");
    bench->add_option("--p", b_p, "covariates (default 5)");
    bench->add_option("--K", b_K, "categories (default 5)");
    bench->add_option("--reps", b_reps, "replications (default 10)");
    bench->add_option("--seed", b_seed, "RNG seed");
    bench->add_option("--methods", b_methods, "comma list or 'all'");
    bench->add_flag("--coverage", b_coverage, "run the credible-interval coverage study");
    bench->add_option("--levels", b_levels, "coverage levels, e.g. 80,90,95");
    bench->add_option("--gibbs-iters", b_iters, "Gibbs iterations (default 5000)");
    bench->add_option("--burn-in", b_burn, "Gibbs burn-in (default 1000)");
    bench->add_option("--jobs", b_jobs, "parallel replications (default 1)");
    bench->add_option("--failure-budget", b_budget, "tolerated failed replications");
    bench->add_option("--out", b_out, "output prefix (.csv and .json)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) {
            return cmd_fit(fit_data, fit_method, fit_prior, fit_estimate, fit_thresholds,
                           fit_epsilon, fit_max_iter, fit_out);
        }
        if (*predict) return cmd_predict(pred_fit, pred_data, pred_draws, pred_seed, pred_out);
        if (*simulate) {
            return cmd_simulate(sim_n, sim_p, sim_K, sim_seed, sim_out, sim_beta, sim_alpha);
        }
        if (*compare) {
            return cmd_compare(cmp_data, cmp_prior, cmp_methods, cmp_thresholds,
                               cmp_estimate_with, cmp_iters, cmp_burn, cmp_seed, cmp_out);
        }
        if (*bench) {
            return cmd_benchmark(b_n, b_p, b_K, b_reps, b_seed, b_methods, b_coverage,
                                 b_levels, b_iters, b_burn, b_jobs, b_budget, b_out);
        }
    } catch (const op::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
