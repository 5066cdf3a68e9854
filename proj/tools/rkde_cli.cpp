// Command-line front end: fit, score, influence, kl, auc, benchmark, synth.
//
// Every command exits 0 on success. Failures print a single line
//   error: <category>: <message>
// to stderr and exit with status 1 (2 for usage errors).

#include "rkde/rkde.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using rkde::json;

struct CommonOptions {
    std::string kernel = "gaussian";
    std::optional<double> sigma;
    double nu = 1.0;
    std::string loss = "hampel";
    std::optional<double> a, b, c;
    double tol = 1e-8;
    int max_iter = 200;
    std::string init = "median";
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_kernel_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--kernel", o.kernel, "Kernel family")
        ->check(CLI::IsMember({"gaussian", "student", "laplacian"}))
        ->capture_default_str();
    cmd->add_option("--sigma", o.sigma, "Bandwidth (default: median nearest-neighbour distance)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--nu", o.nu, "Student kernel degrees of freedom")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_fit_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--loss", o.loss, "Robust loss for rkde")
        ->check(CLI::IsMember({"hampel", "huber", "quadratic", "absolute"}))
        ->capture_default_str();
    cmd->add_option("--a", o.a, "Loss threshold a (default: median of median-RKDE distances)");
    cmd->add_option("--b", o.b, "Hampel threshold b (default: 75th percentile)");
    cmd->add_option("--c", o.c, "Hampel threshold c (default: 85th percentile)");
    cmd->add_option("--tol", o.tol, "Relative objective tolerance")->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "KIRWLS iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--init", o.init, "KIRWLS initialization")
        ->check(CLI::IsMember({"median", "uniform"}))
        ->capture_default_str();
}

void add_seed(CLI::App* cmd, CommonOptions& o, bool required) {
    auto* opt = cmd->add_option("--seed", o.seed, "Random seed");
    if (required) opt->required();
}

json common_config(const CommonOptions& o) {
    json j{{"kernel", o.kernel}, {"nu", o.nu},   {"loss", o.loss},         {"tol", o.tol},
           {"max_iter", o.max_iter}, {"init", o.init}};
    j["sigma"] = o.sigma ? json(*o.sigma) : json("auto");
    if (o.a) j["a"] = *o.a;
    if (o.b) j["b"] = *o.b;
    if (o.c) j["c"] = *o.c;
    if (o.seed) j["seed"] = *o.seed;
    return j;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        rkde::write_text_file(path, content);
    }
}

std::string csv_provenance(const json& config) {
    return "# rkde " + rkde::version_string() + " config=" + config.dump() + "\n";
}

rkde::KernelSpec<double> make_kernel(const CommonOptions& o, const rkde::MatrixXd& train) {
    const double sigma = o.sigma ? *o.sigma : rkde::median_nn_bandwidth(train);
    rkde::KernelSpec<double> spec;
    spec.family = rkde::kernel_family_from_string(o.kernel);
    spec.sigma = sigma;
    spec.dim = static_cast<int>(train.cols());
    spec.nu = o.nu;
    spec.validate();
    return spec;
}

rkde::Model fit_model(const std::string& estimator, const CommonOptions& o, const rkde::MatrixXd& train,
                      json& resolved) {
    const auto kernel = make_kernel(o, train);
    resolved["kernel_resolved"] = rkde::to_json(kernel);
    const auto kind = rkde::estimator_kind_from_string(estimator);
    if (kind == rkde::EstimatorKind::KDE) return rkde::fit_kde(train, kernel);
    if (kind == rkde::EstimatorKind::VKDE) return rkde::fit_vkde(train, kernel);

    rkde::FitConfig<double> cfg;
    cfg.rel_tol = o.tol;
    cfg.max_iter = o.max_iter;
    const auto family = rkde::loss_family_from_string(o.loss);
    const rkde::Model median = rkde::fit_median_rkde(train, kernel, cfg);
    rkde::LossSpec<double> loss = rkde::loss_from_median_fit(family, median);
    if (o.a) loss.a = *o.a;
    if (o.b) loss.b = *o.b;
    if (o.c) loss.c = *o.c;
    loss.validate();
    if (o.init == "median") {
        cfg.init = rkde::InitKind::Custom;
        cfg.custom_weights = median.weights;
    } else {
        cfg.init = rkde::InitKind::Uniform;
    }
    resolved["loss_resolved"] = rkde::to_json(loss);
    auto model = rkde::fit_rkde(train, kernel, loss, cfg);
    for (const auto& w : model.fit_meta.warnings) std::cerr << "warning: " << w << "\n";
    return model;
}

rkde::MatrixXd read_points(const std::string& path, const std::string& label_column) {
    std::vector<std::string> ignore;
    if (!label_column.empty()) ignore.push_back(label_column);
    return rkde::load_points_csv(path, ignore);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust kernel density estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rkde::version_string());
    CommonOptions o;

    // fit
    std::string fit_data, fit_label, fit_estimator = "rkde", fit_log;
    auto* fit = app.add_subcommand("fit", "Fit a KDE, VKDE or RKDE model to a CSV sample");
    fit->add_option("--data", fit_data, "Training CSV (header row required)")->required()->check(CLI::ExistingFile);
    fit->add_option("--label-column", fit_label, "Column to ignore (e.g. a class label)");
    fit->add_option("--estimator", fit_estimator, "Estimator")
        ->check(CLI::IsMember({"kde", "vkde", "rkde"}))
        ->capture_default_str();
    fit->add_option("--log", fit_log, "Write the objective trace as CSV");
    add_kernel_flags(fit, o);
    add_fit_flags(fit, o);
    add_seed(fit, o, false);
    fit->add_option("--out", o.out, "Model JSON path")->required();

    // score
    std::string score_model, score_data, score_label;
    int grid_n = 0;
    double grid_pad = 3.0;
    auto* score = app.add_subcommand("score", "Evaluate a model's density at points or on a 2-D grid");
    score->add_option("--model", score_model, "Model JSON")->required()->check(CLI::ExistingFile);
    score->add_option("--data", score_data, "Points CSV")->check(CLI::ExistingFile);
    score->add_option("--label-column", score_label, "Column to ignore");
    score->add_option("--grid", grid_n, "Emit an N x N mesh over the training range (2-D models)")
        ->check(CLI::Range(2, 2000));
    score->add_option("--grid-pad", grid_pad, "Mesh padding in bandwidths")->capture_default_str();
    score->add_option("--out", o.out, "Output CSV (default stdout)");

    // influence
    std::string inf_model, inf_points, inf_label;
    auto* inf = app.add_subcommand("influence", "Influence-function coefficients and alpha/beta measures");
    inf->add_option("--model", inf_model, "Model JSON (kde or rkde)")->required()->check(CLI::ExistingFile);
    inf->add_option("--points", inf_points, "CSV of contamination points x'")->required()->check(CLI::ExistingFile);
    inf->add_option("--label-column", inf_label, "Column to ignore");
    inf->add_option("--out", o.out, "Output JSON (default stdout)");

    // kl
    std::string kl_model, kl_ref_model, kl_ref_data, kl_label;
    Eigen::Index kl_samples = 0;
    auto* kl = app.add_subcommand("kl", "Monte Carlo KL divergence of a model from a reference density");
    kl->add_option("--model", kl_model, "Model JSON")->required()->check(CLI::ExistingFile);
    auto* ref_model_opt = kl->add_option("--reference", kl_ref_model, "Reference model JSON")->check(CLI::ExistingFile);
    auto* ref_data_opt =
        kl->add_option("--reference-data", kl_ref_data, "Reference sample CSV (a KDE is fitted to it)")
            ->check(CLI::ExistingFile);
    ref_model_opt->excludes(ref_data_opt);
    kl->add_option("--label-column", kl_label, "Column to ignore in --reference-data");
    kl->add_option("--samples", kl_samples, "Number of samples (default 2n)");
    add_seed(kl, o, true);
    kl->add_option("--out", o.out, "Output JSON (default stdout)");

    // auc
    std::string auc_model, auc_nominal, auc_anomalous, auc_label;
    auto* auc = app.add_subcommand("auc", "ROC curve and AUC of the density-level anomaly detector");
    auc->add_option("--model", auc_model, "Model JSON")->required()->check(CLI::ExistingFile);
    auc->add_option("--nominal", auc_nominal, "Nominal test CSV")->required()->check(CLI::ExistingFile);
    auc->add_option("--anomalous", auc_anomalous, "Anomalous test CSV")->required()->check(CLI::ExistingFile);
    auc->add_option("--label-column", auc_label, "Column to ignore");
    auc->add_option("--out", o.out, "Output JSON (default stdout)");

    // benchmark
    std::vector<std::string> bench_data;
    std::string bench_label = "label", bench_nominal = "0", bench_partitions, bench_estimators = "kde,vkde,rkde";
    std::string bench_summary;
    std::vector<double> bench_eps{0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    int bench_perms = 1, bench_synthetic = 0;
    Eigen::Index synth_nominal = 200, synth_contam = 200;
    auto* bench = app.add_subcommand("benchmark", "Contaminated-training benchmark with signed-rank comparisons");
    bench->add_option("--data", bench_data, "Labelled dataset CSV (repeatable)")->check(CLI::ExistingFile);
    bench->add_option("--label-column", bench_label, "Label column")->capture_default_str();
    bench->add_option("--nominal-labels", bench_nominal, "Comma-separated nominal labels")->capture_default_str();
    bench->add_option("--partitions", bench_partitions, "Partition JSON (single --data only)")
        ->check(CLI::ExistingFile);
    bench->add_option("--synthetic", bench_synthetic, "Add N synthetic mixture datasets")->check(CLI::NonNegativeNumber);
    bench->add_option("--synthetic-nominal", synth_nominal, "Nominal rows per synthetic dataset")->capture_default_str();
    bench->add_option("--synthetic-contaminating", synth_contam, "Contaminating rows per synthetic dataset")
        ->capture_default_str();
    bench->add_option("--epsilons", bench_eps, "Contamination ratios n1/n0")->delimiter(',')->capture_default_str();
    bench->add_option("--permutations", bench_perms, "Permutations per dataset")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench->add_option("--estimators", bench_estimators, "Subset of kde,vkde,rkde")->capture_default_str();
    bench->add_option("--tol", o.tol, "Relative objective tolerance")->capture_default_str();
    bench->add_option("--max-iter", o.max_iter, "KIRWLS iteration cap")->capture_default_str();
    add_seed(bench, o, true);
    bench->add_option("--out", o.out, "Benchmark table CSV")->required();
    bench->add_option("--summary", bench_summary, "Signed-rank summary JSON (default stdout)");

    // synth
    Eigen::Index synth_n0 = 200, synth_n1 = 20;
    auto* synth = app.add_subcommand("synth", "Sample the synthetic mixture + uniform-box contamination family");
    synth->add_option("--n-nominal", synth_n0, "Nominal points")->capture_default_str();
    synth->add_option("--n-contaminating", synth_n1, "Contaminating points")->capture_default_str();
    add_seed(synth, o, true);
    synth->add_option("--out", o.out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*fit) {
            const rkde::MatrixXd train = read_points(fit_data, fit_label);
            json config = common_config(o);
            config["command"] = "fit";
            config["data"] = fit_data;
            config["estimator"] = fit_estimator;
            const rkde::Model model = fit_model(fit_estimator, o, train, config);
            rkde::save_model(model, o.out, config);
            if (!fit_log.empty()) {
                std::ostringstream log;
                log << csv_provenance(config) << "iteration,objective\n";
                const auto& trace = model.fit_meta.objective_trace;
                for (std::size_t i = 0; i < trace.size(); ++i) log << i << ',' << rkde::format_double(trace[i]) << '\n';
                rkde::write_text_file(fit_log, log.str());
            }
        } else if (*score) {
            const rkde::Model model = rkde::load_model(score_model);
            json config{{"command", "score"}, {"model", score_model}};
            std::ostringstream out;
            if (grid_n > 0) {
                rkde::require(model.dim() == 2, "dimension", "--grid requires a 2-D model");
                config["grid"] = grid_n;
                config["grid_pad"] = grid_pad;
                const double pad = grid_pad * model.kernel.sigma;
                const Eigen::Vector2d lo = model.train.colwise().minCoeff().transpose().array() - pad;
                const Eigen::Vector2d hi = model.train.colwise().maxCoeff().transpose().array() + pad;
                rkde::MatrixXd mesh(static_cast<Eigen::Index>(grid_n) * grid_n, 2);
                for (int i = 0; i < grid_n; ++i)
                    for (int j = 0; j < grid_n; ++j) {
                        mesh(i * grid_n + j, 0) = lo(0) + (hi(0) - lo(0)) * i / (grid_n - 1);
                        mesh(i * grid_n + j, 1) = lo(1) + (hi(1) - lo(1)) * j / (grid_n - 1);
                    }
                const rkde::VectorXd dens = rkde::evaluate_batch(model, mesh);
                out << csv_provenance(config) << "x1,x2,density\n";
                for (Eigen::Index r = 0; r < mesh.rows(); ++r)
                    out << rkde::format_double(mesh(r, 0)) << ',' << rkde::format_double(mesh(r, 1)) << ','
                        << rkde::format_double(dens(r)) << '\n';
            } else {
                rkde::require(!score_data.empty(), "usage", "score needs --data or --grid");
                config["data"] = score_data;
                const rkde::MatrixXd pts = read_points(score_data, score_label);
                const rkde::VectorXd dens = rkde::evaluate_batch(model, pts);
                out << csv_provenance(config) << "row,density\n";
                for (Eigen::Index r = 0; r < dens.size(); ++r) out << r << ',' << rkde::format_double(dens(r)) << '\n';
            }
            emit(o.out, out.str());
        } else if (*inf) {
            const rkde::Model model = rkde::load_model(inf_model);
            const rkde::MatrixXd pts = read_points(inf_points, inf_label);
            json results = json::array();
            for (Eigen::Index r = 0; r < pts.rows(); ++r) {
                rkde::InfluenceResult<double> res;
                try {
                    res = rkde::influence(model, pts.row(r).transpose());
                } catch (const rkde::Error& e) {
                    throw rkde::Error(e.category(), "x' row " + std::to_string(r) + ": " + e.what());
                }
                json rec = rkde::to_json(res);
                rec["row"] = r;
                rec["alpha_measure"] = rkde::alpha_measure(model, res);
                rec["beta_measure"] = model.kernel.family == rkde::KernelFamily::Gaussian
                                          ? json(rkde::beta_measure(model, res))
                                          : json(nullptr);
                results.push_back(rec);
            }
            json doc{{"version", rkde::version_string()},
                     {"config", {{"command", "influence"}, {"model", inf_model}, {"points", inf_points}}},
                     {"results", results}};
            emit(o.out, doc.dump(2) + "\n");
        } else if (*kl) {
            const rkde::Model model = rkde::load_model(kl_model);
            rkde::require(!kl_ref_model.empty() || !kl_ref_data.empty(), "usage",
                          "kl needs --reference or --reference-data");
            rkde::Model ref;
            if (!kl_ref_model.empty()) {
                ref = rkde::load_model(kl_ref_model);
            } else {
                const rkde::MatrixXd pts = read_points(kl_ref_data, kl_label);
                ref = rkde::fit_kde(pts, rkde::KernelSpec<double>::gaussian(rkde::median_nn_bandwidth(pts),
                                                                            static_cast<int>(pts.cols())));
            }
            const Eigen::Index n = kl_samples > 0 ? kl_samples : 2 * model.size();
            const auto est = rkde::kl_divergence(model, ref, n, *o.seed);
            json doc{{"version", rkde::version_string()},
                     {"config",
                      {{"command", "kl"},
                       {"model", kl_model},
                       {"reference", kl_ref_model.empty() ? kl_ref_data : kl_ref_model},
                       {"samples", n},
                       {"seed", *o.seed}}},
                     {"kl", est.kl},
                     {"stderr", est.stderr_},
                     {"kl_infinite", est.infinite}};
            emit(o.out, doc.dump(2) + "\n");
        } else if (*auc) {
            const rkde::Model model = rkde::load_model(auc_model);
            const auto report =
                rkde::roc_auc(model, read_points(auc_nominal, auc_label), read_points(auc_anomalous, auc_label));
            json doc = rkde::to_json(report);
            doc["version"] = rkde::version_string();
            doc["config"] = {{"command", "auc"}, {"model", auc_model}, {"nominal", auc_nominal},
                             {"anomalous", auc_anomalous}};
            emit(o.out, doc.dump(2) + "\n");
        } else if (*bench) {
            std::vector<rkde::EstimatorConfig> estimators;
            for (const auto& name : split_list(bench_estimators)) {
                const auto kind = rkde::estimator_kind_from_string(name);
                estimators.push_back({name, kind, kind == rkde::EstimatorKind::RKDE ? rkde::LossFamily::Hampel
                                                                                    : rkde::LossFamily::Quadratic});
            }
            std::vector<rkde::Dataset> datasets;
            for (const auto& path : bench_data) {
                auto ds = rkde::load_csv(path, bench_label, split_list(bench_nominal));
                if (!bench_partitions.empty()) {
                    rkde::require(bench_data.size() == 1, "usage", "--partitions applies to a single --data file");
                    ds.partitions = rkde::load_partitions(bench_partitions);
                    ds.validate();
                }
                datasets.push_back(std::move(ds));
            }
            rkde::Rng synth_rng(*o.seed, 0x5EED);
            for (int i = 0; i < bench_synthetic; ++i)
                datasets.push_back(rkde::synth_dataset("synthetic-" + std::to_string(i), synth_nominal, synth_contam,
                                                       synth_rng.next_u64()));
            rkde::require(!datasets.empty(), "usage", "benchmark needs --data or --synthetic");

            rkde::BenchmarkOptions opt;
            opt.epsilons = bench_eps;
            opt.n_permutations = bench_perms;
            opt.seed = *o.seed;
            opt.threads = rkde::threads_from_env();
            opt.fit.rel_tol = o.tol;
            opt.fit.max_iter = o.max_iter;
            std::vector<rkde::BenchmarkRow> rows;
            for (const auto& ds : datasets) {
                auto part = rkde::run_benchmark(ds, estimators, opt);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            json config{{"command", "benchmark"},       {"datasets", bench_data},   {"synthetic", bench_synthetic},
                        {"epsilons", bench_eps},        {"permutations", bench_perms}, {"estimators", bench_estimators},
                        {"seed", *o.seed},              {"tol", o.tol},             {"max_iter", o.max_iter}};
            std::ostringstream table;
            table << csv_provenance(config);
            rkde::write_benchmark_csv(table, rows);
            rkde::write_text_file(o.out, table.str());

            json comparisons = json::array();
            if (datasets.size() >= 2) {
                for (std::size_t i = 0; i < estimators.size(); ++i)
                    for (std::size_t j = i + 1; j < estimators.size(); ++j)
                        for (double eps : bench_eps)
                            for (auto metric : {rkde::Metric::KL, rkde::Metric::AUC}) {
                                json rec{{"method1", estimators[j].name}, {"method2", estimators[i].name},
                                         {"epsilon", eps}, {"metric", metric == rkde::Metric::KL ? "kl" : "auc"}};
                                try {
                                    rec["test"] = rkde::to_json(rkde::compare_estimators(
                                        rows, metric, estimators[j].name, estimators[i].name, eps));
                                } catch (const rkde::Error& e) {
                                    rec["test"] = nullptr;
                                    rec["note"] = e.what();
                                }
                                comparisons.push_back(rec);
                            }
            }
            json summary{{"version", rkde::version_string()}, {"config", config}, {"signed_rank", comparisons}};
            emit(bench_summary, summary.dump(2) + "\n");
        } else if (*synth) {
            const auto ds = rkde::synth_dataset("synthetic", synth_n0, synth_n1, *o.seed);
            json config{{"command", "synth"}, {"n_nominal", synth_n0}, {"n_contaminating", synth_n1}, {"seed", *o.seed}};
            std::ostringstream out;
            out << csv_provenance(config) << "x1,x2,label\n";
            auto dump = [&out](const rkde::MatrixXd& m, int label) {
                for (Eigen::Index r = 0; r < m.rows(); ++r)
                    out << rkde::format_double(m(r, 0)) << ',' << rkde::format_double(m(r, 1)) << ',' << label << '\n';
            };
            dump(ds.nominal, 0);
            dump(ds.contaminating, 1);
            emit(o.out, out.str());
        }
    } catch (const rkde::Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
