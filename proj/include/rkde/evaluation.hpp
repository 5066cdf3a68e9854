#pragma once

#include "rkde/data.hpp"
#include "rkde/estimators.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace rkde {

using Model = DensityModel<double>;

/// Draws `count` points from a fitted Gaussian-kernel model: pick component i
/// with probability w_i, then add N(0, sigma_i^2 I).
MatrixXd sample_from_model(const Model& model, Eigen::Index count, std::uint64_t seed);

/// Log-ratios are capped at this value when the reference density underflows.
inline constexpr double kLogRatioClip = 700.0;

struct KlEstimate {
    double kl = 0;
    double stderr_ = 0;  // standard error of the sample mean
    bool infinite = false;  // at least one log-ratio was clipped
    Eigen::Index n_samples = 0;
};

/// D(f || ref) estimated as the mean of log(f(x)/ref(x)) over x ~ f.
KlEstimate kl_divergence(const Model& model_f, const Model& model_ref, Eigen::Index n_samples, std::uint64_t seed);

struct RocPoint {
    double fpr = 0;
    double tpr = 0;
};

struct EvalReport {
    double kl = std::numeric_limits<double>::quiet_NaN();
    bool kl_infinite = false;
    double auc = std::numeric_limits<double>::quiet_NaN();
    std::vector<RocPoint> roc;
    std::uint64_t seed = 0;
};

/// ROC for the detector "anomaly if density <= lambda" (anomalies are the
/// positive class). AUC is the Mann-Whitney probability that an anomaly scores
/// a lower density than a nominal point, ties counted one half.
EvalReport roc_auc_from_densities(const VectorXd& nominal_density, const VectorXd& anomalous_density);
EvalReport roc_auc(const Model& model, const MatrixXd& nominal_test, const MatrixXd& anomalous_test);

/// Trapezoidal area under an ROC polyline.
double trapezoid_auc(const std::vector<RocPoint>& roc);

struct SignedRankResult {
    double r1 = 0;  // rank sum of positive differences
    double r2 = 0;  // rank sum of negative differences
    double t_stat = 0;
    double p_value = 1;
    int n_effective = 0;
    bool exact = true;
};

/// Largest n_effective for which the exact null distribution is used.
inline constexpr int kWilcoxonExactMax = 25;

/// Two-sided Wilcoxon signed-rank test. Zero differences are dropped and tied
/// magnitudes receive average ranks.
SignedRankResult wilcoxon_signed_rank(const std::vector<double>& h);

/// Null distribution of the positive rank sum for the given ranks, indexed by
/// twice the rank sum (so half-integer average ranks stay integral).
std::vector<double> signed_rank_null_distribution(const std::vector<double>& ranks);

struct EstimatorConfig {
    std::string name;
    EstimatorKind kind = EstimatorKind::KDE;
    LossFamily loss = LossFamily::Hampel;  // RKDE only
};

std::vector<EstimatorConfig> default_estimators();

/// Fits one estimator with the automatic recipe: Gaussian kernel, median
/// nearest-neighbour bandwidth, and for RKDE median-RKDE initialization with
/// loss parameters from the median-RKDE distances.
Model fit_with_recipe(const EstimatorConfig& config, const MatrixXd& train, const FitConfig<double>& fit = {});

struct BenchmarkRow {
    std::string dataset;
    std::string estimator;
    double epsilon = 0;
    double anomaly_proportion = 0;  // epsilon / (1 + epsilon)
    int permutation = 0;
    Eigen::Index n_contaminating = 0;
    EvalReport report;
};

struct BenchmarkOptions {
    std::vector<double> epsilons{0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    int n_permutations = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    FitConfig<double> fit;
};

/// Contaminated-training benchmark on one dataset. Rows are ordered by
/// (permutation, epsilon, estimator) independent of the thread count.
std::vector<BenchmarkRow> run_benchmark(const Dataset& dataset, const std::vector<EstimatorConfig>& estimators,
                                        const BenchmarkOptions& options);

enum class Metric { KL, AUC };

/// Signed-rank comparison of two estimators across datasets at one epsilon.
/// The per-dataset measure is the permutation average; h_i is oriented so that
/// a positive value means estimator 1 is better (lower KL, higher AUC).
SignedRankResult compare_estimators(const std::vector<BenchmarkRow>& rows, Metric metric, const std::string& est1,
                                    const std::string& est2, double epsilon);

/// Thread cap from RKDE_THREADS (defaults to 1).
int threads_from_env();

}  // namespace rkde
