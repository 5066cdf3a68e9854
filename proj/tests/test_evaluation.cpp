#include "oracles.hpp"

#include <gtest/gtest.h>

using rkde::KernelSpec;
using rkde::MatrixXd;
using rkde::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

void check_roc_invariants(const rkde::EvalReport& r) {
    ASSERT_FALSE(r.roc.empty());
    EXPECT_EQ(r.roc.front().fpr, 0.0);
    EXPECT_EQ(r.roc.front().tpr, 0.0);
    EXPECT_EQ(r.roc.back().fpr, 1.0);
    EXPECT_EQ(r.roc.back().tpr, 1.0);
    for (std::size_t i = 1; i < r.roc.size(); ++i) {
        EXPECT_GE(r.roc[i].fpr, r.roc[i - 1].fpr);
        EXPECT_GE(r.roc[i].tpr, r.roc[i - 1].tpr);
    }
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
    EXPECT_NEAR(r.auc, rkde::trapezoid_auc(r.roc), 1e-9);
}

}  // namespace

TEST(Sampling, SinglePointMean) {
    MatrixXd x(1, 2);
    x << 1.5, -2;
    const auto m = rkde::fit_kde(x, KernelSpec<double>::gaussian(0.5, 2));
    const MatrixXd s = rkde::sample_from_model(m, 20000, 3);
    const double bound = 3 * 0.5 / std::sqrt(20000.0);
    EXPECT_NEAR(s.col(0).mean(), 1.5, bound);
    EXPECT_NEAR(s.col(1).mean(), -2.0, bound);
    EXPECT_TRUE(s.isApprox(rkde::sample_from_model(m, 20000, 3), 0));
}

TEST(Sampling, WeightsSelectComponent) {
    MatrixXd x(3, 1);
    x << -100, 0, 100;
    auto m = rkde::fit_kde(x, KernelSpec<double>::gaussian(0.1, 1));
    m.weights = vec({0, 0, 1});
    const MatrixXd s = rkde::sample_from_model(m, 1000, 4);
    EXPECT_GT(s.minCoeff(), 99.0);
    EXPECT_LT(s.maxCoeff(), 101.0);
}

TEST(Sampling, VkdeUsesPerPointBandwidth) {
    MatrixXd x(2, 1);
    x << 0, 50;
    auto m = rkde::fit_vkde(x, KernelSpec<double>::gaussian(1, 1));
    m.sigmas = vec({0.1, 3.0});
    const MatrixXd s = rkde::sample_from_model(m, 40000, 5);
    double ss0 = 0, ss1 = 0;
    int n0 = 0, n1 = 0;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        if (s(i, 0) < 25) {
            ss0 += s(i, 0) * s(i, 0);
            ++n0;
        } else {
            ss1 += (s(i, 0) - 50) * (s(i, 0) - 50);
            ++n1;
        }
    }
    EXPECT_NEAR(std::sqrt(ss0 / n0), 0.1, 0.01);
    EXPECT_NEAR(std::sqrt(ss1 / n1), 3.0, 0.1);
}

TEST(Sampling, NonGaussianUnsupported) {
    const auto m = rkde::fit_kde(MatrixXd::Zero(1, 1), KernelSpec<double>::laplacian(1, 1));
    EXPECT_THROW(rkde::sample_from_model(m, 10, 1), rkde::Error);
}

TEST(Kl, IdenticalModelsNearZero) {
    rkde::Rng rng(1);
    const MatrixXd x = oracle::blob_sample(rng, 40, 2);
    const auto m = rkde::fit_kde(x, KernelSpec<double>::gaussian(0.5, 2));
    const auto kl = rkde::kl_divergence(m, m, 2000, 8);
    EXPECT_EQ(kl.kl, 0.0);
    EXPECT_FALSE(kl.infinite);
}

TEST(Kl, ShiftedGaussiansClosedForm) {
    const auto k = KernelSpec<double>::gaussian(1, 1);
    const auto f = rkde::fit_kde(MatrixXd::Zero(1, 1), k);
    const auto g = rkde::fit_kde(MatrixXd::Constant(1, 1, 2.0), k);
    const auto kl = rkde::kl_divergence(f, g, 100000, 9);
    EXPECT_EQ(kl.n_samples, 100000);
    EXPECT_NEAR(kl.kl, 2.0, 3 * kl.stderr_);
    EXPECT_LT(kl.stderr_, 0.02);
}

TEST(Kl, ClippedWhenReferenceUnderflows) {
    const auto k = KernelSpec<double>::gaussian(0.1, 1);
    const auto f = rkde::fit_kde(MatrixXd::Zero(1, 1), k);
    const auto g = rkde::fit_kde(MatrixXd::Constant(1, 1, 1e4), k);
    const auto kl = rkde::kl_divergence(f, g, 100, 10);
    EXPECT_TRUE(kl.infinite);
    EXPECT_LE(kl.kl, rkde::kLogRatioClip);
    EXPECT_GT(kl.kl, 100.0);
}

TEST(Kl, DimensionMismatch) {
    const auto f = rkde::fit_kde(MatrixXd::Zero(1, 1), KernelSpec<double>::gaussian(1, 1));
    const auto g = rkde::fit_kde(MatrixXd::Zero(1, 2), KernelSpec<double>::gaussian(1, 2));
    EXPECT_THROW(rkde::kl_divergence(f, g, 10, 1), rkde::Error);
}

TEST(Roc, HandCountedExample) {
    const auto r = rkde::roc_auc_from_densities(vec({0.9, 0.8}), vec({0.7, 0.1}));
    EXPECT_EQ(r.auc, 1.0);
    check_roc_invariants(r);
}

TEST(Roc, TiesCountHalf) {
    const auto r = rkde::roc_auc_from_densities(vec({0.5, 0.2}), vec({0.5, 0.1}));
    // Pairs (anomaly, nominal): (0.5,0.5) tie, (0.5,0.2) loss, (0.1,*) two wins.
    EXPECT_DOUBLE_EQ(r.auc, 2.5 / 4);
    check_roc_invariants(r);
}

TEST(Roc, SeparatedAndIdenticalDistributions) {
    rkde::Rng rng(2);
    VectorXd a(300), b(300);
    for (Eigen::Index i = 0; i < 300; ++i) {
        a(i) = 1 + rng.uniform();
        b(i) = rng.uniform();
    }
    EXPECT_EQ(rkde::roc_auc_from_densities(a, b).auc, 1.0);
    EXPECT_EQ(rkde::roc_auc_from_densities(b, a).auc, 0.0);
    VectorXd c(3000), d(3000);
    for (Eigen::Index i = 0; i < 3000; ++i) {
        c(i) = rng.uniform();
        d(i) = rng.uniform();
    }
    const auto r = rkde::roc_auc_from_densities(c, d);
    EXPECT_NEAR(r.auc, 0.5, 0.03);
    check_roc_invariants(r);
}

TEST(Roc, ModelScoring) {
    rkde::Rng rng(3);
    const MatrixXd nominal = rkde::synth_gaussian_mixture(rkde::default_nominal_mixture(), 200, 1);
    const MatrixXd test = rkde::synth_gaussian_mixture(rkde::default_nominal_mixture(), 100, 2);
    const auto [lo, hi] = rkde::default_contamination_box();
    const MatrixXd anomalies = rkde::synth_uniform_box(lo, hi, 100, 3);
    const auto m = rkde::fit_kde(nominal, KernelSpec<double>::gaussian(rkde::median_nn_bandwidth(nominal), 2));
    const auto r = rkde::roc_auc(m, test, anomalies);
    check_roc_invariants(r);
    EXPECT_GT(r.auc, 0.8);
}

TEST(SignedRank, Examples) {
    const auto same = rkde::wilcoxon_signed_rank({1, 2, 3, 4, 5});
    EXPECT_EQ(same.t_stat, 0.0);
    EXPECT_DOUBLE_EQ(same.p_value, 2.0 / 32);
    const auto tie = rkde::wilcoxon_signed_rank({1, -1});
    EXPECT_EQ(tie.r1, 1.5);
    EXPECT_EQ(tie.r2, 1.5);
    EXPECT_EQ(tie.p_value, 1.0);
    EXPECT_THROW(rkde::wilcoxon_signed_rank({0, 0}), rkde::Error);
    const auto dropped = rkde::wilcoxon_signed_rank({0, 3, -1, 2});
    EXPECT_EQ(dropped.n_effective, 3);
    EXPECT_EQ(dropped.r1 + dropped.r2, 6.0);
    EXPECT_LE(dropped.t_stat, std::min(dropped.r1, dropped.r2));
}

TEST(SignedRank, CriticalValueFifteen) {
    auto with_t = [](int t) {
        std::vector<double> h;
        for (int r = 15; r >= 1; --r) {
            const bool neg = r <= t;
            if (neg) t -= r;
            h.push_back(neg ? -r : r);
        }
        return rkde::wilcoxon_signed_rank(h);
    };
    const auto at25 = with_t(25), at26 = with_t(26);
    EXPECT_EQ(at25.t_stat, 25.0);
    EXPECT_EQ(at26.t_stat, 26.0);
    EXPECT_LE(at25.p_value, 0.05);
    EXPECT_GT(at26.p_value, 0.05);
    EXPECT_TRUE(at25.exact);
}

TEST(SignedRank, DistributionSumsToOneAndMatchesEnumeration) {
    rkde::Rng rng(4);
    for (int n = 1; n <= 12; ++n) {
        std::vector<double> ranks;
        for (int i = 1; i <= n; ++i) ranks.push_back(i);
        const auto dist = rkde::signed_rank_null_distribution(ranks);
        double total = 0;
        for (double p : dist) total += p;
        EXPECT_NEAR(total, 1.0, 1e-13);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> h(static_cast<std::size_t>(n));
            for (auto& v : h) v = static_cast<double>(static_cast<int>(rng.below(7)) - 3);
            if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0; })) h[0] = -2;
            EXPECT_NEAR(rkde::wilcoxon_signed_rank(h).p_value, oracle::signed_rank_brute_force(h), 1e-12);
        }
    }
}

TEST(SignedRank, NormalApproximationAboveExactRange) {
    // Distinct magnitudes 1..26, so the exact null is the subset-sum count of {1..26}.
    std::vector<double> h;
    for (int i = 1; i <= 26; ++i) h.push_back(i % 3 == 0 ? -i : i);
    const auto big = rkde::wilcoxon_signed_rank(h);
    EXPECT_FALSE(big.exact);
    std::vector<double> ways(26 * 27 / 2 + 1, 0.0);
    ways[0] = 1;
    for (int r = 1; r <= 26; ++r)
        for (int s = static_cast<int>(ways.size()) - 1; s >= r; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
    double lower = 0;
    for (int s = 0; s <= static_cast<int>(big.t_stat); ++s) lower += ways[static_cast<std::size_t>(s)];
    const double exact = std::min(1.0, 2 * lower / std::ldexp(1.0, 26));
    EXPECT_NEAR(big.p_value, exact, 0.01);
    h.pop_back();
    EXPECT_TRUE(rkde::wilcoxon_signed_rank(h).exact);
}

TEST(Benchmark, RowsDeterminismAndContamination) {
    const auto ds = rkde::synth_dataset("bench", 60, 40, 21);
    const std::vector<rkde::EstimatorConfig> est = {{"kde", rkde::EstimatorKind::KDE, rkde::LossFamily::Quadratic},
                                                    {"rkde", rkde::EstimatorKind::RKDE, rkde::LossFamily::Hampel}};
    rkde::BenchmarkOptions opt;
    opt.epsilons = {0.0, 0.25};
    opt.n_permutations = 2;
    opt.seed = 5;
    const auto rows = rkde::run_benchmark(ds, est, opt);
    ASSERT_EQ(rows.size(), 2u * 2u * 2u);
    for (const auto& r : rows) {
        if (r.epsilon == 0.0) {
            EXPECT_EQ(r.n_contaminating, 0);
        }
        if (r.epsilon == 0.25) {
            EXPECT_DOUBLE_EQ(r.anomaly_proportion, 0.2);
            EXPECT_EQ(r.n_contaminating, 7);  // floor(0.25 * 30)
        }
        EXPECT_TRUE(std::isfinite(r.report.auc));
    }
    opt.threads = 2;
    const auto again = rkde::run_benchmark(ds, est, opt);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].estimator, again[i].estimator);
        EXPECT_EQ(rows[i].report.kl, again[i].report.kl);
        EXPECT_EQ(rows[i].report.auc, again[i].report.auc);
    }
}

TEST(Benchmark, CompareEstimatorsOrientation) {
    std::vector<rkde::BenchmarkRow> rows;
    for (int d = 0; d < 6; ++d)
        for (const char* est : {"a", "b"}) {
            rkde::BenchmarkRow r;
            r.dataset = "ds" + std::to_string(d);
            r.estimator = est;
            r.epsilon = 0.1;
            r.report.kl = std::string(est) == "a" ? 1.0 : 2.0 + d;
            r.report.auc = std::string(est) == "a" ? 0.9 : 0.8 - 0.01 * d;
            rows.push_back(r);
        }
    for (auto metric : {rkde::Metric::KL, rkde::Metric::AUC}) {
        const auto res = rkde::compare_estimators(rows, metric, "a", "b", 0.1);
        EXPECT_EQ(res.n_effective, 6);
        EXPECT_EQ(res.r1, 21.0);  // estimator a better on every dataset
        EXPECT_EQ(res.t_stat, 0.0);
    }
}
