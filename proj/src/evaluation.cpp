#include "rkde/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <thread>

namespace rkde {

MatrixXd sample_from_model(const Model& model, Eigen::Index count, std::uint64_t seed) {
    require(model.kernel.family == KernelFamily::Gaussian, "unsupported",
            "sampling is only implemented for Gaussian-kernel models");
    require(count >= 0, "domain", "sample count must be nonnegative");
    const Eigen::Index n = model.size();
    const int d = model.dim();
    std::vector<double> cumulative(static_cast<std::size_t>(n));
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        total += model.kind == EstimatorKind::VKDE ? 1.0 : model.weights(i);
        cumulative[static_cast<std::size_t>(i)] = total;
    }
    require(total > 0, "domain", "model has no positive weights");

    Rng rng(seed);
    MatrixXd out(count, d);
    for (Eigen::Index r = 0; r < count; ++r) {
        const double u = rng.uniform() * total;
        auto k = static_cast<Eigen::Index>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                           cumulative.begin());
        k = std::min(k, n - 1);
        const double s = model.kind == EstimatorKind::VKDE ? model.sigmas(k) : model.kernel.sigma;
        for (int j = 0; j < d; ++j) out(r, j) = model.train(k, j) + s * rng.normal();
    }
    return out;
}

KlEstimate kl_divergence(const Model& model_f, const Model& model_ref, Eigen::Index n_samples, std::uint64_t seed) {
    require(model_f.dim() == model_ref.dim(), "dimension", "KL divergence: models have different dimensions");
    require(n_samples >= 1, "domain", "KL divergence needs at least one sample");
    const MatrixXd x = sample_from_model(model_f, n_samples, seed);
    const VectorXd f = evaluate_batch(model_f, x);
    const VectorXd ref = evaluate_batch(model_ref, x);

    KlEstimate out;
    out.n_samples = n_samples;
    VectorXd lr(n_samples);
    for (Eigen::Index i = 0; i < n_samples; ++i) {
        double v;
        if (f(i) <= 0) {
            v = 0;
        } else if (ref(i) <= 0) {
            v = kLogRatioClip;
        } else {
            v = std::log(f(i)) - std::log(ref(i));
        }
        if (v >= kLogRatioClip) {
            v = kLogRatioClip;
            out.infinite = true;
        }
        lr(i) = v;
    }
    out.kl = lr.mean();
    if (n_samples > 1) {
        const double var = (lr.array() - out.kl).square().sum() / static_cast<double>(n_samples - 1);
        out.stderr_ = std::sqrt(var / static_cast<double>(n_samples));
    }
    return out;
}

EvalReport roc_auc_from_densities(const VectorXd& nominal_density, const VectorXd& anomalous_density) {
    const Eigen::Index nn = nominal_density.size(), na = anomalous_density.size();
    require(nn >= 1 && na >= 1, "domain", "ROC needs at least one nominal and one anomalous test point");
    require(nominal_density.allFinite() && anomalous_density.allFinite(), "domain", "ROC: non-finite scores");

    struct Scored {
        double density;
        bool anomaly;
    };
    std::vector<Scored> all;
    all.reserve(static_cast<std::size_t>(nn + na));
    for (Eigen::Index i = 0; i < nn; ++i) all.push_back({nominal_density(i), false});
    for (Eigen::Index i = 0; i < na; ++i) all.push_back({anomalous_density(i), true});
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.density < b.density; });

    EvalReport report;
    report.roc.push_back({0.0, 0.0});
    double tp = 0, fp = 0, mann_whitney = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        double group_tp = 0, group_fp = 0;
        while (j < all.size() && all[j].density == all[i].density) {
            (all[j].anomaly ? group_tp : group_fp) += 1;
            ++j;
        }
        // Anomalies in this group beat every nominal point with a larger
        // density and tie with the nominal points in the group.
        mann_whitney += group_tp * (static_cast<double>(nn) - fp - group_fp) + 0.5 * group_tp * group_fp;
        tp += group_tp;
        fp += group_fp;
        report.roc.push_back({fp / static_cast<double>(nn), tp / static_cast<double>(na)});
        i = j;
    }
    report.auc = mann_whitney / (static_cast<double>(nn) * static_cast<double>(na));
    return report;
}

EvalReport roc_auc(const Model& model, const MatrixXd& nominal_test, const MatrixXd& anomalous_test) {
    return roc_auc_from_densities(evaluate_batch(model, nominal_test), evaluate_batch(model, anomalous_test));
}

double trapezoid_auc(const std::vector<RocPoint>& roc) {
    double area = 0;
    for (std::size_t i = 1; i < roc.size(); ++i)
        area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2;
    return area;
}

std::vector<double> signed_rank_null_distribution(const std::vector<double>& ranks) {
    std::vector<int> doubled;
    int total = 0;
    for (double r : ranks) {
        const int v = static_cast<int>(std::lround(2 * r));
        require(std::abs(2 * r - v) < 1e-9, "domain", "signed-rank ranks must be multiples of one half");
        doubled.push_back(v);
        total += v;
    }
    std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
    dist[0] = 1.0;
    int reach = 0;
    for (int v : doubled) {
        for (int s = reach; s >= 0; --s) {
            if (dist[static_cast<std::size_t>(s)] == 0) continue;
            dist[static_cast<std::size_t>(s + v)] += 0.5 * dist[static_cast<std::size_t>(s)];
            dist[static_cast<std::size_t>(s)] *= 0.5;
        }
        reach += v;
    }
    return dist;
}

SignedRankResult wilcoxon_signed_rank(const std::vector<double>& h) {
    std::vector<double> nonzero;
    for (double v : h) {
        require(std::isfinite(v), "domain", "signed-rank test: non-finite difference");
        if (v != 0) nonzero.push_back(v);
    }
    require(!nonzero.empty(), "domain", "signed-rank test: all differences are zero");
    const auto n = nonzero.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(nonzero[a]) < std::abs(nonzero[b]); });
    std::vector<double> rank(n);
    double tie_term = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(nonzero[order[j]]) == std::abs(nonzero[order[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2;
        for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    SignedRankResult out;
    out.n_effective = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) (nonzero[i] > 0 ? out.r1 : out.r2) += rank[i];
    out.t_stat = std::min(out.r1, out.r2);

    if (out.n_effective <= kWilcoxonExactMax) {
        const auto dist = signed_rank_null_distribution(rank);
        const auto limit = static_cast<std::size_t>(std::lround(2 * out.t_stat));
        double lower = 0;
        for (std::size_t s = 0; s <= limit && s < dist.size(); ++s) lower += dist[s];
        out.p_value = std::min(1.0, 2 * lower);
        out.exact = true;
    } else {
        const double nd = static_cast<double>(n);
        const double mean = nd * (nd + 1) / 4;
        const double var = nd * (nd + 1) * (2 * nd + 1) / 24 - tie_term / 48;
        const double z = (out.t_stat - mean + 0.5) / std::sqrt(var);
        out.p_value = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
        out.exact = false;
    }
    return out;
}

std::vector<EstimatorConfig> default_estimators() {
    return {{"kde", EstimatorKind::KDE, LossFamily::Quadratic},
            {"vkde", EstimatorKind::VKDE, LossFamily::Quadratic},
            {"rkde", EstimatorKind::RKDE, LossFamily::Hampel}};
}

Model fit_with_recipe(const EstimatorConfig& config, const MatrixXd& train, const FitConfig<double>& fit) {
    const double sigma = median_nn_bandwidth(train);
    const auto kernel = KernelSpec<double>::gaussian(sigma, static_cast<int>(train.cols()));
    switch (config.kind) {
        case EstimatorKind::KDE: return fit_kde(train, kernel);
        case EstimatorKind::VKDE: return fit_vkde(train, kernel);
        case EstimatorKind::RKDE: return fit_rkde_auto(train, kernel, config.loss, fit);
    }
    throw Error("config", "unknown estimator kind");
}

namespace {

struct Split {
    MatrixXd nominal_train, pool, nominal_test, anomalous_test;
};

Split make_split(const Dataset& ds, int permutation, Rng& rng) {
    const Eigen::Index n0 = ds.nominal.rows();
    Split s;
    if (!ds.partitions.empty()) {
        const auto& part = ds.partitions[static_cast<std::size_t>(permutation) % ds.partitions.size()];
        std::vector<Eigen::Index> ntr, ctr, nte, cte;
        for (auto i : part.train) (i < n0 ? ntr.push_back(i) : ctr.push_back(i - n0));
        for (auto i : part.test) (i < n0 ? nte.push_back(i) : cte.push_back(i - n0));
        s.nominal_train = select_rows(ds.nominal, ntr);
        s.pool = select_rows(ds.contaminating, ctr);
        s.nominal_test = select_rows(ds.nominal, nte);
        s.anomalous_test = select_rows(ds.contaminating, cte);
        return s;
    }
    auto shuffled = [&rng](Eigen::Index count) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        for (Eigen::Index i = count - 1; i > 0; --i)
            std::swap(idx[static_cast<std::size_t>(i)],
                      idx[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
        return idx;
    };
    auto halves = [](const std::vector<Eigen::Index>& idx) {
        const auto mid = static_cast<std::ptrdiff_t>((idx.size() + 1) / 2);
        return std::make_pair(std::vector<Eigen::Index>(idx.begin(), idx.begin() + mid),
                              std::vector<Eigen::Index>(idx.begin() + mid, idx.end()));
    };
    const auto [ntr, nte] = halves(shuffled(n0));
    const auto [ctr, cte] = halves(shuffled(ds.contaminating.rows()));
    s.nominal_train = select_rows(ds.nominal, ntr);
    s.nominal_test = select_rows(ds.nominal, nte);
    s.pool = select_rows(ds.contaminating, ctr);
    s.anomalous_test = select_rows(ds.contaminating, cte);
    return s;
}

std::vector<BenchmarkRow> run_permutation(const Dataset& ds, const std::vector<EstimatorConfig>& estimators,
                                          const BenchmarkOptions& opt, int permutation) {
    Rng rng = Rng(opt.seed).split(static_cast<std::uint64_t>(permutation));
    const Split split = make_split(ds, permutation, rng);
    require(split.nominal_test.rows() >= 2, "domain", "benchmark: need at least two nominal test points");
    const Model reference = fit_kde(
        split.nominal_test,
        KernelSpec<double>::gaussian(median_nn_bandwidth(split.nominal_test), static_cast<int>(ds.nominal.cols())));

    std::vector<BenchmarkRow> rows;
    for (double eps : opt.epsilons) {
        const std::uint64_t mix_seed = rng.next_u64();
        const ContaminatedSample sample = mix_contamination(split.nominal_train, split.pool, eps, mix_seed);
        for (const auto& est : estimators) {
            BenchmarkRow row;
            row.dataset = ds.name;
            row.estimator = est.name;
            row.epsilon = eps;
            row.anomaly_proportion = eps / (1 + eps);
            row.permutation = permutation;
            row.n_contaminating = sample.n_contaminating;
            const Model model = fit_with_recipe(est, sample.train, opt.fit);
            const std::uint64_t kl_seed = rng.next_u64();
            const KlEstimate kl = kl_divergence(model, reference, 2 * sample.train.rows(), kl_seed);
            if (split.anomalous_test.rows() > 0) row.report = roc_auc(model, split.nominal_test, split.anomalous_test);
            row.report.kl = kl.kl;
            row.report.kl_infinite = kl.infinite;
            row.report.seed = kl_seed;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const Dataset& dataset, const std::vector<EstimatorConfig>& estimators,
                                        const BenchmarkOptions& options) {
    dataset.validate();
    require(options.n_permutations >= 1, "config", "benchmark needs at least one permutation");
    require(!estimators.empty(), "config", "benchmark needs at least one estimator");
    const auto n_perm = static_cast<std::size_t>(options.n_permutations);
    std::vector<std::vector<BenchmarkRow>> per_perm(n_perm);
    std::vector<std::exception_ptr> errors(n_perm);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t p; (p = next.fetch_add(1)) < n_perm;) {
            try {
                per_perm[p] = run_permutation(dataset, estimators, options, static_cast<int>(p));
            } catch (...) {
                errors[p] = std::current_exception();
            }
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::clamp(options.threads, 1, options.n_permutations));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<BenchmarkRow> rows;
    for (auto& chunk : per_perm)
        for (auto& row : chunk) rows.push_back(std::move(row));
    return rows;
}

SignedRankResult compare_estimators(const std::vector<BenchmarkRow>& rows, Metric metric, const std::string& est1,
                                    const std::string& est2, double epsilon) {
    struct Acc {
        double sum1 = 0, sum2 = 0;
        int n1 = 0, n2 = 0;
    };
    std::map<std::string, Acc> by_dataset;
    for (const auto& r : rows) {
        if (std::abs(r.epsilon - epsilon) > 1e-12) continue;
        const double v = metric == Metric::KL ? r.report.kl : r.report.auc;
        if (!std::isfinite(v)) continue;
        auto& acc = by_dataset[r.dataset];
        if (r.estimator == est1) {
            acc.sum1 += v;
            ++acc.n1;
        } else if (r.estimator == est2) {
            acc.sum2 += v;
            ++acc.n2;
        }
    }
    std::vector<double> h;
    for (const auto& [name, acc] : by_dataset) {
        if (acc.n1 == 0 || acc.n2 == 0) continue;
        const double m1 = acc.sum1 / acc.n1, m2 = acc.sum2 / acc.n2;
        h.push_back(metric == Metric::KL ? m2 - m1 : m1 - m2);
    }
    return wilcoxon_signed_rank(h);
}

int threads_from_env() {
    if (const char* env = std::getenv("RKDE_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

}  // namespace rkde
