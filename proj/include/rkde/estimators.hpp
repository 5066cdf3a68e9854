#pragma once

#include "rkde/kernels.hpp"
#include "rkde/loss.hpp"
#include "rkde/rkhs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rkde {

enum class EstimatorKind { KDE, VKDE, RKDE };

inline std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::KDE: return "kde";
        case EstimatorKind::VKDE: return "vkde";
        case EstimatorKind::RKDE: return "rkde";
    }
    return "unknown";
}

inline EstimatorKind estimator_kind_from_string(std::string_view name) {
    if (name == "kde") return EstimatorKind::KDE;
    if (name == "vkde") return EstimatorKind::VKDE;
    if (name == "rkde") return EstimatorKind::RKDE;
    throw Error("config", "unknown estimator '" + std::string(name) + "'");
}

enum class InitKind { Median, Uniform, Custom };

template <typename Scalar = double>
struct FitConfig {
    Scalar rel_tol = Scalar(1e-8);  // stop when |J_{k+1} - J_k| / J_k < rel_tol
    int max_iter = 200;
    InitKind init = InitKind::Median;
    Vector<Scalar> custom_weights;  // used when init == Custom
    Scalar dist_floor_rel = Scalar(1e-12);  // distance floor in units of tau
    // The objective test alone leaves weights off the fixed point by about
    // sqrt(rel_tol); the objective stop also waits for max |w_{k+1} - w_k| <= step_tol.
    Scalar step_tol = Scalar(1e-7);
    Scalar weight_tol = 0;  // stop outright when max |w_{k+1} - w_k| <= weight_tol

    void validate() const {
        require(rel_tol >= 0, "config", "rel_tol must be nonnegative");
        require(max_iter >= 1, "config", "max_iter must be at least 1");
        require(step_tol >= 0 && weight_tol >= 0, "config", "weight tolerances must be nonnegative");
        require(dist_floor_rel > 0, "config", "dist_floor must be positive");
    }
};

template <typename Scalar = double>
struct FitMeta {
    int iterations = 0;
    bool converged = true;
    Scalar objective = 0;
    std::vector<Scalar> objective_trace;  // J at the initial iterate, then after every update
    Scalar residual = 0;                  // |V(f)|_H at the returned weights
    std::vector<std::string> warnings;
};

/// A fitted weighted kernel density estimate.
///
/// KDE and RKDE evaluate sum_i w_i k_sigma(x, X_i); VKDE evaluates
/// (1/n) sum_i k_{sigma_i}(x, X_i) with per-point bandwidths.
template <typename Scalar = double>
struct DensityModel {
    EstimatorKind kind = EstimatorKind::KDE;
    KernelSpec<Scalar> kernel;
    Matrix<Scalar> train;
    Vector<Scalar> weights;
    Vector<Scalar> sigmas;  // VKDE only
    std::optional<LossSpec<Scalar>> loss;  // RKDE only
    FitMeta<Scalar> fit_meta;

    [[nodiscard]] Eigen::Index size() const { return train.rows(); }
    [[nodiscard]] int dim() const { return kernel.dim; }
};

namespace detail {

template <typename Derived>
void require_points(const Eigen::MatrixBase<Derived>& points, Eigen::Index min_rows, const char* what) {
    require(points.rows() >= min_rows, "domain",
            std::string(what) + ": need at least " + std::to_string(min_rows) + " point(s)");
    require(points.allFinite(), "domain", std::string(what) + ": non-finite coordinate");
}

template <typename Scalar>
Vector<Scalar> uniform_weights(Eigen::Index n) {
    return Vector<Scalar>::Constant(n, Scalar(1) / static_cast<Scalar>(n));
}

template <typename Scalar>
void require_simplex(const Vector<Scalar>& w, Eigen::Index n, const char* what) {
    require(w.size() == n, "dimension", std::string(what) + ": weight vector has the wrong length");
    require(w.allFinite() && w.minCoeff() >= 0, "domain", std::string(what) + ": weights must be nonnegative");
    using std::abs;
    require(abs(w.sum() - 1) <= Scalar(1e-9), "domain", std::string(what) + ": weights must sum to one");
}

template <typename Scalar>
Scalar weighted_objective(const LossSpec<Scalar>& loss, const Vector<Scalar>& dists, const Vector<Scalar>& masses) {
    Scalar j = 0;
    for (Eigen::Index i = 0; i < dists.size(); ++i) j += masses(i) * rho(loss, dists(i));
    return j;
}

}  // namespace detail

/// Median over points of the distance to the nearest other point.
template <typename Derived>
typename Derived::Scalar median_nn_bandwidth(const Eigen::MatrixBase<Derived>& points) {
    using Scalar = typename Derived::Scalar;
    detail::require_points(points, 2, "nearest-neighbour bandwidth");
    const Eigen::Index n = points.rows();
    std::vector<Scalar> nn(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            using std::sqrt;
            const Scalar d = sqrt(detail::squared_distance(points.row(i), points.row(j)));
            nn[i] = std::min(nn[i], d);
            nn[j] = std::min(nn[j], d);
        }
    const Scalar h = percentile(nn, 0.5);
    require(h > 0, "domain", "nearest-neighbour bandwidth is zero (too many duplicate points)");
    return h;
}

/// J(g) = sum_i m_i rho(|Phi(X_i) - g|_H); with no masses, m_i = 1/n.
template <typename Scalar, typename Derived>
Scalar objective(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel,
                 const LossSpec<Scalar>& loss, const Vector<Scalar>& weights) {
    const Matrix<Scalar> k = gram(kernel, points);
    const RkhsPoint<Scalar> g(weights, k);
    return detail::weighted_objective(loss, all_dists(g, k), detail::uniform_weights<Scalar>(points.rows()));
}

template <typename Scalar>
struct KirwlsResult {
    Vector<Scalar> weights;
    FitMeta<Scalar> meta;
};

/// Kernelized iteratively re-weighted least squares for
/// min_g sum_i m_i rho(|Phi(X_i) - g|_H) over the RKHS.
///
/// Each step sets w_i proportional to m_i phi(d_i) with d computed at the current
/// iterate, so every iterate is a weighted KDE. For nonincreasing phi the
/// objective never increases.
template <typename Scalar>
KirwlsResult<Scalar> kirwls(const Matrix<Scalar>& gram, const LossSpec<Scalar>& loss, const Vector<Scalar>& masses,
                            const Vector<Scalar>& init, const FitConfig<Scalar>& cfg) {
    cfg.validate();
    loss.validate();
    const Eigen::Index n = gram.rows();
    detail::require_simplex(masses, n, "KIRWLS masses");
    detail::require_simplex(init, n, "KIRWLS initial weights");

    KirwlsResult<Scalar> out;
    auto& meta = out.meta;
    Vector<Scalar> w = init;
    Vector<Scalar> d = all_dists(RkhsPoint<Scalar>(w, gram), gram);
    Scalar j = detail::weighted_objective(loss, d, masses);
    require(std::isfinite(static_cast<double>(j)), "convergence", "KIRWLS: non-finite objective");
    meta.objective_trace.push_back(j);
    meta.converged = false;

    // Equal masses cancel in the normalization; dropping them keeps the
    // quadratic-loss update bitwise equal to 1/n.
    const bool equal_masses = (masses.array() == masses(0)).all();
    Vector<Scalar> u(n);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) u(i) = equal_masses ? phi(loss, d(i)) : masses(i) * phi(loss, d(i));
        const Scalar total = u.sum();
        require(total > 0, "convergence",
                "KIRWLS: every point has zero weight (all distances beyond the loss cutoff); use a larger c");
        const Vector<Scalar> w_next = u / total;
        const Scalar step = (w_next - w).cwiseAbs().maxCoeff();
        w = w_next;
        d = all_dists(RkhsPoint<Scalar>(w, gram), gram);
        const Scalar j_next = detail::weighted_objective(loss, d, masses);
        require(std::isfinite(static_cast<double>(j_next)), "convergence", "KIRWLS: non-finite objective");
        meta.objective_trace.push_back(j_next);
        meta.iterations = it;
        using std::abs;
        const Scalar rel = j > 0 ? abs(j_next - j) / j : Scalar(0);
        j = j_next;
        if ((rel < cfg.rel_tol && step <= cfg.step_tol) || step <= cfg.weight_tol) {
            meta.converged = true;
            break;
        }
    }
    if (!meta.converged)
        meta.warnings.push_back("KIRWLS reached max_iter=" + std::to_string(cfg.max_iter) + " before converging");
    meta.objective = j;
    meta.residual = stationarity_residual(RkhsPoint<Scalar>(w, gram), loss, gram, masses);
    out.weights = std::move(w);
    return out;
}

template <typename Scalar, typename Derived>
DensityModel<Scalar> fit_kde(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel) {
    detail::require_points(points, 1, "KDE");
    require(points.cols() == kernel.dim, "dimension", "KDE: point dimension differs from kernel dimension");
    DensityModel<Scalar> model;
    model.kind = EstimatorKind::KDE;
    model.kernel = kernel;
    model.train = points;
    model.weights = detail::uniform_weights<Scalar>(points.rows());
    return model;
}

/// Variable-bandwidth KDE: sigma_i = sigma * sqrt(eta / f_KDE(X_i)) with eta the
/// mean pilot value.
template <typename Scalar, typename Derived>
DensityModel<Scalar> fit_vkde(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel) {
    DensityModel<Scalar> model = fit_kde(points, kernel);
    model.kind = EstimatorKind::VKDE;
    const Vector<Scalar> pilot = gram(kernel, points).rowwise().mean();
    for (Eigen::Index i = 0; i < pilot.size(); ++i)
        require(pilot(i) > 0 && std::isfinite(static_cast<double>(pilot(i))), "domain",
                "VKDE: pilot density underflows at training point " + std::to_string(i));
    const Scalar eta = pilot.mean();
    model.sigmas = (eta / pilot.array()).sqrt() * kernel.sigma;
    return model;
}

/// Median RKDE: KIRWLS with rho = |.| from uniform weights. Distances are floored
/// at dist_floor_rel * tau before inversion.
template <typename Scalar, typename Derived>
DensityModel<Scalar> fit_median_rkde(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel,
                                     const FitConfig<Scalar>& cfg = {}) {
    DensityModel<Scalar> model = fit_kde(points, kernel);
    model.kind = EstimatorKind::RKDE;
    model.loss = LossSpec<Scalar>::absolute(cfg.dist_floor_rel * tau(kernel));
    const Matrix<Scalar> k = gram(kernel, points);
    const Vector<Scalar> uniform = detail::uniform_weights<Scalar>(points.rows());
    auto fit = kirwls(k, *model.loss, uniform, uniform, cfg);
    model.weights = std::move(fit.weights);
    model.fit_meta = std::move(fit.meta);
    return model;
}

/// RKDE by KIRWLS. The Median init starts from the median-RKDE weights so the
/// first iterate is the median RKDE.
template <typename Scalar, typename Derived>
DensityModel<Scalar> fit_rkde(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel,
                              const LossSpec<Scalar>& loss, const FitConfig<Scalar>& cfg = {}) {
    DensityModel<Scalar> model = fit_kde(points, kernel);
    model.kind = EstimatorKind::RKDE;
    model.loss = loss;
    if (model.loss->family == LossFamily::Absolute) model.loss->floor = cfg.dist_floor_rel * tau(kernel);
    const Eigen::Index n = points.rows();
    Vector<Scalar> init;
    switch (cfg.init) {
        case InitKind::Median: init = fit_median_rkde(points, kernel, cfg).weights; break;
        case InitKind::Uniform: init = detail::uniform_weights<Scalar>(n); break;
        case InitKind::Custom: init = cfg.custom_weights; break;
    }
    const Matrix<Scalar> k = gram(kernel, points);
    auto fit = kirwls(k, *model.loss, detail::uniform_weights<Scalar>(n), init, cfg);
    model.weights = std::move(fit.weights);
    model.fit_meta = std::move(fit.meta);
    if (model.loss->degenerate()) model.fit_meta.warnings.push_back("Hampel parameters are degenerate (b == c)");
    return model;
}

/// Distances |Phi(X_i) - f|_H of every training point to a fitted weighted KDE.
template <typename Scalar>
Vector<Scalar> training_distances(const DensityModel<Scalar>& model) {
    require(model.kind != EstimatorKind::VKDE, "unsupported", "RKHS distances are undefined for VKDE models");
    const Matrix<Scalar> k = gram(model.kernel, model.train);
    return all_dists(RkhsPoint<Scalar>(model.weights, k), k);
}

/// Loss parameters from the median-RKDE distances: Hampel (a, b, c) = (median,
/// p75, p85); Huber a = median.
template <typename Scalar>
LossSpec<Scalar> loss_from_median_fit(LossFamily family, const DensityModel<Scalar>& median_fit) {
    const Vector<Scalar> d = training_distances(median_fit);
    const std::vector<Scalar> dv(d.data(), d.data() + d.size());
    switch (family) {
        case LossFamily::Hampel: {
            const auto p = select_hampel_params(dv);
            require(p.a > 0, "domain", "Hampel parameter selection: median distance is zero");
            return LossSpec<Scalar>::hampel(p.a, p.b, p.c);
        }
        case LossFamily::Huber: {
            const Scalar a = percentile(dv, 0.5);
            require(a > 0, "domain", "Huber parameter selection: median distance is zero");
            return LossSpec<Scalar>::huber(a);
        }
        case LossFamily::Quadratic: return LossSpec<Scalar>::quadratic();
        case LossFamily::Absolute: return *median_fit.loss;
    }
    return LossSpec<Scalar>::quadratic();
}

/// Full automatic recipe: median RKDE, loss parameters from its distances, then
/// KIRWLS started from the median-RKDE weights.
template <typename Scalar, typename Derived>
DensityModel<Scalar> fit_rkde_auto(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel,
                                   LossFamily family, FitConfig<Scalar> cfg = {}) {
    const DensityModel<Scalar> median = fit_median_rkde(points, kernel, cfg);
    const LossSpec<Scalar> loss = loss_from_median_fit(family, median);
    cfg.init = InitKind::Custom;
    cfg.custom_weights = median.weights;
    return fit_rkde(points, kernel, loss, cfg);
}

template <typename Scalar, typename Derived>
Scalar evaluate(const DensityModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    require(x.size() == model.dim(), "dimension",
            "evaluate: expected a point of dimension " + std::to_string(model.dim()));
    if (model.kind == EstimatorKind::VKDE) {
        Scalar sum = 0;
        for (Eigen::Index i = 0; i < model.size(); ++i)
            sum += eval(model.kernel.with_sigma(model.sigmas(i)), x, model.train.row(i));
        return sum / static_cast<Scalar>(model.size());
    }
    return kernel_column(model.kernel, x, model.train).dot(model.weights);
}

/// Densities at each row of `points`.
template <typename Scalar, typename Derived>
Vector<Scalar> evaluate_batch(const DensityModel<Scalar>& model, const Eigen::MatrixBase<Derived>& points) {
    require(points.cols() == model.dim(), "dimension",
            "evaluate: expected points of dimension " + std::to_string(model.dim()));
    if (model.kind == EstimatorKind::VKDE) {
        Vector<Scalar> out(points.rows());
        for (Eigen::Index r = 0; r < points.rows(); ++r) out(r) = evaluate(model, points.row(r));
        return out;
    }
    return cross_gram(model.kernel, points, model.train) * model.weights;
}

struct ConvexityReport {
    bool enough_points = false;         // n >= 3
    bool gram_positive_definite = false;  // Cholesky of K succeeds without jitter
    bool loss_strictly_convex = false;
    bool loss_convex_strictly_increasing = false;
    bool strictly_convex = false;
    std::string verdict;
};

/// Sufficient conditions for strict convexity of J: rho strictly convex and
/// nondecreasing, or rho convex and strictly increasing with n >= 3 and K
/// positive definite. Diagnostic only; "not guaranteed" is not a proof of
/// non-convexity.
template <typename Scalar, typename Derived>
ConvexityReport check_strict_convexity(const Eigen::MatrixBase<Derived>& points, const KernelSpec<Scalar>& kernel,
                                       const LossSpec<Scalar>& loss) {
    ConvexityReport r;
    r.enough_points = points.rows() >= 3;
    Eigen::LLT<Matrix<Scalar>> llt(gram(kernel, points));
    r.gram_positive_definite = llt.info() == Eigen::Success;
    r.loss_strictly_convex = loss.family == LossFamily::Quadratic;
    r.loss_convex_strictly_increasing = loss.convex_strictly_increasing();
    const bool via_rho = r.loss_strictly_convex;
    const bool via_gram = r.loss_convex_strictly_increasing && r.enough_points && r.gram_positive_definite;
    r.strictly_convex = via_rho || via_gram;
    if (r.strictly_convex) {
        r.verdict = "strictly convex: yes";
    } else if (!r.loss_convex_strictly_increasing) {
        r.verdict = "strictly convex: not guaranteed (loss is not convex and strictly increasing)";
    } else if (!r.gram_positive_definite) {
        r.verdict = "strictly convex: not guaranteed (K not PD)";
    } else {
        r.verdict = "strictly convex: not guaranteed (fewer than 3 points)";
    }
    return r;
}

}  // namespace rkde
