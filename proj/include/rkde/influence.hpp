#pragma once

#include "rkde/estimators.hpp"

#include <cmath>
#include <numbers>

namespace rkde {

/// IF(x, x') = sum_i alphas_i k(x, X_i) + alpha_prime k(x, x').
template <typename Scalar = double>
struct InfluenceResult {
    Vector<Scalar> alphas;
    Scalar alpha_prime = 0;
    Vector<Scalar> x_prime;
    Scalar condition = 1;  // condition estimate of the linear system (1 for KDE)

    /// Evaluate the influence function at x.
    template <typename Derived>
    Scalar operator()(const KernelSpec<Scalar>& kernel, const Matrix<Scalar>& train,
                      const Eigen::MatrixBase<Derived>& x) const {
        return kernel_column(kernel, x, train).dot(alphas) + alpha_prime * eval(kernel, x, x_prime);
    }
};

template <typename Scalar, typename Derived>
InfluenceResult<Scalar> kde_influence(const DensityModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x_prime) {
    require(model.kind == EstimatorKind::KDE, "unsupported", "kde_influence requires a KDE model");
    require(x_prime.size() == model.dim(), "dimension", "influence: x' has the wrong dimension");
    InfluenceResult<Scalar> r;
    r.alphas = Vector<Scalar>::Constant(model.size(), -Scalar(1) / static_cast<Scalar>(model.size()));
    r.alpha_prime = 1;
    r.x_prime = x_prime;
    return r;
}

/// Empirical influence function of a fitted RKDE.
///
/// With r_i = |Phi(X_i) - f|, r' = |Phi(x') - f|, gamma = sum_i phi(r_i),
/// Q = diag(q(r_i) / r_i^3) and P = I - 1 w^T:
///   alpha' = n phi(r') / gamma
///   (gamma I + P^T Q P K) alpha = -n phi(r') w - alpha' P^T Q P k'
/// Summing the system gives 1^T alpha = -alpha' because 1^T P^T = 0.
template <typename Scalar, typename Derived>
InfluenceResult<Scalar> rkde_influence(const DensityModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x_prime,
                                       Scalar dist_floor_rel = Scalar(1e-12)) {
    require(model.kind == EstimatorKind::RKDE && model.loss, "unsupported",
            "rkde_influence requires a fitted RKDE model");
    require(x_prime.size() == model.dim(), "dimension", "influence: x' has the wrong dimension");
    require(x_prime.allFinite(), "domain", "influence: non-finite x'");
    const auto& loss = *model.loss;
    const auto& kernel = model.kernel;
    const Eigen::Index n = model.size();
    const Scalar t = tau(kernel);
    const Scalar tau_sq = kernel.normalizer();

    const Matrix<Scalar> k = gram(kernel, model.train);
    const Vector<Scalar> k_prime = kernel_column(kernel, x_prime, model.train);
    for (Eigen::Index i = 0; i < n; ++i)
        require(detail::squared_distance(x_prime, model.train.row(i)) > 0, "singular",
                "influence: x' coincides with training point " + std::to_string(i));

    // K' on {X_i} and x' must be positive definite.
    Matrix<Scalar> k_ext(n + 1, n + 1);
    k_ext.topLeftCorner(n, n) = k;
    k_ext.block(0, n, n, 1) = k_prime;
    k_ext.block(n, 0, 1, n) = k_prime.transpose();
    k_ext(n, n) = tau_sq;
    k_ext.diagonal().array() += Scalar(1e-10) * tau_sq;
    require(Eigen::LLT<Matrix<Scalar>>(k_ext).info() == Eigen::Success, "singular",
            "influence: extended kernel matrix is not positive definite");

    const RkhsPoint<Scalar> f(model.weights, k);
    const Vector<Scalar> r = all_dists(f, k);
    using std::sqrt;
    const Scalar r_prime = detail::clamped_sqrt(tau_sq - 2 * k_prime.dot(model.weights) + f.norm_squared());

    const Scalar min_r = Scalar(1e-9) * t;
    Vector<Scalar> qdiag(n);
    Scalar gamma = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        require(r(i) >= min_r, "singular",
                "influence: training point " + std::to_string(i) + " lies on the fitted density in feature space");
        gamma += phi(loss, r(i));
        const Scalar ri = std::max(r(i), dist_floor_rel * t);
        qdiag(i) = q_fn(loss, r(i)) / (ri * ri * ri);
    }
    require(gamma > 0, "convergence", "influence: all training weights are zero");
    const Scalar phi_prime = phi(loss, r_prime);
    const Scalar nn = static_cast<Scalar>(n);

    InfluenceResult<Scalar> out;
    out.alpha_prime = nn * phi_prime / gamma;
    out.x_prime = x_prime;

    const Matrix<Scalar> p = Matrix<Scalar>::Identity(n, n) - Vector<Scalar>::Ones(n) * model.weights.transpose();
    const Matrix<Scalar> ptqp = p.transpose() * qdiag.asDiagonal() * p;
    Matrix<Scalar> system = ptqp * k;
    system.diagonal().array() += gamma;
    const Vector<Scalar> rhs = -nn * phi_prime * model.weights - out.alpha_prime * (ptqp * k_prime);

    Eigen::PartialPivLU<Matrix<Scalar>> lu(system);
    const Scalar rcond = lu.rcond();
    require(rcond > std::numeric_limits<Scalar>::epsilon(), "singular",
            "influence: linear system is singular (condition estimate " +
                std::to_string(static_cast<double>(rcond > 0 ? 1 / rcond : INFINITY)) + ")");
    out.alphas = lu.solve(rhs);
    out.condition = 1 / rcond;
    require(out.alphas.allFinite(), "singular", "influence: non-finite solution");
    return out;
}

/// Dispatches on the model kind. VKDE has no influence formula.
template <typename Scalar, typename Derived>
InfluenceResult<Scalar> influence(const DensityModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x_prime) {
    switch (model.kind) {
        case EstimatorKind::KDE: return kde_influence(model, x_prime);
        case EstimatorKind::RKDE: return rkde_influence(model, x_prime);
        case EstimatorKind::VKDE: break;
    }
    throw Error("unsupported", "no influence function is available for VKDE models");
}

/// alpha(x') = IF(x', x'): the change of the estimate at the contaminating point.
template <typename Scalar>
Scalar alpha_measure(const DensityModel<Scalar>& model, const InfluenceResult<Scalar>& inf) {
    return inf(model.kernel, model.train, inf.x_prime);
}

/// beta(x') = (int IF(x, x')^2 dx)^{1/2}, closed form for Gaussian kernels via
/// int k_s(x, a) k_s(x, b) dx = k_{s sqrt 2}(a, b).
template <typename Scalar>
Scalar beta_measure(const DensityModel<Scalar>& model, const InfluenceResult<Scalar>& inf) {
    require(model.kernel.family == KernelFamily::Gaussian, "unsupported",
            "beta measure has a closed form only for the Gaussian kernel");
    const Eigen::Index n = model.size();
    Matrix<Scalar> centers(n + 1, model.dim());
    centers.topRows(n) = model.train;
    centers.row(n) = inf.x_prime.transpose();
    Vector<Scalar> c(n + 1);
    c.head(n) = inf.alphas;
    c(n) = inf.alpha_prime;
    using std::sqrt;
    const auto wide = KernelSpec<Scalar>::gaussian(model.kernel.sigma * std::numbers::sqrt2_v<Scalar>, model.dim());
    const Matrix<Scalar> m = gram(wide, centers);
    return detail::clamped_sqrt(c.dot(m * c));
}

}  // namespace rkde
