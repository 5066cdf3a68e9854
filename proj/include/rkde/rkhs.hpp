#pragma once

#include "rkde/kernels.hpp"
#include "rkde/loss.hpp"

#include <cmath>

namespace rkde {

/// g = sum_i w_i Phi(X_i), an element of the RKHS spanned by a fixed anchor set.
/// K w and w^T K w are computed once at construction.
template <typename Scalar = double>
class RkhsPoint {
public:
    RkhsPoint(Vector<Scalar> weights, const Matrix<Scalar>& gram)
        : weights_(std::move(weights)) {
        require(gram.rows() == gram.cols() && gram.rows() == weights_.size(), "dimension",
                "RKHS element: weights and kernel matrix sizes differ");
        require(weights_.allFinite(), "domain", "RKHS element: non-finite weights");
        kw_ = gram * weights_;
        norm_sq_ = weights_.dot(kw_);
    }

    [[nodiscard]] const Vector<Scalar>& weights() const { return weights_; }
    /// (K w)_j = g(X_j).
    [[nodiscard]] const Vector<Scalar>& values_at_anchors() const { return kw_; }
    /// |g|_H^2 = w^T K w, not clamped.
    [[nodiscard]] Scalar norm_squared() const { return norm_sq_; }
    [[nodiscard]] Eigen::Index size() const { return weights_.size(); }

private:
    Vector<Scalar> weights_;
    Vector<Scalar> kw_;
    Scalar norm_sq_;
};

namespace detail {
template <typename Scalar>
Scalar clamped_sqrt(Scalar v) {
    using std::sqrt;
    return v > 0 ? sqrt(v) : Scalar(0);
}
}  // namespace detail

/// |Phi(X_j) - g|_H = sqrt(K_jj - 2 (K w)_j + w^T K w).
template <typename Scalar>
Scalar point_to_element_dist(const RkhsPoint<Scalar>& g, Eigen::Index j, const Matrix<Scalar>& gram) {
    require(j >= 0 && j < g.size(), "domain", "RKHS distance: anchor index out of range");
    return detail::clamped_sqrt(gram(j, j) - 2 * g.values_at_anchors()(j) + g.norm_squared());
}

/// Distances from every anchor feature vector to g.
template <typename Scalar>
Vector<Scalar> all_dists(const RkhsPoint<Scalar>& g, const Matrix<Scalar>& gram) {
    require(gram.rows() == g.size(), "dimension", "RKHS distance: kernel matrix size mismatch");
    Vector<Scalar> sq = gram.diagonal() - 2 * g.values_at_anchors();
    sq.array() += g.norm_squared();
    return sq.unaryExpr([](Scalar v) { return detail::clamped_sqrt(v); });
}

/// |Phi(x) - g|_H for an arbitrary point x.
template <typename Scalar, typename DerivedX, typename DerivedP>
Scalar external_dist(const RkhsPoint<Scalar>& g, const Eigen::MatrixBase<DerivedX>& x,
                     const KernelSpec<Scalar>& kernel, const Eigen::MatrixBase<DerivedP>& anchors) {
    require(anchors.rows() == g.size(), "dimension", "RKHS distance: anchor count mismatch");
    const Vector<Scalar> kx = kernel_column(kernel, x, anchors);
    return detail::clamped_sqrt(kernel.normalizer() - 2 * kx.dot(g.weights()) + g.norm_squared());
}

/// |V(g)|_H where V(g) = sum_i m_i phi(d_i) (Phi(X_i) - g) and m are the sample
/// masses (1/n for the empirical distribution). V(g) = 0 characterizes
/// stationary points of J.
template <typename Scalar>
Scalar stationarity_residual(const RkhsPoint<Scalar>& g, const LossSpec<Scalar>& loss,
                             const Matrix<Scalar>& gram, const Vector<Scalar>& masses) {
    require(masses.size() == g.size(), "dimension", "stationarity residual: mass vector size mismatch");
    const Vector<Scalar> d = all_dists(g, gram);
    Vector<Scalar> v(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) v(i) = masses(i) * phi(loss, d(i));
    const Vector<Scalar> coeff = v - v.sum() * g.weights();
    return detail::clamped_sqrt(coeff.dot(gram * coeff));
}

template <typename Scalar>
Scalar stationarity_residual(const RkhsPoint<Scalar>& g, const LossSpec<Scalar>& loss,
                             const Matrix<Scalar>& gram) {
    const auto n = g.size();
    const Vector<Scalar> uniform = Vector<Scalar>::Constant(n, Scalar(1) / static_cast<Scalar>(n));
    return stationarity_residual(g, loss, gram, uniform);
}

}  // namespace rkde
