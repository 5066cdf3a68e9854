#pragma once

#include "rkde/common.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace rkde {

enum class KernelFamily { Gaussian, Student, Laplacian };

inline std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Student: return "student";
        case KernelFamily::Laplacian: return "laplacian";
    }
    return "unknown";
}

inline KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "student") return KernelFamily::Student;
    if (name == "laplacian") return KernelFamily::Laplacian;
    throw Error("config", "unknown kernel family '" + std::string(name) + "'");
}

/// Radial positive semi-definite smoothing kernel k_sigma(x, y) = g(|x - y|^2),
/// normalized to integrate to one over R^dim.
template <typename Scalar = double>
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    Scalar sigma = 1;
    int dim = 1;
    Scalar nu = 1;  // Student degrees of freedom, ignored by the other families

    static KernelSpec gaussian(Scalar sigma, int dim) {
        return validated({KernelFamily::Gaussian, sigma, dim, Scalar(1)});
    }
    static KernelSpec student(Scalar sigma, int dim, Scalar nu = 1) {
        return validated({KernelFamily::Student, sigma, dim, nu});
    }
    static KernelSpec laplacian(Scalar sigma, int dim) {
        return validated({KernelFamily::Laplacian, sigma, dim, Scalar(1)});
    }

    static KernelSpec validated(KernelSpec spec) {
        spec.validate();
        return spec;
    }

    void validate() const {
        require(std::isfinite(static_cast<double>(sigma)) && sigma > 0, "config",
                "kernel bandwidth must be positive and finite");
        require(dim >= 1, "config", "kernel dimension must be at least 1");
        require(family != KernelFamily::Student || (std::isfinite(static_cast<double>(nu)) && nu > 0),
                "config", "Student kernel requires nu > 0");
    }

    [[nodiscard]] KernelSpec with_sigma(Scalar new_sigma) const {
        KernelSpec copy = *this;
        copy.sigma = new_sigma;
        copy.validate();
        return copy;
    }

    /// Normalizing constant: k(x, y) = normalizer() * shape(|x - y|^2).
    [[nodiscard]] Scalar normalizer() const {
        using std::exp;
        using std::lgamma;
        using std::log;
        const Scalar d = static_cast<Scalar>(dim);
        const Scalar pi = std::numbers::pi_v<Scalar>;
        switch (family) {
            case KernelFamily::Gaussian:
                return exp(-d * (Scalar(0.5) * log(2 * pi) + log(sigma)));
            case KernelFamily::Student:
                return exp(lgamma((nu + d) / 2) - lgamma(nu / 2) - d / 2 * log(nu * pi) - d * log(sigma));
            case KernelFamily::Laplacian:
                // c_d = Gamma(d/2) / (2 pi^{d/2} Gamma(d)), so that c_d * int exp(-|u|) du = 1.
                return exp(lgamma(d / 2) - log(Scalar(2)) - d / 2 * log(pi) - lgamma(d) - d * log(sigma));
        }
        return 0;
    }

    /// Unnormalized radial profile as a function of squared distance.
    [[nodiscard]] Scalar shape(Scalar sq_dist) const {
        using std::exp;
        using std::pow;
        using std::sqrt;
        switch (family) {
            case KernelFamily::Gaussian:
                return exp(-sq_dist / (2 * sigma * sigma));
            case KernelFamily::Student:
                return pow(1 + sq_dist / (nu * sigma * sigma), -(nu + dim) / 2);
            case KernelFamily::Laplacian:
                return exp(-sqrt(sq_dist) / sigma);
        }
        return 0;
    }
};

namespace detail {

template <typename DerivedA, typename DerivedB>
auto squared_distance(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) {
    using Scalar = typename DerivedA::Scalar;
    // long double accumulation; cancellation cannot make the sum negative but
    // we clamp anyway after the cast back.
    long double acc = 0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const long double diff = static_cast<long double>(x(k)) - static_cast<long double>(y(k));
        acc += diff * diff;
    }
    const auto out = static_cast<Scalar>(acc);
    return out < Scalar(0) ? Scalar(0) : out;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

}  // namespace detail

/// k_sigma(x, y) for two points given as vectors (row or column).
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar eval(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedA>& x,
            const Eigen::MatrixBase<DerivedB>& y) {
    require(x.size() == spec.dim && y.size() == spec.dim, "dimension",
            "kernel evaluation: expected points of dimension " + std::to_string(spec.dim));
    require(detail::all_finite(x) && detail::all_finite(y), "domain",
            "kernel evaluation: non-finite coordinate");
    return spec.normalizer() * spec.shape(detail::squared_distance(x, y));
}

/// tau = |Phi(x)|_H = sqrt(k(0, 0)), the same for every x.
template <typename Scalar>
Scalar tau(const KernelSpec<Scalar>& spec) {
    using std::sqrt;
    return sqrt(spec.normalizer());
}

/// m x n matrix of k(a_i, b_j) for point sets stored one point per row.
template <typename Scalar, typename DerivedA, typename DerivedB>
Matrix<Scalar> cross_gram(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedA>& a,
                          const Eigen::MatrixBase<DerivedB>& b) {
    require(a.rows() >= 1 && b.rows() >= 1, "domain", "kernel matrix of an empty point set");
    require(a.cols() == spec.dim && b.cols() == spec.dim, "dimension",
            "kernel matrix: expected points of dimension " + std::to_string(spec.dim));
    require(detail::all_finite(a) && detail::all_finite(b), "domain", "kernel matrix: non-finite coordinate");
    const Scalar norm = spec.normalizer();
    Matrix<Scalar> out(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out(i, j) = norm * spec.shape(detail::squared_distance(a.row(i), b.row(j)));
    return out;
}

/// Symmetric n x n Gram matrix K_ij = k(X_i, X_j) with an exactly constant diagonal.
template <typename Scalar, typename Derived>
Matrix<Scalar> gram(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<Derived>& points) {
    const Eigen::Index n = points.rows();
    require(n >= 1, "domain", "kernel matrix of an empty point set");
    require(points.cols() == spec.dim, "dimension",
            "kernel matrix: expected points of dimension " + std::to_string(spec.dim));
    require(detail::all_finite(points), "domain", "kernel matrix: non-finite coordinate");
    const Scalar norm = spec.normalizer();
    Matrix<Scalar> out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out(j, j) = norm;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            out(i, j) = norm * spec.shape(detail::squared_distance(points.row(i), points.row(j)));
            out(j, i) = out(i, j);
        }
    }
    return out;
}

/// Row vector of k(x, X_i) for a single query point.
template <typename Scalar, typename DerivedX, typename DerivedP>
Vector<Scalar> kernel_column(const KernelSpec<Scalar>& spec, const Eigen::MatrixBase<DerivedX>& x,
                             const Eigen::MatrixBase<DerivedP>& points) {
    require(x.size() == spec.dim && points.cols() == spec.dim, "dimension",
            "kernel evaluation: expected points of dimension " + std::to_string(spec.dim));
    require(detail::all_finite(x), "domain", "kernel evaluation: non-finite coordinate");
    const Scalar norm = spec.normalizer();
    Vector<Scalar> out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out(i) = norm * spec.shape(detail::squared_distance(x, points.row(i)));
    return out;
}

}  // namespace rkde
