#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rkde {

// Point sets are stored one point per row (n x d).
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Library error carrying a short machine-readable category
/// ("dimension", "domain", "convergence", "singular", "io", ...).
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    [[nodiscard]] const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

inline void require(bool condition, const char* category, const std::string& message) {
    if (!condition) throw Error(category, message);
}

}  // namespace rkde
