#include "rkde/loss.hpp"

#include <gtest/gtest.h>

#include <numeric>

using rkde::LossSpec;

namespace {

const LossSpec<double> hampel = LossSpec<double>::hampel(1, 2, 4);
const LossSpec<double> huber = LossSpec<double>::huber(1);

std::vector<LossSpec<double>> all_losses() {
    return {LossSpec<double>::quadratic(), LossSpec<double>::absolute(1e-12), huber, hampel,
            LossSpec<double>::huber(0.3), LossSpec<double>::hampel(0.5, 0.5, 2)};
}

// Composite midpoint rule for int_0^x psi. It never samples x = 0, where the
// absolute loss's psi jumps.
double integrate_psi(const LossSpec<double>& loss, double x) {
    const int m = 20000;
    const double h = x / m;
    double s = 0;
    for (int i = 0; i < m; ++i) s += rkde::psi(loss, (i + 0.5) * h);
    return s * h;
}

}  // namespace

TEST(Psi, HampelBranches) {
    EXPECT_DOUBLE_EQ(rkde::psi(hampel, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(rkde::psi(hampel, 1.5), 1.0);
    EXPECT_DOUBLE_EQ(rkde::psi(hampel, 3.0), 0.5);
    EXPECT_DOUBLE_EQ(rkde::psi(hampel, 5.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::psi(LossSpec<double>::quadratic(), 2.5), 2.5);
    EXPECT_DOUBLE_EQ(rkde::psi(LossSpec<double>::absolute(), 2.5), 1.0);
}

TEST(Psi, KnotsAreClosedLeft) {
    // Huber's linear branch includes a; Hampel's knots belong to the branch on their right.
    EXPECT_DOUBLE_EQ(rkde::q_fn(huber, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 1.0), -1.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 2.0), -2.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 4.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::psi(hampel, 4.0), 0.0);
}

TEST(Phi, Examples) {
    EXPECT_DOUBLE_EQ(rkde::phi(huber, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(rkde::phi(huber, 4.0), 0.25);
    EXPECT_DOUBLE_EQ(rkde::phi(hampel, 8.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::phi(hampel, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(rkde::phi(LossSpec<double>::absolute(1e-6), 0.0), 1e6);
}

TEST(Rho, HampelExamplesAndQuadrature) {
    EXPECT_DOUBLE_EQ(rkde::rho(hampel, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::rho(hampel, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(rkde::rho(hampel, 4.0), 2.5);
    EXPECT_DOUBLE_EQ(rkde::rho(hampel, 10.0), 2.5);
    for (const auto& loss : all_losses())
        for (double x : {0.2, 0.9, 1.7, 2.6, 3.3, 5.0})
            EXPECT_NEAR(rkde::rho(loss, x), integrate_psi(loss, x), 1e-6) << rkde::to_string(loss.family) << " " << x;
}

TEST(Loss, PsiEqualsPhiTimesX) {
    for (const auto& loss : all_losses())
        for (int i = 1; i <= 1000; ++i) {
            const double x = i * 0.007;
            const double p = rkde::psi(loss, x);
            EXPECT_NEAR(rkde::phi(loss, x) * x, p, 1e-12 * std::max(1.0, std::abs(p)));
        }
}

TEST(Loss, RhoNondecreasingContinuousAndSubLinearAtZero) {
    for (const auto& loss : all_losses()) {
        double prev = 0;
        for (int i = 1; i <= 20000; ++i) {
            const double x = i * 3e-4;
            const double r = rkde::rho(loss, x);
            EXPECT_GE(r, prev);
            EXPECT_LE(r - prev, 3e-4 * std::max(1.0, x) + 1e-15);
            prev = r;
        }
        if (loss.family == rkde::LossFamily::Absolute) continue;
        for (double x : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) EXPECT_LE(rkde::rho(loss, x) / x, x);
    }
}

TEST(Loss, PhiNonincreasingAndBounded) {
    for (const auto& loss : {huber, hampel, LossSpec<double>::huber(0.3), LossSpec<double>::hampel(0.5, 0.5, 2)}) {
        double prev = rkde::phi(loss, 0.0);
        for (int i = 1; i <= 5000; ++i) {
            const double x = i * 1e-3;
            const double f = rkde::phi(loss, x);
            EXPECT_LE(f, prev);
            EXPECT_LE(f, 1.0);
            EXPECT_LE(rkde::psi(loss, x), loss.a);
            prev = f;
        }
    }
}

TEST(Q, Examples) {
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 1.5), -1.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 3.0), -2.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(hampel, 6.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(huber, 3.0), -1.0);
    EXPECT_DOUBLE_EQ(rkde::q_fn(LossSpec<double>::quadratic(), 3.0), 0.0);
}

TEST(Q, MatchesFiniteDifferenceAwayFromKnots) {
    const double h = 1e-6;
    for (const auto& loss : all_losses()) {
        const std::vector<double> knots{loss.a, loss.b, loss.c, 0.0};
        for (int i = 1; i < 600; ++i) {
            const double x = i * 0.01 + 0.003;
            if (std::any_of(knots.begin(), knots.end(), [&](double k) { return std::abs(x - k) < 10 * h; })) continue;
            const double dpsi = (rkde::psi(loss, x + h) - rkde::psi(loss, x - h)) / (2 * h);
            EXPECT_NEAR(rkde::q_fn(loss, x), x * dpsi - rkde::psi(loss, x), 1e-6) << rkde::to_string(loss.family);
        }
    }
}

TEST(Loss, Errors) {
    EXPECT_THROW(rkde::psi(huber, -1.0), rkde::Error);
    EXPECT_THROW(rkde::phi(hampel, -1e-9), rkde::Error);
    EXPECT_THROW(rkde::rho(hampel, -2.0), rkde::Error);
    EXPECT_THROW(LossSpec<double>::huber(0), rkde::Error);
    EXPECT_THROW(LossSpec<double>::hampel(2, 1, 3), rkde::Error);
    EXPECT_THROW(LossSpec<double>::hampel(1, 3, 2), rkde::Error);
    EXPECT_THROW(rkde::loss_family_from_string("tukey"), rkde::Error);
}

TEST(HampelParams, Percentiles) {
    std::vector<double> d(100);
    std::iota(d.begin(), d.end(), 1.0);
    const auto p = rkde::select_hampel_params(d);
    EXPECT_NEAR(p.a, 50.5, 1e-12);
    EXPECT_NEAR(p.b, 75.25, 1e-12);
    EXPECT_NEAR(p.c, 85.15, 1e-12);
    EXPECT_FALSE(p.degenerate);

    const auto same = rkde::select_hampel_params(std::vector<double>(9, 2.0));
    EXPECT_EQ(same.a, 2.0);
    EXPECT_EQ(same.c, 2.0);
    EXPECT_TRUE(same.degenerate);

    const auto single = rkde::select_hampel_params(std::vector<double>{3.0});
    EXPECT_EQ(single.a, 3.0);
    EXPECT_EQ(single.b, 3.0);
    EXPECT_EQ(single.c, 3.0);

    EXPECT_THROW(rkde::select_hampel_params(std::vector<double>{}), rkde::Error);
    EXPECT_THROW(rkde::select_hampel_params(std::vector<double>{1.0, NAN}), rkde::Error);
}

TEST(Loss, DegenerateHampelDropsDescendingBranch) {
    const auto deg = LossSpec<double>::hampel(1, 2, 2);
    EXPECT_TRUE(deg.degenerate());
    EXPECT_DOUBLE_EQ(rkde::psi(deg, 1.999), 1.0);
    EXPECT_DOUBLE_EQ(rkde::psi(deg, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(rkde::rho(deg, 5.0), rkde::rho(deg, 2.0));
}
