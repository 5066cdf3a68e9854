#pragma once

#include "rkde/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace rkde {

enum class LossFamily { Quadratic, Absolute, Huber, Hampel };

inline std::string_view to_string(LossFamily family) {
    switch (family) {
        case LossFamily::Quadratic: return "quadratic";
        case LossFamily::Absolute: return "absolute";
        case LossFamily::Huber: return "huber";
        case LossFamily::Hampel: return "hampel";
    }
    return "unknown";
}

inline LossFamily loss_family_from_string(std::string_view name) {
    if (name == "quadratic") return LossFamily::Quadratic;
    if (name == "absolute") return LossFamily::Absolute;
    if (name == "huber") return LossFamily::Huber;
    if (name == "hampel") return LossFamily::Hampel;
    throw Error("config", "unknown loss family '" + std::string(name) + "'");
}

/// Robust loss rho on RKHS distances with psi = rho', phi = psi(x)/x and
/// q = x psi'(x) - psi(x).
///
/// Huber uses the threshold `a`; Hampel uses 0 < a <= b <= c. Intervals follow
/// the usual definitions: Huber's linear branch is closed ([0, a]) while
/// Hampel's branches are closed on the left ([0,a), [a,b), [b,c), [c,inf)).
/// Absolute loss has an unbounded phi at zero; distances below `floor` are
/// raised to `floor` before dividing.
template <typename Scalar = double>
struct LossSpec {
    LossFamily family = LossFamily::Quadratic;
    Scalar a = 0;
    Scalar b = 0;
    Scalar c = 0;
    Scalar floor = Scalar(1e-12);

    static LossSpec quadratic() { return {LossFamily::Quadratic}; }
    static LossSpec absolute(Scalar floor = Scalar(1e-12)) {
        return validated({LossFamily::Absolute, 0, 0, 0, floor});
    }
    static LossSpec huber(Scalar a) { return validated({LossFamily::Huber, a}); }
    static LossSpec hampel(Scalar a, Scalar b, Scalar c) { return validated({LossFamily::Hampel, a, b, c}); }

    static LossSpec validated(LossSpec spec) {
        spec.validate();
        return spec;
    }

    void validate() const {
        auto finite = [](Scalar v) { return std::isfinite(static_cast<double>(v)); };
        switch (family) {
            case LossFamily::Quadratic: break;
            case LossFamily::Absolute:
                require(finite(floor) && floor > 0, "config", "absolute loss requires a positive distance floor");
                break;
            case LossFamily::Huber:
                require(finite(a) && a > 0, "config", "Huber loss requires a > 0");
                break;
            case LossFamily::Hampel:
                require(finite(a) && finite(b) && finite(c) && a > 0 && a <= b && b <= c, "config",
                        "Hampel loss requires 0 < a <= b <= c");
                break;
        }
    }

    /// Hampel with b == c has an empty descending branch (hard jump to zero).
    [[nodiscard]] bool degenerate() const { return family == LossFamily::Hampel && !(b < c); }

    /// Convex and strictly increasing on [0, inf): only Huber of the robust losses.
    [[nodiscard]] bool convex_strictly_increasing() const {
        return family == LossFamily::Quadratic || family == LossFamily::Huber || family == LossFamily::Absolute;
    }
};

namespace detail {
template <typename Scalar>
void require_nonnegative(Scalar x) {
    require(x >= 0, "domain", "loss evaluated at a negative distance");
}
}  // namespace detail

template <typename Scalar>
Scalar psi(const LossSpec<Scalar>& spec, Scalar x) {
    detail::require_nonnegative(x);
    switch (spec.family) {
        case LossFamily::Quadratic: return x;
        case LossFamily::Absolute: return x > 0 ? Scalar(1) : Scalar(0);
        case LossFamily::Huber: return x <= spec.a ? x : spec.a;
        case LossFamily::Hampel:
            if (x < spec.a) return x;
            if (x < spec.b) return spec.a;
            if (x < spec.c) return spec.a * (spec.c - x) / (spec.c - spec.b);
            return 0;
    }
    return 0;
}

template <typename Scalar>
Scalar phi(const LossSpec<Scalar>& spec, Scalar x) {
    detail::require_nonnegative(x);
    switch (spec.family) {
        case LossFamily::Quadratic: return 1;
        case LossFamily::Absolute: return 1 / std::max(x, spec.floor);
        case LossFamily::Huber: return x <= spec.a ? Scalar(1) : spec.a / x;
        case LossFamily::Hampel:
            if (x < spec.a) return 1;
            if (x < spec.b) return spec.a / x;
            if (x < spec.c) return spec.a * (spec.c - x) / ((spec.c - spec.b) * x);
            return 0;
    }
    return 0;
}

/// rho(x) = int_0^x psi, so rho(0) = 0.
template <typename Scalar>
Scalar rho(const LossSpec<Scalar>& spec, Scalar x) {
    detail::require_nonnegative(x);
    const Scalar a = spec.a, b = spec.b, c = spec.c;
    switch (spec.family) {
        case LossFamily::Quadratic: return x * x / 2;
        case LossFamily::Absolute: return x;
        case LossFamily::Huber: return x <= a ? x * x / 2 : a * x - a * a / 2;
        case LossFamily::Hampel: {
            if (x < a) return x * x / 2;
            const Scalar at_b = a * a / 2 + a * (b - a);
            if (x < b) return a * a / 2 + a * (x - a);
            if (x < c) return at_b + a / (c - b) * (c * (x - b) - (x * x - b * b) / 2);
            return at_b + a * (c - b) / 2;
        }
    }
    return 0;
}

template <typename Scalar>
Scalar q_fn(const LossSpec<Scalar>& spec, Scalar x) {
    detail::require_nonnegative(x);
    switch (spec.family) {
        case LossFamily::Quadratic: return 0;
        case LossFamily::Absolute: return -psi(spec, x);
        case LossFamily::Huber: return x <= spec.a ? Scalar(0) : -spec.a;
        case LossFamily::Hampel:
            if (x < spec.a) return 0;
            if (x < spec.b) return -spec.a;
            if (x < spec.c) return -spec.a * spec.c / (spec.c - spec.b);
            return 0;
    }
    return 0;
}

/// Linear-interpolation percentile (position p * (n - 1) in the sorted sample).
template <typename Scalar>
Scalar percentile(std::vector<Scalar> values, double p) {
    require(!values.empty(), "domain", "percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(lo));
    return values[lo] + frac * (values[hi] - values[lo]);
}

template <typename Scalar>
struct HampelParams {
    Scalar a, b, c;
    bool degenerate;  // b == c: the descending branch is empty
};

/// a = median, b = 75th and c = 85th percentile of the distances.
template <typename Scalar>
HampelParams<Scalar> select_hampel_params(const std::vector<Scalar>& dists) {
    require(!dists.empty(), "domain", "Hampel parameter selection needs at least one distance");
    for (Scalar d : dists)
        require(std::isfinite(static_cast<double>(d)) && d >= 0, "domain",
                "Hampel parameter selection: distances must be finite and nonnegative");
    HampelParams<Scalar> out{percentile(dists, 0.5), percentile(dists, 0.75), percentile(dists, 0.85), false};
    out.degenerate = !(out.b < out.c);
    return out;
}

}  // namespace rkde
