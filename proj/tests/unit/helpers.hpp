#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kprobe/model.hpp"

namespace kprobe::test {

inline nlohmann::json term(std::vector<int> e, double c) { return {{"exponents", std::move(e)}, {"coeff", c}}; }

inline nlohmann::json saddle(double eps = 1.0) {
    return {{"kind", "saddle-chart"}, {"params", {{"epsilon", eps}}}, {"lobe", "inner"}};
}

inline nlohmann::json model_spec(int center_dim, std::vector<nlohmann::json> factors,
                                 std::vector<nlohmann::json> terms, std::string label = "test") {
    return {{"label", std::move(label)},
            {"center_dim", center_dim},
            {"factors", std::move(factors)},
            {"hamiltonian", {{"terms", std::move(terms)}}}};
}

inline MomentumPoint pt(std::vector<double> v) { return {std::move(v)}; }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace kprobe::test

namespace kprobe::test {

/// 5 x 5 grid over the first two coordinates that vary: center coordinates
/// in [-0.1, 0.1], singular ones log-spaced over [1e-6, 1e-2]. Remaining
/// coordinates sit at 0.05 (center) or 1e-3 (singular).
inline std::vector<MomentumPoint> grid5x5(const SystemModel& m) {
    const std::size_t n = m.n();
    auto value = [&](std::size_t j, int a) {
        return m.is_singular_coordinate(j) ? std::pow(10.0, -6.0 + a) : -0.1 + 0.05 * a;
    };
    std::vector<std::size_t> axes;
    for (std::size_t j = 0; j < n && axes.size() < 2; ++j) axes.push_back(j);
    std::vector<MomentumPoint> out;
    const int na = axes.size() > 1 ? 5 : 1;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < na; ++b) {
            MomentumPoint F{std::vector<double>(n)};
            for (std::size_t j = 0; j < n; ++j) F[j] = m.is_singular_coordinate(j) ? 1e-3 : 0.05;
            F[axes[0]] = value(axes[0], a);
            if (axes.size() > 1) F[axes[1]] = value(axes[1], b);
            out.push_back(F);
        }
    return out;
}

}  // namespace kprobe::test
