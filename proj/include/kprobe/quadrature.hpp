#pragma once

#include <functional>

namespace kprobe {

/// Integrand that also receives the exact distances of the node from both
/// endpoints, x - a and b - x. Integrands with square-root or logarithmic
/// endpoint behaviour should build their singular factor from these instead
/// of from x, which has already lost the digits that matter there.
using EndpointIntegrand = std::function<double(double x, double from_a, double to_b)>;

struct TanhSinhOptions {
    double abs_tol = 1e-12;
    double rel_tol = 0.0;
    int max_levels = 10;
    int min_levels = 3;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;  ///< |S_L - S_{L-1}| at the accepting level
    int levels = 0;
    int evaluations = 0;
};

/// Double-exponential quadrature on a finite interval [a, b]. Levels halve the
/// step until two successive estimates agree within max(abs_tol, rel_tol |S|);
/// throws QuadratureError carrying the last two estimates otherwise.
QuadratureResult tanh_sinh(const EndpointIntegrand& f, double a, double b, const TanhSinhOptions& opts = {});

double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

}  // namespace kprobe
