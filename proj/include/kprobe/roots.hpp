#pragma once

#include <functional>

namespace kprobe {

struct RootOptions {
    double abs_tol = 1e-13;
    int max_iterations = 200;
};

/// Root of g in [lo, hi], where g(lo) and g(hi) differ in sign. Bisection
/// shrinks the bracket until Newton steps (using dg) stay inside it, then
/// Newton polishes until the step falls below abs_tol or to the last few ulps.
double bracketed_root(const std::function<double(double)>& g, const std::function<double(double)>& dg, double lo,
                      double hi, const RootOptions& opts = {});

}  // namespace kprobe
