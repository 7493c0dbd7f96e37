#include "kprobe/roots.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "kprobe/error.hpp"

namespace kprobe {

double bracketed_root(const std::function<double(double)>& g, const std::function<double(double)>& dg, double lo,
                      double hi, const RootOptions& opts) {
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (std::signbit(glo) == std::signbit(ghi))
        throw NumericalError(fmt::format("root not bracketed in [{:.17g}, {:.17g}]", lo, hi));

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double gx = g(x);
        if (gx == 0.0) return x;
        if (std::signbit(gx) == std::signbit(glo)) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
        const double d = dg(x);
        double next = (d != 0.0 && std::isfinite(d)) ? x - gx / d : lo - 1.0;
        const bool newton_ok = next > lo && next < hi;
        if (!newton_ok) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        const double ulp_tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x);
        if (newton_ok && (step <= ulp_tol || (step <= opts.abs_tol && step <= 1e-3 * std::abs(x)))) {
            // one more Newton step once inside the tolerance band
            const double gx2 = g(x), d2 = dg(x);
            if (d2 != 0.0 && std::isfinite(d2)) {
                const double polished = x - gx2 / d2;
                if (polished >= lo && polished <= hi) x = polished;
            }
            return x;
        }
        if (hi - lo <= ulp_tol) return x;
    }
    return x;
}

}  // namespace kprobe
