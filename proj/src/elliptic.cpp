#include "kprobe/elliptic.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kprobe/error.hpp"

namespace kprobe {

EllipticKE elliptic_KE_complementary(double k, double kc) {
    if (!(k >= 0.0 && k < 1.0) || !(kc > 0.0 && kc <= 1.0))
        throw DomainError(fmt::format("elliptic K requires 0 <= k < 1 (k = {:.17g})", k));
    double a = 1.0, b = kc, c = k;
    double sum = 0.5 * c * c;
    double pow2 = 0.5;
    for (int it = 0; it < 64; ++it) {
        const double an = 0.5 * (a + b);
        const double bn = std::sqrt(a * b);
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
        if (std::abs(c) <= 1e-17 * a) break;
    }
    const double K = 0.5 * std::numbers::pi / a;
    return {K, K * (1.0 - sum)};
}

EllipticKE elliptic_KE(double k) {
    if (!(k >= 0.0 && k < 1.0))
        throw DomainError(fmt::format("elliptic K requires 0 <= k < 1 (k = {:.17g})", k));
    return elliptic_KE_complementary(k, std::sqrt((1.0 - k) * (1.0 + k)));
}

double elliptic_K(double k) { return elliptic_KE(k).K; }

double elliptic_E(double k) {
    if (k == 1.0) return 1.0;
    return elliptic_KE(k).E;
}

}  // namespace kprobe
