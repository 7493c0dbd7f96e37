#pragma once

namespace kprobe {

struct EllipticKE {
    double K;
    double E;
};

/// Complete elliptic integrals of the first and second kind with modulus k,
/// by the arithmetic-geometric mean. Requires 0 <= k < 1.
EllipticKE elliptic_KE(double k);

/// Same, taking the complementary modulus k' = sqrt(1 - k^2) explicitly so
/// moduli close to 1 keep full relative accuracy.
EllipticKE elliptic_KE_complementary(double k, double kc);

double elliptic_K(double k);
/// Defined on 0 <= k <= 1, with E(1) = 1.
double elliptic_E(double k);

}  // namespace kprobe
