#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kprobe/model.hpp"
#include "kprobe/quadrature.hpp"
#include "kprobe/tolerances.hpp"

namespace kprobe {

/// A piece of a cycle integral: the cycle contributes multiplicity * integral
/// over [a, b] of the integrand. The coordinate may be a regularising one
/// (the pendulum uses d = pi - |q|); only the integral matters.
struct CycleSegment {
    double a = 0.0;
    double b = 0.0;
    double multiplicity = 1.0;
    EndpointIntegrand momentum;       ///< p along the cycle, for the loop action
    EndpointIntegrand inverse_speed;  ///< 1 / |dG/dp|, for the period
};

struct CycleQuadrature {
    std::vector<CycleSegment> segments;
    double area_offset = 0.0;  ///< exactly known part of the enclosed area
};

struct LevelRange {
    double lo;
    double hi;
    bool hi_inclusive = false;
    bool contains(double level) const noexcept { return level > lo && (hi_inclusive ? level <= hi : level < hi); }
};

/// One-degree-of-freedom phase-plane family given by a Morse function
/// G(q, p) whose separatrix (when present) is the level G = 0.
class PhaseFamily {
public:
    virtual ~PhaseFamily() = default;

    virtual std::string_view name() const = 0;
    virtual double level_function(double q, double p) const = 0;
    virtual Eigen::Vector2d level_gradient(double q, double p) const = 0;

    /// Levels of regular cycles in the selected family.
    virtual LevelRange regular_levels() const = 0;
    /// Levels whose level sets can be traced (may include the separatrix).
    virtual LevelRange traceable_levels() const = 0;
    /// level = momentum_sign() * F maps the positive momentum coordinate to a level.
    virtual double momentum_sign() const { return 1.0; }
    virtual bool has_separatrix() const { return true; }

    /// Quadrature description of the selected cycle at a level; level 0 gives
    /// the separatrix loop (its area is finite, its period is not).
    virtual CycleQuadrature cycle(double level) const = 0;

    /// Intervals on the q-axis that bracket the points where G(q, 0) = level.
    virtual std::vector<std::pair<double, double>> turning_brackets(double level) const = 0;
    /// Where open branches leave the chart (saddle chart only).
    virtual std::vector<Eigen::Vector2d> boundary_endpoints(double /*level*/) const { return {}; }
};

std::unique_ptr<PhaseFamily> make_phase_family(const HyperbolicFactor& factor);

/// H = (p^2 + q^2)/2; not hyperbolic, used to calibrate the loop machinery.
std::unique_ptr<PhaseFamily> make_harmonic_family();

/// Level of the factor's level function for a positive momentum coordinate F.
double level_from_momentum(const PhaseFamily& family, double F);

// ---------------------------------------------------------------------------

/// Loop action: the integral of p dq over the selected cycle, no 1/(2 pi).
double loop_action_integral(const PhaseFamily& family, double level, const Tolerances& tol = {});
double loop_action_integral(const HyperbolicFactor& factor, double level, const Tolerances& tol = {});

/// Period T(level) = d/dlevel of the loop action.
double period_integral(const PhaseFamily& family, double level, const Tolerances& tol = {});
double period_integral(const HyperbolicFactor& factor, double level, const Tolerances& tol = {});

/// Limit of the loop action at the separatrix. For the saddle chart this is
/// the chart-relative area, which tends to 0.
double separatrix_area(const PhaseFamily& family, const Tolerances& tol = {});
double separatrix_area(const HyperbolicFactor& factor, const Tolerances& tol = {});

struct TurningPointSet {
    std::vector<Eigen::Vector2d> points;
};

/// Points with p = 0 on the level set, located by bracketed bisection and
/// Newton polish on G(q, 0) = level.
TurningPointSet turning_points(const PhaseFamily& family, double level);

}  // namespace kprobe
