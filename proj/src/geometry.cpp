#include "kprobe/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "kprobe/error.hpp"
#include "kprobe/roots.hpp"

namespace kprobe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_sqrt(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

// G = pq on [-eps, eps]^2. The selected cycle is the first-quadrant region
// {0 <= q, p <= eps, pq <= f}, whose area is f + integral_{f/eps}^{eps} f/q dq.
class SaddleChart final : public PhaseFamily {
public:
    explicit SaddleChart(double eps) : eps_(eps) {}

    std::string_view name() const override { return "saddle-chart"; }
    double level_function(double q, double p) const override { return p * q; }
    Eigen::Vector2d level_gradient(double q, double p) const override { return {p, q}; }
    LevelRange regular_levels() const override { return {0.0, eps_ * eps_, true}; }
    LevelRange traceable_levels() const override { return {-eps_ * eps_, eps_ * eps_, true}; }

    CycleQuadrature cycle(double f) const override {
        CycleQuadrature c;
        c.area_offset = f;
        CycleSegment s;
        s.a = f / eps_;
        s.b = eps_;
        s.momentum = [f](double x, double, double) { return f / x; };
        s.inverse_speed = [](double x, double, double) { return 1.0 / x; };
        c.segments.push_back(std::move(s));
        return c;
    }

    std::vector<std::pair<double, double>> turning_brackets(double) const override { return {}; }

    std::vector<Eigen::Vector2d> boundary_endpoints(double f) const override {
        if (f == 0.0) return {{-eps_, 0.0}, {eps_, 0.0}, {0.0, -eps_}, {0.0, eps_}};
        return {{-eps_, -f / eps_}, {-f / eps_, -eps_}, {f / eps_, eps_}, {eps_, f / eps_}};
    }

    double epsilon() const noexcept { return eps_; }

private:
    double eps_;
};

// G = p^2/2 - q^2/2 + q^4/4, separatrix G = 0 is the figure-eight through the
// origin; wells bottom out at G = -1/4.
class Duffing final : public PhaseFamily {
public:
    explicit Duffing(Lobe lobe) : lobe_(lobe) {}

    std::string_view name() const override { return "duffing-double-well"; }
    double level_function(double q, double p) const override { return 0.5 * p * p - 0.5 * q * q + 0.25 * q * q * q * q; }
    Eigen::Vector2d level_gradient(double q, double p) const override { return {q * q * q - q, p}; }
    LevelRange regular_levels() const override {
        return lobe_ == Lobe::Inner ? LevelRange{-0.25, 0.0} : LevelRange{0.0, kInf};
    }
    LevelRange traceable_levels() const override { return {-0.25, kInf}; }
    double momentum_sign() const override { return lobe_ == Lobe::Inner ? -1.0 : 1.0; }

    CycleQuadrature cycle(double E) const override {
        const double s = std::sqrt(1.0 + 4.0 * E);
        const double q2 = std::sqrt(1.0 + s);
        CycleQuadrature c;
        CycleSegment seg;
        if (lobe_ == Lobe::Inner) {
            // p^2 = (q - q1)(q + q1)(q2 - q)(q2 + q) / 2 over one well
            const double q1 = std::sqrt(-4.0 * E / (1.0 + s));
            seg.a = q1;
            seg.b = q2;
            seg.multiplicity = 2.0;
            seg.momentum = [q1, q2](double x, double da, double db) { return safe_sqrt(0.5 * da * (x + q1) * db * (q2 + x)); };
            seg.inverse_speed = [q1, q2](double x, double da, double db) {
                return 1.0 / std::sqrt(0.5 * da * (x + q1) * db * (q2 + x));
            };
        } else {
            // p^2 = (q2 - q)(q2 + q)(q^2 + a) / 2, a = sqrt(1 + 4E) - 1
            const double a = 4.0 * E / (1.0 + s);
            seg.a = 0.0;
            seg.b = q2;
            seg.multiplicity = 4.0;
            seg.momentum = [q2, a](double x, double, double db) { return safe_sqrt(0.5 * db * (q2 + x) * (x * x + a)); };
            seg.inverse_speed = [q2, a](double x, double, double db) {
                return 1.0 / std::sqrt(0.5 * db * (q2 + x) * (x * x + a));
            };
        }
        c.segments.push_back(std::move(seg));
        return c;
    }

    std::vector<std::pair<double, double>> turning_brackets(double E) const override {
        double hi = 2.0;
        while (0.25 * hi * hi * hi * hi - 0.5 * hi * hi <= E) hi *= 2.0;
        if (E < 0.0) return {{-hi, -1.0}, {-1.0, 0.0}, {0.0, 1.0}, {1.0, hi}};
        return {{-hi, -1.0}, {1.0, hi}};
    }

private:
    Lobe lobe_;
};

// G = p^2/2 - cos q - 1 (the shift puts the separatrix at G = 0). Inner is the
// libration family, outer the rotations. Integrals run over d = pi - |q|, in
// which both the turning point and the saddle sit at exactly representable
// distances.
class Pendulum final : public PhaseFamily {
public:
    explicit Pendulum(Lobe lobe) : lobe_(lobe) {}

    std::string_view name() const override { return "pendulum"; }
    double level_function(double q, double p) const override { return 0.5 * p * p - std::cos(q) - 1.0; }
    Eigen::Vector2d level_gradient(double q, double p) const override { return {std::sin(q), p}; }
    LevelRange regular_levels() const override {
        return lobe_ == Lobe::Inner ? LevelRange{-2.0, 0.0} : LevelRange{0.0, kInf};
    }
    LevelRange traceable_levels() const override { return {-2.0, kInf}; }
    double momentum_sign() const override { return lobe_ == Lobe::Inner ? -1.0 : 1.0; }

    CycleQuadrature cycle(double level) const override {
        CycleQuadrature c;
        CycleSegment seg;
        if (lobe_ == Lobe::Inner) {
            // p^2 = 4 sin((d - d0)/2) sin((d + d0)/2), sin(d0/2) = sqrt(F/2)
            const double F = -level;
            const double d0 = 2.0 * std::asin(std::sqrt(0.5 * F));
            seg.a = d0;
            seg.b = kPi;
            seg.multiplicity = 4.0;
            seg.momentum = [d0](double x, double da, double) {
                return safe_sqrt(4.0 * std::sin(0.5 * da) * std::sin(0.5 * (x + d0)));
            };
            seg.inverse_speed = [d0](double x, double da, double) {
                return 1.0 / std::sqrt(4.0 * std::sin(0.5 * da) * std::sin(0.5 * (x + d0)));
            };
        } else {
            // p^2 = 2F + 4 sin^2(d/2)
            const double F = level;
            seg.a = 0.0;
            seg.b = kPi;
            seg.multiplicity = 2.0;
            seg.momentum = [F](double, double da, double) {
                const double s = std::sin(0.5 * da);
                return std::sqrt(2.0 * F + 4.0 * s * s);
            };
            seg.inverse_speed = [F](double, double da, double) {
                const double s = std::sin(0.5 * da);
                return 1.0 / std::sqrt(2.0 * F + 4.0 * s * s);
            };
        }
        c.segments.push_back(std::move(seg));
        return c;
    }

    std::vector<std::pair<double, double>> turning_brackets(double level) const override {
        if (level >= 0.0) return {};
        return {{-kPi, 0.0}, {0.0, kPi}};
    }

private:
    Lobe lobe_;
};

class Harmonic final : public PhaseFamily {
public:
    std::string_view name() const override { return "harmonic"; }
    double level_function(double q, double p) const override { return 0.5 * (p * p + q * q); }
    Eigen::Vector2d level_gradient(double q, double p) const override { return {q, p}; }
    LevelRange regular_levels() const override { return {0.0, kInf}; }
    LevelRange traceable_levels() const override { return {0.0, kInf}; }
    bool has_separatrix() const override { return false; }

    CycleQuadrature cycle(double E) const override {
        const double r = std::sqrt(2.0 * E);
        CycleQuadrature c;
        CycleSegment seg;
        seg.a = -r;
        seg.b = r;
        seg.multiplicity = 2.0;
        seg.momentum = [](double, double da, double db) { return std::sqrt(da * db); };
        seg.inverse_speed = [](double, double da, double db) { return 1.0 / std::sqrt(da * db); };
        c.segments.push_back(std::move(seg));
        return c;
    }

    std::vector<std::pair<double, double>> turning_brackets(double E) const override {
        const double r = std::sqrt(2.0 * E);
        return {{-2.0 * r, 0.0}, {0.0, 2.0 * r}};
    }
};

void require_regular(const PhaseFamily& family, double level) {
    const LevelRange r = family.regular_levels();
    if (!std::isfinite(level) || !r.contains(level)) {
        if (family.has_separatrix() && level == 0.0)
            throw DomainError(fmt::format("{}: level 0 is the separatrix, not a regular cycle", family.name()));
        throw DomainError(fmt::format("{}: level {:.17g} is outside the regular range ({:.17g}, {:.17g}{}",
                                      family.name(), level, r.lo, r.hi, r.hi_inclusive ? "]" : ")"));
    }
}

TanhSinhOptions loop_options(const Tolerances& tol) {
    return {.abs_tol = 0.0, .rel_tol = tol.action_tol, .max_levels = 12, .min_levels = 3};
}

double integrate_cycle(const CycleQuadrature& c, bool period, const Tolerances& tol) {
    double total = period ? 0.0 : c.area_offset;
    for (const auto& s : c.segments)
        total += s.multiplicity * tanh_sinh(period ? s.inverse_speed : s.momentum, s.a, s.b, loop_options(tol)).value;
    return total;
}

}  // namespace

std::unique_ptr<PhaseFamily> make_phase_family(const HyperbolicFactor& factor) {
    switch (factor.kind) {
        case FactorKind::SaddleChart: return std::make_unique<SaddleChart>(factor.epsilon);
        case FactorKind::DuffingDoubleWell: return std::make_unique<Duffing>(factor.lobe);
        case FactorKind::Pendulum: return std::make_unique<Pendulum>(factor.lobe);
        case FactorKind::SyntheticProfile: break;
    }
    throw ConfigError("synthetic-profile factors have no phase-plane geometry");
}

std::unique_ptr<PhaseFamily> make_harmonic_family() { return std::make_unique<Harmonic>(); }

double level_from_momentum(const PhaseFamily& family, double F) { return family.momentum_sign() * F; }

double loop_action_integral(const PhaseFamily& family, double level, const Tolerances& tol) {
    require_regular(family, level);
    return integrate_cycle(family.cycle(level), false, tol);
}

double loop_action_integral(const HyperbolicFactor& factor, double level, const Tolerances& tol) {
    return loop_action_integral(*make_phase_family(factor), level, tol);
}

double period_integral(const PhaseFamily& family, double level, const Tolerances& tol) {
    require_regular(family, level);
    return integrate_cycle(family.cycle(level), true, tol);
}

double period_integral(const HyperbolicFactor& factor, double level, const Tolerances& tol) {
    return period_integral(*make_phase_family(factor), level, tol);
}

double separatrix_area(const PhaseFamily& family, const Tolerances& tol) {
    if (!family.has_separatrix()) throw DomainError(fmt::format("{} has no separatrix", family.name()));
    return integrate_cycle(family.cycle(0.0), false, tol);
}

double separatrix_area(const HyperbolicFactor& factor, const Tolerances& tol) {
    return separatrix_area(*make_phase_family(factor), tol);
}

TurningPointSet turning_points(const PhaseFamily& family, double level) {
    const LevelRange r = family.traceable_levels();
    if (!(level > r.lo && (r.hi_inclusive ? level <= r.hi : level < r.hi)))
        throw DomainError(fmt::format("{}: level {:.17g} has no regular level set", family.name(), level));
    TurningPointSet set;
    auto g = [&](double q) { return family.level_function(q, 0.0) - level; };
    auto dg = [&](double q) { return family.level_gradient(q, 0.0)(0); };
    for (const auto& [lo, hi] : family.turning_brackets(level))
        set.points.emplace_back(bracketed_root(g, dg, lo, hi, {.abs_tol = 1e-13}), 0.0);
    for (const auto& e : family.boundary_endpoints(level)) set.points.push_back(e);
    return set;
}

}  // namespace kprobe
