#include "kprobe/level_curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "kprobe/error.hpp"
#include "kprobe/roots.hpp"

namespace kprobe {

namespace {

using Vec2 = Eigen::Vector2d;
using Polyline = std::vector<Vec2>;
constexpr double kPi = std::numbers::pi;

struct StopLine {
    int axis;  // 0: q = value, 1: p = value
    double value;
};

struct ArcRequest {
    Vec2 start;
    std::vector<StopLine> stops;
    std::optional<Vec2> snap;  // exact end point when a stop line is hit (saddle points)
};

class Tracer {
public:
    Tracer(const PhaseFamily& family, double level, const TraceOptions& opts)
        : fam_(family), level_(level), opts_(opts) {}

    // Flow direction (dG/dp, -dG/dq), normalized.
    Vec2 tangent(const Vec2& x) const {
        const Vec2 g = fam_.level_gradient(x(0), x(1));
        const double n = g.norm();
        if (!(n > 0.0)) throw NumericalError(fmt::format("{}: tracing hit a critical point", fam_.name()));
        return Vec2(g(1), -g(0)) / n;
    }

    // Newton projection onto the level set along the gradient.
    std::optional<Vec2> correct(Vec2 y) const {
        for (int it = 0; it < 30; ++it) {
            const double r = fam_.level_function(y(0), y(1)) - level_;
            if (std::abs(r) <= 0.05 * opts_.trace_tol) return y;
            const Vec2 g = fam_.level_gradient(y(0), y(1));
            const double g2 = g.squaredNorm();
            if (!(g2 > 0.0)) return std::nullopt;
            y -= (r / g2) * g;
        }
        const double r = fam_.level_function(y(0), y(1)) - level_;
        return std::abs(r) <= 0.5 * opts_.trace_tol ? std::optional<Vec2>(y) : std::nullopt;
    }

    Vec2 end_on_line(const StopLine& line, const Vec2& x, const Vec2& y) const {
        const int other = 1 - line.axis;
        auto point = [&](double s) {
            Vec2 v;
            v(line.axis) = line.value;
            v(other) = s;
            return v;
        };
        auto g = [&](double s) {
            const Vec2 v = point(s);
            return fam_.level_function(v(0), v(1)) - level_;
        };
        auto dg = [&](double s) {
            const Vec2 v = point(s);
            return fam_.level_gradient(v(0), v(1))(other);
        };
        double lo = std::min(x(other), y(other)), hi = std::max(x(other), y(other));
        const double pad = std::max(hi - lo, opts_.max_step);
        for (int widen = 0; widen < 8 && std::signbit(g(lo)) == std::signbit(g(hi)); ++widen) {
            lo -= pad * (1 << widen);
            hi += pad * (1 << widen);
        }
        if (std::signbit(g(lo)) == std::signbit(g(hi))) {
            // tangential crossing: interpolate and project
            const double w = (line.value - x(line.axis)) / (y(line.axis) - x(line.axis));
            Vec2 v = x + w * (y - x);
            v(line.axis) = line.value;
            return v;
        }
        return point(bracketed_root(g, dg, lo, hi, {.abs_tol = 1e-15}));
    }

    Polyline arc(const ArcRequest& req) const {
        Polyline pts{req.start};
        Vec2 x = req.start;
        Vec2 t_prev = tangent(x);
        double h = 0.25 * opts_.max_step;
        while (pts.size() < opts_.max_vertices) {
            Vec2 t = tangent(x);
            if (t.dot(t_prev) < 0.0) t = -t;
            std::optional<Vec2> y;
            Vec2 t_new;
            for (;;) {
                if (h < opts_.min_step)
                    throw NumericalError(fmt::format("{}: trace step underflow at ({:.17g}, {:.17g})", fam_.name(),
                                                     x(0), x(1)));
                y = correct(x + h * t);
                if (y && (*y - x).norm() <= opts_.max_step && (*y - x).norm() > 0.0) {
                    const Vec2 g = fam_.level_gradient((*y)(0), (*y)(1));
                    if (g.norm() > 0.0) {
                        t_new = tangent(*y);
                        if (t_new.dot(t) < 0.0) t_new = -t_new;
                        const double turn = std::acos(std::clamp(t_new.dot(t), -1.0, 1.0));
                        if (turn <= opts_.max_turn && (*y - x).dot(t) > 0.0) break;
                    } else {
                        t_new = t;
                        break;
                    }
                }
                h *= 0.5;
            }
            for (const auto& line : req.stops) {
                const double sx = x(line.axis) - line.value, sy = (*y)(line.axis) - line.value;
                if (sx != 0.0 && (sy == 0.0 || std::signbit(sx) != std::signbit(sy))) {
                    pts.push_back(req.snap ? *req.snap : end_on_line(line, x, *y));
                    return pts;
                }
            }
            pts.push_back(*y);
            x = *y;
            t_prev = t_new;
            if (std::acos(std::clamp(t_new.dot(t), -1.0, 1.0)) < 0.25 * opts_.max_turn)
                h = std::min(1.5 * h, opts_.max_step);
        }
        throw NumericalError(fmt::format("{}: trace exceeded {} vertices", fam_.name(), opts_.max_vertices));
    }

private:
    const PhaseFamily& fam_;
    double level_;
    TraceOptions opts_;
};

Polyline reversed(Polyline a) {
    std::reverse(a.begin(), a.end());
    return a;
}

Polyline reflect(Polyline a, double sq, double sp) {
    for (auto& v : a) v = Vec2(sq * v(0), sp * v(1));
    return a;
}

// Arc with both ends on p = 0 completed by its mirror image in p.
CurveBranch close_by_p_reflection(const Polyline& arc) {
    CurveBranch b{arc, true};
    const Polyline back = reversed(reflect(arc, 1.0, -1.0));
    b.points.insert(b.points.end(), back.begin() + 1, back.end());
    return b;
}

// Image under q -> -q, re-oriented along the flow.
CurveBranch mirror_q(const CurveBranch& b) { return {reversed(reflect(b.points, -1.0, 1.0)), b.closed}; }

Polyline straight(const Vec2& a, const Vec2& b, double max_step) {
    const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / max_step)));
    Polyline p;
    for (int i = 0; i <= m; ++i) p.push_back(a + (b - a) * (static_cast<double>(i) / m));
    return p;
}

std::vector<double> sorted_turning_q(const PhaseFamily& fam, double level) {
    std::vector<double> q;
    for (const auto& v : turning_points(fam, level).points) q.push_back(v(0));
    std::sort(q.begin(), q.end());
    return q;
}

std::vector<CurveBranch> trace_saddle(const PhaseFamily& fam, double f, const Tracer& tr, const TraceOptions& o) {
    const auto ends = fam.boundary_endpoints(f);
    double eps = 0.0;
    for (const auto& e : ends) eps = std::max(eps, e.cwiseAbs().maxCoeff());
    if (f == 0.0)
        return {{straight({-eps, 0.0}, {eps, 0.0}, o.max_step), false},
                {straight({0.0, -eps}, {0.0, eps}, o.max_step), false}};
    if (std::abs(f) == eps * eps)
        return {{{Vec2(-eps, -std::copysign(eps, f))}, false}, {{Vec2(eps, std::copysign(eps, f))}, false}};
    const Vec2 start(std::abs(f) / eps, std::copysign(eps, f));
    const Polyline right = tr.arc({start, {{0, eps}}, std::nullopt});
    return {{right, false}, {reflect(right, -1.0, -1.0), false}};
}

std::vector<CurveBranch> trace_duffing(const PhaseFamily& fam, double E, const Tracer& tr) {
    if (E == -0.25) throw DomainError("duffing: level -1/4 degenerates to the well bottoms (+-1, 0)");
    const auto q = sorted_turning_q(fam, E);
    if (E < 0.0) {
        const CurveBranch right = close_by_p_reflection(tr.arc({{q[2], 0.0}, {{1, 0.0}}, std::nullopt}));
        return {mirror_q(right), right};
    }
    if (E == 0.0) {
        const CurveBranch right = close_by_p_reflection(tr.arc({{q.back(), 0.0}, {{0, 0.0}}, Vec2(0.0, 0.0)}));
        return {mirror_q(right), right};
    }
    return {close_by_p_reflection(tr.arc({{q.front(), 0.0}, {{1, 0.0}}, std::nullopt}))};
}

std::vector<CurveBranch> trace_pendulum(const PhaseFamily& fam, double level, const Tracer& tr) {
    if (level == -2.0) throw DomainError("pendulum: level -2 degenerates to the equilibrium (0, 0)");
    if (level < 0.0) {
        const auto q = sorted_turning_q(fam, level);
        return {close_by_p_reflection(tr.arc({{q.front(), 0.0}, {{1, 0.0}}, std::nullopt}))};
    }
    if (level == 0.0) {
        const Polyline right = tr.arc({{0.0, 2.0}, {{0, kPi}}, Vec2(kPi, 0.0)});
        Polyline upper = reversed(reflect(right, -1.0, 1.0));
        upper.insert(upper.end(), right.begin() + 1, right.end());
        return {close_by_p_reflection(upper)};
    }
    const Polyline top = tr.arc({{-kPi, std::sqrt(2.0 * level)}, {{0, kPi}}, std::nullopt});
    return {{reversed(reflect(top, 1.0, -1.0)), false}, {top, false}};
}

std::vector<CurveBranch> trace_harmonic(const PhaseFamily& fam, double E, const Tracer& tr) {
    if (E == 0.0) throw DomainError("harmonic: level 0 degenerates to the origin");
    const auto q = sorted_turning_q(fam, E);
    return {close_by_p_reflection(tr.arc({{q.front(), 0.0}, {{1, 0.0}}, std::nullopt}))};
}

}  // namespace

LevelCurve trace_level_curve(const PhaseFamily& family, double level, const TraceOptions& opts) {
    const LevelRange r = family.traceable_levels();
    const bool at_lo = level == r.lo;
    if (!std::isfinite(level) || (!at_lo && !r.contains(level)) ||
        (at_lo && family.name() == std::string_view("saddle-chart")))
        throw DomainError(fmt::format("{}: level {:.17g} is outside the traceable range", family.name(), level));

    const Tracer tracer(family, level, opts);
    LevelCurve curve;
    curve.f_value = level;
    const std::string_view name = family.name();
    if (name == "saddle-chart")
        curve.branches = trace_saddle(family, level, tracer, opts);
    else if (name == "duffing-double-well")
        curve.branches = trace_duffing(family, level, tracer);
    else if (name == "pendulum")
        curve.branches = trace_pendulum(family, level, tracer);
    else if (name == "harmonic")
        curve.branches = trace_harmonic(family, level, tracer);
    else
        throw ConfigError(fmt::format("no tracing plan for family {}", name));

    auto leftmost = [](const CurveBranch& b) {
        return *std::min_element(b.points.begin(), b.points.end(), [](const Vec2& u, const Vec2& v) {
            return u(0) < v(0) || (u(0) == v(0) && u(1) < v(1));
        });
    };
    std::stable_sort(curve.branches.begin(), curve.branches.end(), [&](const CurveBranch& a, const CurveBranch& b) {
        const Vec2 la = leftmost(a), lb = leftmost(b);
        return la(0) < lb(0) || (la(0) == lb(0) && la(1) < lb(1));
    });
    return curve;
}

LevelCurve trace_level_curve(const HyperbolicFactor& factor, double level, const TraceOptions& opts) {
    return trace_level_curve(*make_phase_family(factor), level, opts);
}

void write_level_curve_csv(const LevelCurve& curve, std::ostream& out) {
    out << "branch,q,p\n";
    for (std::size_t b = 0; b < curve.branches.size(); ++b)
        for (const auto& v : curve.branches[b].points) out << fmt::format("{},{:.17g},{:.17g}\n", b, v(0), v(1));
}

}  // namespace kprobe
