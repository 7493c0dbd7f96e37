#include "kprobe/action_map.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kprobe/error.hpp"
#include "kprobe/geometry.hpp"

namespace kprobe {

using nlohmann::json;

std::string_view to_string(ActionSource s) { return s == ActionSource::Geometric ? "geometric" : "synthetic"; }

namespace {

ActionSource source_of(const SystemModel& model) {
    return model.all_synthetic() ? ActionSource::Synthetic : ActionSource::Geometric;
}

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

void require_factor(const SystemModel& model, std::size_t i) {
    if (i >= model.k()) throw ConfigError(fmt::format("factor index {} out of range (k = {})", i + 1, model.k()));
}

}  // namespace

double singular_action(const SystemModel& model, std::size_t i, const MomentumPoint& F, const Tolerances& tol) {
    require_factor(model, i);
    const std::size_t s = model.singular_coordinate(i);
    const HyperbolicFactor& f = model.factor(i);
    if (!f.is_geometric()) return f.psi(F.span()) * xlogx(F[s]) + f.phi(F.span());
    if (F[s] == 0.0) return separatrix_area(f, tol);
    const auto fam = make_phase_family(f);
    return loop_action_integral(*fam, level_from_momentum(*fam, F[s]), tol);
}

ActionValue action_at(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    switch (classify_point(model, F)) {
        case PointClass::Outside:
            throw DomainError("point lies outside the corner domain (singular coordinates must be >= 0)");
        case PointClass::Boundary:
            throw DomainError("point lies on the boundary of the corner; use continuity_extension");
        case PointClass::Regular:
            break;
    }
    ActionValue out{F.values, source_of(model)};
    for (std::size_t i = 0; i < model.k(); ++i) out.values[model.singular_coordinate(i)] = singular_action(model, i, F, tol);
    return out;
}

ActionValue continuity_extension(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    const PointClass c = classify_point(model, F);
    if (c == PointClass::Outside) throw DomainError("point lies outside the corner domain");
    if (c == PointClass::Regular)
        throw DomainError("continuity_extension needs a boundary point (some singular coordinate equal to 0)");
    ActionValue out{F.values, source_of(model)};
    for (std::size_t i = 0; i < model.k(); ++i) out.values[model.singular_coordinate(i)] = singular_action(model, i, F, tol);
    return out;
}

Eigen::VectorXd singular_action_gradient(const SystemModel& model, std::size_t i, const MomentumPoint& F,
                                         const Tolerances& tol) {
    require_factor(model, i);
    const std::size_t s = model.singular_coordinate(i);
    if (!(F[s] > 0.0)) throw DomainError("action gradient needs a positive singular coordinate");
    const HyperbolicFactor& f = model.factor(i);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n()));
    if (f.is_geometric()) {
        const auto fam = make_phase_family(f);
        g(s) = fam->momentum_sign() * period_integral(*fam, level_from_momentum(*fam, F[s]), tol);
        return g;
    }
    const double L = xlogx(F[s]);
    const Eigen::VectorXd dpsi = f.psi.gradient(F.span());
    g = dpsi * L + f.phi.gradient(F.span());
    g(s) += f.psi(F.span()) * (std::log(F[s]) + 1.0);
    return g;
}

Eigen::MatrixXd synthetic_action_hessian(const SystemModel& model, std::size_t i, const MomentumPoint& F) {
    require_factor(model, i);
    const HyperbolicFactor& f = model.factor(i);
    if (f.is_geometric()) throw ConfigError("closed-form action Hessian exists for synthetic factors only");
    const std::size_t s = model.singular_coordinate(i);
    if (!(F[s] > 0.0)) throw DomainError("action Hessian needs a positive singular coordinate");
    const double lg = std::log(F[s]);
    const Eigen::VectorXd dpsi = f.psi.gradient(F.span());
    Eigen::MatrixXd h = f.psi.hessian(F.span()) * xlogx(F[s]) + f.phi.hessian(F.span());
    h.row(s) += dpsi.transpose() * (lg + 1.0);
    h.col(s) += dpsi * (lg + 1.0);
    h(s, s) += f.psi(F.span()) / F[s];
    return h;
}

// ---------------------------------------------------------------------------

double FitGrid::decades() const { return std::log10(sing_hi / sing_lo); }

json FitGrid::to_json() const {
    return {{"singular_range", {sing_lo, sing_hi}},
            {"points_per_decade", per_decade},
            {"center", center},
            {"half_width", half_width},
            {"counts", counts},
            {"degree", degree}};
}

FitGrid default_fit_grid(const SystemModel& model, std::size_t i) {
    require_factor(model, i);
    FitGrid g;
    const HyperbolicFactor& f = model.factor(i);
    if (f.kind == FactorKind::DuffingDoubleWell || f.kind == FactorKind::Pendulum) {
        // the F^2 ln F remainder is larger here; a lower window keeps the
        // degree-2 residual under 1e-6
        g.sing_lo = 1e-7;
        g.sing_hi = 1e-3;
    }
    const std::size_t n = model.n();
    g.center.assign(n, 0.0);
    g.half_width.assign(n, 0.0);
    g.counts.assign(n, 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (model.is_singular_coordinate(j)) {
            g.center[j] = 1e-2;
        } else if (!f.is_geometric()) {
            g.half_width[j] = 0.05;
            g.counts[j] = 3;
        }
    }
    g.center[model.singular_coordinate(i)] = 0.0;
    return g;
}

namespace {

void check_grid_shape(const SystemModel& model, std::size_t i, const FitGrid& grid) {
    const std::size_t n = model.n();
    if (grid.center.size() != n || grid.half_width.size() != n || grid.counts.size() != n)
        throw ConfigError(fmt::format("fit grid center, half_width and counts need {} entries", n));
    if (!(grid.sing_lo > 0.0) || !(grid.sing_hi > grid.sing_lo))
        throw ConfigError("fit grid singular range must satisfy 0 < lo < hi");
    if (grid.per_decade < 1 || grid.degree < 0) throw ConfigError("fit grid per_decade >= 1 and degree >= 0 required");
    const std::size_t s = model.singular_coordinate(i);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == s) continue;
        if (grid.counts[j] < 1 || grid.half_width[j] < 0.0)
            throw ConfigError("fit grid counts must be >= 1 and half widths >= 0");
        if (model.is_singular_coordinate(j) && !(grid.center[j] - grid.half_width[j] > 0.0))
            throw ConfigError(fmt::format("fit grid keeps singular coordinate {} positive", j + 1));
    }
}

std::vector<std::size_t> active_axes(const SystemModel& model, std::size_t i, const FitGrid& grid) {
    const std::size_t s = model.singular_coordinate(i);
    std::vector<std::size_t> v;
    for (std::size_t j = 0; j < model.n(); ++j)
        if (j == s || (grid.counts[j] > 1 && grid.half_width[j] > 0.0)) v.push_back(j);
    return v;
}

// Exponent vectors over n variables, nonzero only on the active axes, of total
// degree <= d, in graded lexicographic order.
std::vector<Exponents> monomials(std::size_t n, const std::vector<std::size_t>& axes, int d) {
    std::vector<Exponents> out;
    for (int total = 0; total <= d; ++total) {
        Exponents e(n, 0);
        auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
            if (pos + 1 == axes.size()) {
                e[axes[pos]] = left;
                out.push_back(e);
                e[axes[pos]] = 0;
                return;
            }
            for (int p = left; p >= 0; --p) {
                e[axes[pos]] = p;
                self(self, pos + 1, left - p);
            }
            e[axes[pos]] = 0;
        };
        rec(rec, 0, total);
    }
    return out;
}

double monomial_value(const Exponents& e, const std::vector<double>& x) {
    double v = 1.0;
    for (std::size_t j = 0; j < e.size(); ++j)
        for (int p = 0; p < e[j]; ++p) v *= x[j];
    return v;
}

// Displacement coordinates used by the fitted polynomials.
std::vector<double> displacement(const FitGrid& grid, std::size_t s, const MomentumPoint& F) {
    std::vector<double> x(F.size());
    for (std::size_t j = 0; j < F.size(); ++j) x[j] = j == s ? F[j] : F[j] - grid.center[j];
    return x;
}

}  // namespace

double SingularActionFit::evaluate(const MomentumPoint& F) const {
    const std::vector<double> x = displacement(grid, coordinate, F);
    return psi_coeffs(x) * xlogx(F[coordinate]) + phi_coeffs(x);
}

json SingularActionFit::to_json() const {
    return {{"factor_index", factor_index + 1},
            {"psi0", psi0},
            {"psi0_uncertainty", psi0_uncertainty},
            {"psi_coeffs", polynomial_to_json(psi_coeffs)},
            {"phi_coeffs", polynomial_to_json(phi_coeffs)},
            {"max_residual", max_residual},
            {"scale", scale},
            {"condition_number", condition_number},
            {"num_samples", num_samples},
            {"grid", grid.to_json()}};
}

std::vector<MomentumPoint> fit_grid_points(const SystemModel& model, std::size_t i, const FitGrid& grid) {
    require_factor(model, i);
    check_grid_shape(model, i, grid);
    const std::size_t s = model.singular_coordinate(i);
    const std::size_t n = model.n();
    const int m = std::max(1, static_cast<int>(std::lround(grid.decades() * grid.per_decade)));
    std::vector<double> sing(static_cast<std::size_t>(m) + 1);
    const double a = std::log(grid.sing_lo), b = std::log(grid.sing_hi);
    for (int q = 0; q <= m; ++q) sing[q] = q == 0 ? grid.sing_lo : q == m ? grid.sing_hi : std::exp(a + (b - a) * q / m);

    std::vector<std::vector<double>> axis(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == s) {
            axis[j] = sing;
        } else if (grid.counts[j] == 1 || grid.half_width[j] == 0.0) {
            axis[j] = {grid.center[j]};
        } else {
            const int c = grid.counts[j];
            for (int q = 0; q < c; ++q)
                axis[j].push_back(grid.center[j] + grid.half_width[j] * (2.0 * q / (c - 1) - 1.0));
        }
    }
    // tensor product, fitted coordinate fastest, then increasing axis index
    std::vector<MomentumPoint> pts;
    std::vector<std::size_t> idx(n, 0);
    std::vector<std::size_t> order{s};
    for (std::size_t j = 0; j < n; ++j)
        if (j != s) order.push_back(j);
    for (;;) {
        MomentumPoint F{std::vector<double>(n)};
        for (std::size_t j = 0; j < n; ++j) F[j] = axis[j][idx[j]];
        pts.push_back(std::move(F));
        std::size_t d = 0;
        for (; d < n; ++d) {
            const std::size_t j = order[d];
            if (++idx[j] < axis[j].size()) break;
            idx[j] = 0;
        }
        if (d == n) break;
    }
    return pts;
}

SingularActionFit fit_action_samples(const SystemModel& model, std::size_t i, const FitGrid& grid,
                                     const std::vector<MomentumPoint>& points, const std::vector<double>& values) {
    require_factor(model, i);
    check_grid_shape(model, i, grid);
    if (points.size() != values.size() || points.empty())
        throw ConfigError("fit needs one value per sample point and at least one sample");
    const std::size_t s = model.singular_coordinate(i);
    const std::size_t n = model.n();
    const auto mons = monomials(n, active_axes(model, i, grid), grid.degree);
    const auto rows = static_cast<Eigen::Index>(points.size());
    const auto nm = static_cast<Eigen::Index>(mons.size());
    if (rows < 2 * nm) throw NumericalError("fit grid has fewer samples than twice the basis size");

    Eigen::MatrixXd A(rows, 2 * nm);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const MomentumPoint& F = points[r];
        const std::vector<double> x = displacement(grid, s, F);
        const double L = xlogx(F[s]);
        for (Eigen::Index c = 0; c < nm; ++c) {
            const double mv = monomial_value(mons[c], x);
            A(r, c) = L * mv;
            A(r, nm + c) = mv;
        }
        y(r) = values[r];
    }
    const Eigen::VectorXd norms = A.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
        if (!(norms(c) > 0.0)) throw NumericalError("fit basis has an identically zero column on this grid");
        A.col(c) /= norms(c);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double ratio = sv(sv.size() - 1) / sv(0);
    if (!(ratio > 1e-12))
        throw NumericalError(fmt::format("fit basis is rank deficient on the grid (sigma ratio {:.3g})", ratio));
    Eigen::VectorXd coef = svd.solve(y);
    const Eigen::VectorXd resid = A * coef - y;
    coef = coef.cwiseQuotient(norms);

    SingularActionFit fit;
    fit.factor_index = i;
    fit.coordinate = s;
    fit.psi_coeffs = Polynomial(n);
    fit.phi_coeffs = Polynomial(n);
    for (Eigen::Index c = 0; c < nm; ++c) {
        fit.psi_coeffs.add_term(mons[c], coef(c));
        fit.phi_coeffs.add_term(mons[c], coef(nm + c));
    }
    fit.psi0 = coef(0);
    fit.max_residual = resid.cwiseAbs().maxCoeff();
    fit.scale = y.cwiseAbs().maxCoeff();
    fit.condition_number = 1.0 / ratio;
    fit.num_samples = points.size();
    fit.grid = grid;
    return fit;
}

SingularActionFit fit_singular_action(const SystemModel& model, std::size_t i, const FitGrid& grid,
                                      const Tolerances& tol) {
    if (grid.decades() < 4.0 - 1e-9)
        throw ConfigError(fmt::format("fit grid spans {:.3g} decades; at least 4 are required", grid.decades()));
    if (grid.per_decade < 20) throw ConfigError("fit grid needs at least 20 points per decade");
    const auto pts = fit_grid_points(model, i, grid);
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const auto& F : pts) vals.push_back(singular_action(model, i, F, tol));
    SingularActionFit fit = fit_action_samples(model, i, grid, pts, vals);
    const std::size_t s = model.singular_coordinate(i);
    for (const bool drop_low : {true, false}) {
        const double cut = drop_low ? grid.sing_lo * 10.0 : grid.sing_hi / 10.0;
        std::vector<MomentumPoint> sub_pts;
        std::vector<double> sub_vals;
        for (std::size_t m = 0; m < pts.size(); ++m) {
            if (drop_low ? pts[m][s] < cut * (1 - 1e-12) : pts[m][s] > cut * (1 + 1e-12)) continue;
            sub_pts.push_back(pts[m]);
            sub_vals.push_back(vals[m]);
        }
        const double p = fit_action_samples(model, i, grid, sub_pts, sub_vals).psi0;
        fit.psi0_uncertainty = std::max(fit.psi0_uncertainty, std::abs(p - fit.psi0));
    }
    if (fit.max_residual > tol.fit_tol * fit.scale)
        throw NumericalError(fmt::format("fit residual {:.3g} exceeds fit_tol * scale = {:.3g}", fit.max_residual,
                                         tol.fit_tol * fit.scale));
    return fit;
}

double psi0_from_period(const HyperbolicFactor& factor, double F_a, double F_b, const Tolerances& tol) {
    if (!factor.is_geometric()) throw ConfigError("period oracle applies to geometric factors only");
    const auto fam = make_phase_family(factor);
    auto slope = [&](double F) { return fam->momentum_sign() * period_integral(*fam, level_from_momentum(*fam, F), tol); };
    return (slope(F_a) - slope(F_b)) / (std::log(F_a) - std::log(F_b));
}

}  // namespace kprobe
