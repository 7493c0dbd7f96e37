#include "kprobe/hessian.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "kprobe/error.hpp"

namespace kprobe {

using nlohmann::json;

namespace {

using VecMap = std::function<Eigen::VectorXd(double)>;

// (4 D(h) - D(2h)) / 3 with error |D(h) - D(2h)| / 3, halving h on failure.
ColumnDerivative richardson(const VecMap& g, double h, const char* what) {
    for (int attempt = 0; attempt <= 3; ++attempt, h *= 0.5) {
        try {
            const Eigen::VectorXd p1 = g(h), m1 = g(-h), p2 = g(2.0 * h), m2 = g(-2.0 * h);
            const Eigen::VectorXd d1 = (p1 - m1) / (2.0 * h), d2 = (p2 - m2) / (4.0 * h);
            if (!d1.allFinite() || !d2.allFinite()) continue;
            return {(4.0 * d1 - d2) / 3.0, (d1 - d2).cwiseAbs() / 3.0};
        } catch (const DomainError&) {
        } catch (const NumericalError&) {
        }
    }
    throw NumericalError(fmt::format("{}: difference step failed after 3 reductions", what));
}

Eigen::MatrixXd identity_rows(const SystemModel& model) {
    const auto n = static_cast<Eigen::Index>(model.n());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < model.center_dim(); ++j) J(j, j) = 1.0;
    return J;
}

void require_regular_point(const SystemModel& model, const MomentumPoint& F) {
    switch (classify_point(model, F)) {
        case PointClass::Outside:
            throw DomainError("point lies outside the corner domain");
        case PointClass::Boundary:
            throw DomainError("point lies on the boundary of the corner (a singular coordinate is 0)");
        case PointClass::Regular:
            break;
    }
}

double determinant(const Eigen::MatrixXd& A) { return A.fullPivLu().determinant(); }

}  // namespace

ColumnDerivative difference_column(const std::function<Eigen::VectorXd(const MomentumPoint&)>& map,
                                   const SystemModel& model, const MomentumPoint& F, std::size_t j,
                                   const Tolerances& tol) {
    if (model.is_singular_coordinate(j)) {
        const double Fj = F[j];
        ColumnDerivative d = richardson(
            [&](double du) {
                MomentumPoint G = F;
                G[j] = Fj * std::exp(du);
                return map(G);
            },
            tol.h_u, "log-coordinate difference");
        d.value /= Fj;
        d.error /= Fj;
        return d;
    }
    const double h = tol.h_rel * std::max(1.0, std::abs(F[j]));
    return richardson(
        [&](double dx) {
            MomentumPoint G = F;
            G[j] = F[j] + dx;
            return map(G);
        },
        h, "coordinate difference");
}

DifferenceEstimate jacobian_I_wrt_F_estimate(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol,
                                             DerivativeMode mode) {
    require_regular_point(model, F);
    const auto n = static_cast<Eigen::Index>(model.n());
    DifferenceEstimate out{identity_rows(model), Eigen::MatrixXd::Zero(n, n)};
    if (mode == DerivativeMode::Default) {
        for (std::size_t i = 0; i < model.k(); ++i)
            out.value.row(model.singular_coordinate(i)) = singular_action_gradient(model, i, F, tol).transpose();
        return out;
    }
    auto singular_rows = [&](const MomentumPoint& G) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < model.k(); ++i) v(model.singular_coordinate(i)) = singular_action(model, i, G, tol);
        return v;
    };
    for (std::size_t j = 0; j < model.n(); ++j) {
        const ColumnDerivative c = difference_column(singular_rows, model, F, j, tol);
        for (std::size_t i = 0; i < model.k(); ++i) {
            const std::size_t s = model.singular_coordinate(i);
            out.value(s, j) = c.value(s);
            out.error(s, j) = c.error(s);
        }
    }
    return out;
}

Eigen::MatrixXd jacobian_I_wrt_F(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol,
                                 DerivativeMode mode) {
    return jacobian_I_wrt_F_estimate(model, F, tol, mode).value;
}

Eigen::VectorXd frequency_map(const SystemModel& model, const MomentumPoint& F, const Eigen::MatrixXd& J,
                              const Tolerances& tol) {
    const auto lu = J.transpose().fullPivLu();
    const double d = lu.determinant();
    if (!(std::abs(d) > tol.tol_nonzero))
        throw NumericalError(fmt::format("action Jacobian is singular (det = {:.3g})", d));
    return lu.solve(model.hamiltonian().gradient(F.span()));
}

Eigen::VectorXd frequency_map(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    return frequency_map(model, F, jacobian_I_wrt_F(model, F, tol), tol);
}

DifferenceEstimate jacobian_Gamma_wrt_F_estimate(const SystemModel& model, const MomentumPoint& F,
                                                 const Tolerances& tol) {
    require_regular_point(model, F);
    const auto n = static_cast<Eigen::Index>(model.n());
    DifferenceEstimate out{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
    auto gamma = [&](const MomentumPoint& G) { return frequency_map(model, G, tol); };
    for (std::size_t j = 0; j < model.n(); ++j) {
        const ColumnDerivative c = difference_column(gamma, model, F, j, tol);
        out.value.col(j) = c.value;
        out.error.col(j) = c.error;
    }
    return out;
}

Eigen::MatrixXd jacobian_Gamma_wrt_F(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    return jacobian_Gamma_wrt_F_estimate(model, F, tol).value;
}

Eigen::MatrixXd analytic_gamma_jacobian(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    if (!model.all_synthetic()) throw ConfigError("closed-form dGamma/dF needs every factor to be synthetic");
    require_regular_point(model, F);
    const auto n = static_cast<Eigen::Index>(model.n());
    const Eigen::MatrixXd J = jacobian_I_wrt_F(model, F, tol);
    const Eigen::VectorXd gamma = frequency_map(model, F, J, tol);
    const Eigen::MatrixXd HF = model.hamiltonian().hessian(F.span());
    std::vector<Eigen::MatrixXd> hess;
    for (std::size_t i = 0; i < model.k(); ++i) hess.push_back(synthetic_action_hessian(model, i, F));

    const auto lu = J.transpose().fullPivLu();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        // d/dF_m of (J^T Gamma = grad H): J^T dGamma = H_{.m} - (dJ/dF_m)^T Gamma
        Eigen::VectorXd rhs = HF.col(m);
        for (std::size_t i = 0; i < model.k(); ++i) rhs -= gamma(model.singular_coordinate(i)) * hess[i].col(m);
        out.col(m) = lu.solve(rhs);
    }
    return out;
}

json ActionChartSample::to_json() const {
    auto mat = [](const Eigen::MatrixXd& A) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    return {{"F", F.values},
            {"I", I.values},
            {"source", to_string(I.source)},
            {"J", mat(J)},
            {"detJ", detJ},
            {"Gamma", std::vector<double>(Gamma.data(), Gamma.data() + Gamma.size())},
            {"dGamma_dF", mat(dGamma_dF)},
            {"dGamma_dF_error", mat(dGamma_dF_error)},
            {"detHess", detHess},
            {"closed_form", closed_form}};
}

ActionChartSample det_hessian(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    require_regular_point(model, F);
    for (std::size_t i = 0; i < model.k(); ++i) {
        const std::size_t s = model.singular_coordinate(i);
        if (F[s] < tol.F_floor)
            throw DomainError(fmt::format("F{} = {:.3g} is below F_floor = {:.3g}", s + 1, F[s], tol.F_floor));
    }
    ActionChartSample out;
    out.F = F;
    out.I = action_at(model, F, tol);
    out.J = jacobian_I_wrt_F(model, F, tol);
    out.detJ = determinant(out.J);
    out.Gamma = frequency_map(model, F, out.J, tol);
    const auto n = static_cast<Eigen::Index>(model.n());
    if (model.all_synthetic()) {
        out.dGamma_dF = analytic_gamma_jacobian(model, F, tol);
        out.dGamma_dF_error = Eigen::MatrixXd::Zero(n, n);
        out.closed_form = true;
    } else {
        const DifferenceEstimate d = jacobian_Gamma_wrt_F_estimate(model, F, tol);
        out.dGamma_dF = d.value;
        out.dGamma_dF_error = d.error;
    }
    out.detHess = determinant(out.dGamma_dF) / out.detJ;
    return out;
}

Eigen::MatrixXd action_hessian(const ActionChartSample& sample) {
    return sample.J.transpose().fullPivLu().solve(sample.dGamma_dF.transpose()).transpose();
}

double symmetry_defect(const Eigen::MatrixXd& A) {
    const double sym = (A + A.transpose()).norm();
    const double anti = (A - A.transpose()).norm();
    if (sym == 0.0) return anti == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return anti / sym;
}

MomentumPoint momentum_from_action(const SystemModel& model, const std::vector<double>& I, MomentumPoint F,
                                   const Tolerances& tol) {
    if (I.size() != model.n()) throw ConfigError("action vector has the wrong dimension");
    const auto n = static_cast<Eigen::Index>(model.n());
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(I.data(), n);
    for (int it = 0; it < 60; ++it) {
        const ActionValue cur = action_at(model, F, tol);
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(cur.values.data(), n) - target;
        const Eigen::VectorXd step = jacobian_I_wrt_F(model, F, tol).fullPivLu().solve(-r);
        double lambda = 1.0;
        for (int back = 0; back < 60; ++back, lambda *= 0.5) {
            bool ok = true;
            for (std::size_t i = 0; i < model.k(); ++i) {
                const std::size_t s = model.singular_coordinate(i);
                if (!(F[s] + lambda * step(s) > 0.0)) ok = false;
            }
            if (ok) break;
        }
        bool small = true;
        for (Eigen::Index j = 0; j < n; ++j) {
            F[j] += lambda * step(j);
            if (std::abs(lambda * step(j)) > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(F[j])) small = false;
        }
        if (small) return F;
    }
    // Newton stalls at the rounding level of the quadrature; accept if close
    const ActionValue cur = action_at(model, F, tol);
    for (Eigen::Index j = 0; j < n; ++j)
        if (std::abs(cur.values[j] - target(j)) > 1e-12 * std::max(1.0, std::abs(target(j))))
            throw NumericalError("inverse action chart did not converge");
    return F;
}

DifferenceEstimate direct_action_hessian(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol) {
    require_regular_point(model, F);
    const auto n = static_cast<Eigen::Index>(model.n());
    const ActionValue I0 = action_at(model, F, tol);
    const Eigen::MatrixXd J = jacobian_I_wrt_F(model, F, tol);
    DifferenceEstimate out{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
    Eigen::VectorXd steps(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        // the I-step that corresponds to the usual F- or ln F-step
        const double h = model.is_singular_coordinate(j) ? tol.h_u * F[j] * std::abs(J(j, j))
                                                         : tol.h_rel * std::max(1.0, std::abs(I0.values[j]));
        steps(j) = h;
        const ColumnDerivative c = richardson(
            [&](double dI) {
                std::vector<double> I = I0.values;
                I[j] += dI;
                const MomentumPoint G = momentum_from_action(model, I, F, tol);
                return frequency_map(model, G, tol);
            },
            h, "action difference");
        out.value.col(j) = c.value;
        out.error.col(j) = c.error;
    }
    // Near a separatrix I is O(1) while the step is O(F h), so the rounding
    // of I itself, carried through the inverse chart, dominates the
    // Richardson estimate. 5/3 is the Richardson noise gain.
    const Eigen::VectorXd I_round =
        Eigen::Map<const Eigen::VectorXd>(I0.values.data(), n).cwiseAbs() * std::numeric_limits<double>::epsilon();
    const Eigen::VectorXd spread = out.value.cwiseAbs() * I_round;
    for (Eigen::Index j = 0; j < n; ++j) out.error.col(j) += (5.0 / 3.0) * spread / steps(j);
    return out;
}

double propagated_det_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& err) {
    const auto lu = A.fullPivLu();
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd inv = lu.inverse();
    return std::abs(lu.determinant()) * (inv.transpose().cwiseAbs().cwiseProduct(err)).sum();
}

}  // namespace kprobe
