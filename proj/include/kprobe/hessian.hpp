#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kprobe/action_map.hpp"
#include "kprobe/model.hpp"
#include "kprobe/tolerances.hpp"

namespace kprobe {

/// How derivative matrices are obtained. Closed forms (synthetic rows) and
/// period quadrature (geometric diagonals) are the default; Differenced forces
/// Richardson differences everywhere, as a cross-check.
enum class DerivativeMode { Default, Differenced };

struct DifferenceEstimate {
    Eigen::MatrixXd value;
    Eigen::MatrixXd error;  ///< per-entry Richardson error estimate (0 for closed forms)
};

/// Richardson central difference of a vector-valued map along coordinate j:
/// u = ln F_j for singular coordinates (step h_u, with the 1/F_j chain
/// factor), F_j itself otherwise (step h_rel * max(1, |F_j|)). On a failed
/// evaluation the step is halved up to 3 times before giving up.
struct ColumnDerivative {
    Eigen::VectorXd value;
    Eigen::VectorXd error;
};
ColumnDerivative difference_column(const std::function<Eigen::VectorXd(const MomentumPoint&)>& map,
                                   const SystemModel& model, const MomentumPoint& F, std::size_t j,
                                   const Tolerances& tol = {});

/// dI/dF. Center rows are exact identity rows.
DifferenceEstimate jacobian_I_wrt_F_estimate(const SystemModel& model, const MomentumPoint& F,
                                             const Tolerances& tol = {},
                                             DerivativeMode mode = DerivativeMode::Default);
Eigen::MatrixXd jacobian_I_wrt_F(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {},
                                 DerivativeMode mode = DerivativeMode::Default);

/// Gamma solving Gamma J = grad_F H, i.e. the frequencies dH/dI.
Eigen::VectorXd frequency_map(const SystemModel& model, const MomentumPoint& F, const Eigen::MatrixXd& J,
                              const Tolerances& tol = {});
Eigen::VectorXd frequency_map(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {});

/// dGamma/dF by Richardson differencing of the frequency map.
DifferenceEstimate jacobian_Gamma_wrt_F_estimate(const SystemModel& model, const MomentumPoint& F,
                                                 const Tolerances& tol = {});
Eigen::MatrixXd jacobian_Gamma_wrt_F(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {});

/// Closed-form dGamma/dF for models whose factors are all synthetic, from
/// differentiating Gamma J = grad H.
Eigen::MatrixXd analytic_gamma_jacobian(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {});

struct ActionChartSample {
    MomentumPoint F;
    ActionValue I;
    Eigen::MatrixXd J;
    double detJ = 0.0;
    Eigen::VectorXd Gamma;
    Eigen::MatrixXd dGamma_dF;
    Eigen::MatrixXd dGamma_dF_error;
    double detHess = 0.0;
    bool closed_form = false;  ///< dGamma/dF from analytic_gamma_jacobian

    nlohmann::json to_json() const;
};

/// Full sample with detHess = det(dGamma/dF) / det(dI/dF). Points with a
/// singular coordinate below F_floor are refused.
ActionChartSample det_hessian(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {});

/// Hessian of H in the actions, dGamma/dF * (dI/dF)^-1.
Eigen::MatrixXd action_hessian(const ActionChartSample& sample);

/// ||A - A^T|| / ||A + A^T|| (Frobenius).
double symmetry_defect(const Eigen::MatrixXd& A);

/// Newton inverse of the action map from a starting guess.
MomentumPoint momentum_from_action(const SystemModel& model, const std::vector<double>& I, MomentumPoint guess,
                                   const Tolerances& tol = {});

/// dGamma/dI obtained by differencing Gamma in the actions through the
/// inverse chart; independent of the determinant identity. The error
/// estimate includes the rounding floor of I carried through the chart.
DifferenceEstimate direct_action_hessian(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {});

/// First-order bound on the determinant error implied by per-entry errors.
double propagated_det_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& err);

}  // namespace kprobe
