#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kprobe/model.hpp"
#include "kprobe/polynomial.hpp"
#include "kprobe/tolerances.hpp"

namespace kprobe {

enum class ActionSource { Geometric, Synthetic };

std::string_view to_string(ActionSource s);

/// Actions (I_1..I_n). The center block is copied from F exactly.
struct ActionValue {
    std::vector<double> values;
    ActionSource source = ActionSource::Synthetic;  ///< geometric if any factor is
};

/// Singular action of factor i at a point whose coordinate for i is positive.
double singular_action(const SystemModel& model, std::size_t i, const MomentumPoint& F, const Tolerances& tol = {});

/// Full action map on the regular stratum. Boundary points raise DomainError
/// and must go through continuity_extension.
ActionValue action_at(const SystemModel& model, const MomentumPoint& F, const Tolerances& tol = {});

/// Limit of action_at as the vanishing singular coordinates tend to 0+.
ActionValue continuity_extension(const SystemModel& model, const MomentumPoint& F_boundary,
                                 const Tolerances& tol = {});

/// Row dI_s/dF of factor i. Synthetic factors use the closed form; geometric
/// factors depend on their own coordinate only, with dI/dF = sign * period.
Eigen::VectorXd singular_action_gradient(const SystemModel& model, std::size_t i, const MomentumPoint& F,
                                         const Tolerances& tol = {});

/// Second derivatives of a synthetic factor's action (closed form).
Eigen::MatrixXd synthetic_action_hessian(const SystemModel& model, std::size_t i, const MomentumPoint& F);

// ---------------------------------------------------------------------------
// Singular decomposition I = psi F ln F + phi

struct FitGrid {
    double sing_lo = 1e-6;     ///< singular coordinate range, log-spaced
    double sing_hi = 1e-2;
    int per_decade = 20;
    /// Expansion point for the other coordinates (size n; the entry of the
    /// fitted coordinate is ignored). Other singular coordinates must be > 0.
    std::vector<double> center;
    std::vector<double> half_width;  ///< box half-widths, size n (0 = fixed)
    std::vector<int> counts;         ///< points per box axis, size n (1 = fixed)
    int degree = 2;                  ///< total degree of the smooth monomials

    double decades() const;
    nlohmann::json to_json() const;
};

/// Default grid for factor i: the factor's recommended singular range, a
/// small box around 0 in the center coordinates, other singular coordinates
/// fixed at 1e-2.
FitGrid default_fit_grid(const SystemModel& model, std::size_t i);

struct SingularActionFit {
    std::size_t factor_index = 0;
    std::size_t coordinate = 0;  ///< index of the fitted singular coordinate
    double psi0 = 0.0;
    /// Largest change of psi0 when the lowest or the highest decade of the
    /// grid is dropped (0 from fit_action_samples).
    double psi0_uncertainty = 0.0;
    /// Coefficients in the displacement from grid.center (fitted coordinate
    /// measured from 0).
    Polynomial psi_coeffs;
    Polynomial phi_coeffs;
    double max_residual = 0.0;
    double scale = 0.0;             ///< max |I| over the grid
    double condition_number = 0.0;  ///< of the column-normalized design matrix
    std::size_t num_samples = 0;
    FitGrid grid;

    /// Evaluates the fitted psi F ln F + phi at F.
    double evaluate(const MomentumPoint& F) const;
    nlohmann::json to_json() const;
};

/// Grid points for factor i (fitted coordinate fastest).
std::vector<MomentumPoint> fit_grid_points(const SystemModel& model, std::size_t i, const FitGrid& grid);

/// Least-squares fit of given samples of factor i's action. Raises
/// NumericalError on a rank-deficient basis; the residual is reported only.
SingularActionFit fit_action_samples(const SystemModel& model, std::size_t i, const FitGrid& grid,
                                     const std::vector<MomentumPoint>& points, const std::vector<double>& values);

/// Samples the action on the grid and fits it. Raises ConfigError for grids
/// under 4 decades or 20 points per decade, NumericalError for a
/// rank-deficient basis or a residual above fit_tol * scale.
SingularActionFit fit_singular_action(const SystemModel& model, std::size_t i, const FitGrid& grid,
                                      const Tolerances& tol = {});

/// psi(0) from the period alone: dI/dF = psi (ln F + 1) + O(1) near the
/// separatrix, so the slope of dI/dF against ln F between two tiny F tends
/// to psi. Geometric factors only.
double psi0_from_period(const HyperbolicFactor& factor, double F_a = 1e-11, double F_b = 1e-12,
                        const Tolerances& tol = {});

}  // namespace kprobe
