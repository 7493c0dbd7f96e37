#pragma once

namespace kprobe {

/// Numerical knobs shared by every stage of the pipeline. All values must be
/// positive; the CLI rejects non-positive overrides.
struct Tolerances {
    double tol_nonzero = 1e-9;   ///< threshold for "different from zero"
    double g_tol = 0.02;         ///< allowed relative tail spread of scaled sequences
    double fit_tol = 1e-6;       ///< singular-action fit residual, relative to max |I|
    double h_u = 1e-4;           ///< difference step in u = ln F for singular coordinates
    double h_rel = 1e-4;         ///< relative difference step for smooth coordinates
    double F_floor = 1e-12;      ///< smallest singular coordinate accepted by the Hessian pipeline
    double action_tol = 1e-14;   ///< relative tolerance of loop quadratures
    double trace_tol = 1e-10;    ///< level-set residual accepted on traced vertices
    double max_step = 1e-2;      ///< largest vertex spacing of traced curves
    double cross_tol = 1e-6;     ///< action-derivative vs period agreement
    double sym_tol = 1e-4;       ///< relative antisymmetric part of the action Hessian
};

}  // namespace kprobe
