#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "kprobe/geometry.hpp"

namespace kprobe {

struct TraceOptions {
    double max_step = 1e-2;
    double trace_tol = 1e-10;
    double max_turn = 0.1;  ///< largest tangent rotation per step, radians
    double min_step = 1e-12;
    std::size_t max_vertices = 2'000'000;
};

struct CurveBranch {
    std::vector<Eigen::Vector2d> points;
    bool closed = false;
};

/// Level set {G = f_value} as oriented polylines. Branches follow the
/// Hamiltonian flow of G and are sorted by their leftmost vertex.
struct LevelCurve {
    std::vector<CurveBranch> branches;
    double f_value = 0.0;
};

/// Traces the level set G = level. Level 0 traces the separatrix, whose
/// saddle points are snapped to exactly. Degenerate levels (well bottoms)
/// and levels outside the family's range raise DomainError.
LevelCurve trace_level_curve(const PhaseFamily& family, double level, const TraceOptions& opts = {});
LevelCurve trace_level_curve(const HyperbolicFactor& factor, double level, const TraceOptions& opts = {});

/// Debug dump: header "branch,q,p" and one row per vertex.
void write_level_curve_csv(const LevelCurve& curve, std::ostream& out);

}  // namespace kprobe
