#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kprobe/hessian.hpp"
#include "kprobe/model.hpp"
#include "kprobe/tolerances.hpp"

namespace kprobe {

enum class Verdict { KolmogorovHolds, HypothesisViolated, Inconclusive };
std::string_view to_string(Verdict v);

/// t -> F(t) = base + direction * t, approaching base (whose singular
/// coordinates are 0) as t decreases. Samples are strictly decreasing.
struct SingularPath {
    MomentumPoint base;
    std::vector<double> direction;
    std::vector<double> t;

    MomentumPoint at(double tv) const;
    nlohmann::json to_json() const;
};

/// Log-spaced samples from t_max down to t_min. Throws ConfigError unless the
/// singular base entries are 0, the singular directions are > 0 and
/// 0 < t_min < t_max, points >= 2.
SingularPath radial_path(const SystemModel& model, MomentumPoint base, std::vector<double> direction, double t_min,
                         double t_max, int points);

/// Radial path to the origin with the given singular directions and the
/// center coordinates fixed at 0.
SingularPath radial_path(const SystemModel& model, const std::vector<double>& singular_direction, double t_min,
                         double t_max, int points);

// ---------------------------------------------------------------------------
// Sequence tools

/// Aitken delta-squared on the last three terms; falls back to the last term
/// when the sequence has converged to rounding or the step is unstable.
double aitken_limit(const std::vector<double>& x);

/// Running limit estimates: element m is aitken_limit of x[0..m].
std::vector<double> running_limits(const std::vector<double>& x);

/// Tail length used for spreads: max(10, N/4), capped at N.
std::size_t tail_length(std::size_t n);

/// max |x_i - limit| / |limit| over the last `tail` terms.
double tail_spread(const std::vector<double>& x, double limit, std::size_t tail);

/// |x| monotone over the tail, ignoring steps below 1e-7 relative.
bool tail_monotone(const std::vector<double>& x, std::size_t tail);

struct SequenceSummary {
    std::vector<double> values;
    double limit = 0.0;
    double spread = 0.0;
    std::size_t tail = 0;
    bool monotone = true;
};
SequenceSummary summarize(std::vector<double> values);

/// log|det| = c - a * sum ln F - b * sum ln|ln F| by least squares, with
/// 95% half-widths (1.96 standard errors).
struct ExponentFit {
    double a = 0.0;
    double b = 0.0;
    double constant = 0.0;
    double a_halfwidth = 0.0;
    double b_halfwidth = 0.0;
    nlohmann::json to_json() const;
};
ExponentFit fit_exponents(const std::vector<double>& abs_det, const std::vector<double>& sum_log_F,
                          const std::vector<double>& sum_loglog_F);

// ---------------------------------------------------------------------------

struct HessianScalingReport {
    SingularPath path;
    std::vector<MomentumPoint> F;
    std::vector<double> raw_det;
    std::vector<double> scaled;  ///< det * prod F (ln F)^3 over the singular coordinates
    std::vector<double> running_g;
    double g_estimate = 0.0;
    double g_spread = 0.0;
    std::size_t tail = 0;
    bool tail_monotone = true;
    ExponentFit exponents;
    Verdict verdict = Verdict::Inconclusive;
    ValidationReport validation;
    std::string note;

    nlohmann::json to_json() const;
};

/// Evaluates det_hessian along the path. A model failing validate_conditions
/// still gets the scan, with verdict hypothesis-violated.
HessianScalingReport scaled_det_path(const SystemModel& model, const SingularPath& path, const Tolerances& tol = {});

struct ThresholdCrossing {
    double threshold = 0.0;
    bool reached = false;
    double t = 0.0;  ///< largest t with |det(t)| = threshold, if reached
};

struct DivergenceRecord {
    std::vector<double> t;
    std::vector<double> abs_det;
    bool eventually_increasing = false;  ///< strictly over the second half of the samples
    std::vector<ThresholdCrossing> crossings;
    bool passed = false;
    nlohmann::json to_json() const;
};

DivergenceRecord divergence_check(const SystemModel& model, const SingularPath& path, const Tolerances& tol = {},
                                  const std::vector<double>& thresholds = {10.0, 1e3, 1e6});

struct NamedSequence {
    std::string name;
    std::optional<std::size_t> factor;
    SequenceSummary summary;
    bool passed = false;
    nlohmann::json to_json() const;
};

struct FrequencyDecayRecord {
    std::vector<NamedSequence> singular;  ///< Gamma_s ln F_s per factor
    std::vector<NamedSequence> center;    ///< Gamma_t against dH/dF_t at the limit point
    bool passed = false;
    nlohmann::json to_json() const;
};

FrequencyDecayRecord frequency_decay_check(const SystemModel& model, const SingularPath& path,
                                           const Tolerances& tol = {});

/// The four limits behind the determinant formula, per factor:
/// (dI_s/dF_s)/ln F_s, detJ / prod ln F, Gamma_s ln F_s and
/// dGamma_s/dF_s * F_s (ln F_s)^2. Each must stabilize (spread <= g_tol) at a
/// nonzero value.
struct BlockAsymptoticsRecord {
    std::vector<NamedSequence> sequences;
    bool passed = false;
    nlohmann::json to_json() const;
};

BlockAsymptoticsRecord block_asymptotics(const SystemModel& model, const SingularPath& path,
                                         const Tolerances& tol = {});

// ---------------------------------------------------------------------------

struct KolmogorovRecord {
    ValidationReport validation;
    std::size_t samples = 0;  ///< evaluated points, anchors included
    double min_abs_det = 0.0;
    MomentumPoint argmin;
    std::size_t failures = 0;
    std::vector<MomentumPoint> failure_points;  ///< first few, for the report
    Verdict verdict = Verdict::Inconclusive;
    std::string witness;
    nlohmann::json to_json() const;
};

/// Seeded, shifted Halton points in the box (log-uniform in singular
/// coordinates, floored at F_floor) plus the box center and corners.
std::vector<MomentumPoint> box_samples(const SystemModel& model, const CornerDomain& box, std::size_t count,
                                       std::uint64_t seed, const Tolerances& tol = {});

KolmogorovRecord verify_kolmogorov(const SystemModel& model, const CornerDomain& box, std::size_t samples,
                                   std::uint64_t seed = 0, const Tolerances& tol = {});

nlohmann::json to_json(const ValidationReport& v);

}  // namespace kprobe
