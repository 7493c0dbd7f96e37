#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kprobe/polynomial.hpp"
#include "kprobe/tolerances.hpp"

namespace kprobe {

enum class FactorKind { SaddleChart, DuffingDoubleWell, Pendulum, SyntheticProfile };

/// Which family of regular fibres a factor's action is taken on. Inner is the
/// region enclosed by one separatrix loop (well, libration); outer is the
/// family beyond the separatrix (both wells, rotation). The saddle chart has a
/// single relative region and ignores the choice.
enum class Lobe { Inner, Outer };

std::string_view to_string(FactorKind kind);
std::string_view to_string(Lobe lobe);
FactorKind parse_factor_kind(std::string_view s);
Lobe parse_lobe(std::string_view s);

/// One 1-DOF hyperbolic factor. Its momentum coordinate F is positive on the
/// selected regular side and vanishes exactly on the separatrix.
struct HyperbolicFactor {
    FactorKind kind = FactorKind::SaddleChart;
    Lobe lobe = Lobe::Inner;
    double epsilon = 1.0;  ///< saddle chart half-width
    Polynomial psi;        ///< synthetic profile: I = psi(F) F ln F_s + phi(F)
    Polynomial phi;

    bool is_geometric() const noexcept { return kind != FactorKind::SyntheticProfile; }

    friend bool operator==(const HyperbolicFactor&, const HyperbolicFactor&) = default;
};

/// The regular torus block; its actions equal the momentum coordinates.
struct CenterBlock {
    std::size_t dim = 0;
    friend bool operator==(const CenterBlock&, const CenterBlock&) = default;
};

/// Product integrable system: a center block of dimension n-k followed by k
/// hyperbolic factors, with Hamiltonian H(F_1..F_n) given as a polynomial.
/// Immutable once built.
class SystemModel {
public:
    SystemModel(std::string label, CenterBlock center, std::vector<HyperbolicFactor> factors,
                Polynomial hamiltonian, int max_degree = kDefaultMaxDegree);

    static constexpr int kDefaultMaxDegree = 8;

    const std::string& label() const noexcept { return label_; }
    const CenterBlock& center() const noexcept { return center_; }
    const std::vector<HyperbolicFactor>& factors() const noexcept { return factors_; }
    const HyperbolicFactor& factor(std::size_t i) const { return factors_.at(i); }
    const Polynomial& hamiltonian() const noexcept { return hamiltonian_; }

    std::size_t n() const noexcept { return center_.dim + factors_.size(); }
    std::size_t k() const noexcept { return factors_.size(); }
    std::size_t center_dim() const noexcept { return center_.dim; }

    /// Coordinate index of factor i's momentum F_{n-k+i} (0-based).
    std::size_t singular_coordinate(std::size_t i) const noexcept { return center_.dim + i; }
    bool is_singular_coordinate(std::size_t j) const noexcept { return j >= center_.dim; }
    bool all_synthetic() const noexcept;

    friend bool operator==(const SystemModel&, const SystemModel&) = default;

private:
    std::string label_;
    CenterBlock center_;
    std::vector<HyperbolicFactor> factors_;
    Polynomial hamiltonian_;
};

/// A point (F_1..F_n) of momentum space.
struct MomentumPoint {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    std::span<const double> span() const noexcept { return values; }

    friend bool operator==(const MomentumPoint&, const MomentumPoint&) = default;
};

// ---------------------------------------------------------------------------
// Construction and serialization

SystemModel build_model(const nlohmann::json& spec, int max_degree = SystemModel::kDefaultMaxDegree);
nlohmann::json model_to_json(const SystemModel& model);

Polynomial polynomial_from_json(const nlohmann::json& j, std::size_t num_vars, std::string_view field);
nlohmann::json polynomial_to_json(const Polynomial& p);

/// Reorders the hyperbolic factors (and the matching Hamiltonian variables).
SystemModel permute_factors(const SystemModel& model, std::span<const std::size_t> factor_order);

// ---------------------------------------------------------------------------
// Hypothesis checks

struct ConditionCheck {
    std::string condition;            ///< "cond3", "cond4" or "cond5"
    std::optional<std::size_t> factor;  ///< factor index for per-factor checks
    bool pass = false;
    bool vacuous = false;
    double value = 0.0;  ///< the quantity compared against tol_nonzero
    std::string witness;
};

struct ValidationReport {
    std::vector<ConditionCheck> cond3;  ///< dH/dF_{n-k+i}(0) != 0, one per factor
    ConditionCheck cond4;               ///< det Hess_center H(0) != 0
    std::vector<ConditionCheck> cond5;  ///< F vanishes exactly on each separatrix

    bool all_pass() const noexcept;
    /// First failing check, if any.
    std::optional<ConditionCheck> first_failure() const;
};

ValidationReport validate_conditions(const SystemModel& model, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Corner domain

enum class PointClass { Regular, Boundary, Outside };

/// Intersection of the corner {F_s >= 0, s singular} with a coordinate box.
class CornerDomain {
public:
    CornerDomain(std::vector<double> lower, std::vector<double> upper, std::size_t center_dim);

    std::size_t n() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    bool is_singular_coordinate(std::size_t j) const noexcept { return j >= center_dim_; }

    PointClass classify(const MomentumPoint& F) const;
    bool is_regular(const MomentumPoint& F) const { return classify(F) == PointClass::Regular; }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::size_t center_dim_;
};

CornerDomain corner_domain(const SystemModel& model, std::vector<double> lower, std::vector<double> upper);

/// Regular / boundary / outside classification of a point against the corner alone.
PointClass classify_point(const SystemModel& model, const MomentumPoint& F);

}  // namespace kprobe
