#include "kprobe/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "kprobe/error.hpp"

namespace kprobe {

using nlohmann::json;

std::string_view to_string(FactorKind kind) {
    switch (kind) {
        case FactorKind::SaddleChart: return "saddle-chart";
        case FactorKind::DuffingDoubleWell: return "duffing-double-well";
        case FactorKind::Pendulum: return "pendulum";
        case FactorKind::SyntheticProfile: return "synthetic-profile";
    }
    return "?";
}

std::string_view to_string(Lobe lobe) { return lobe == Lobe::Inner ? "inner" : "outer"; }

FactorKind parse_factor_kind(std::string_view s) {
    for (auto k : {FactorKind::SaddleChart, FactorKind::DuffingDoubleWell, FactorKind::Pendulum,
                   FactorKind::SyntheticProfile})
        if (s == to_string(k)) return k;
    throw ConfigError(fmt::format("unknown factor kind '{}'", s));
}

Lobe parse_lobe(std::string_view s) {
    if (s == "inner") return Lobe::Inner;
    if (s == "outer") return Lobe::Outer;
    throw ConfigError(fmt::format("unknown lobe '{}' (expected inner or outer)", s));
}

// ---------------------------------------------------------------------------

SystemModel::SystemModel(std::string label, CenterBlock center, std::vector<HyperbolicFactor> factors,
                         Polynomial hamiltonian, int max_degree)
    : label_(std::move(label)),
      center_(center),
      factors_(std::move(factors)),
      hamiltonian_(std::move(hamiltonian)) {
    if (factors_.empty()) throw ConfigError("model needs at least one hyperbolic factor (k >= 1)");
    const std::size_t dim = n();
    if (hamiltonian_.num_vars() != dim)
        throw ConfigError(fmt::format("hamiltonian has {} variables, model has n = {}",
                                      hamiltonian_.num_vars(), dim));
    if (hamiltonian_.empty()) throw ConfigError("hamiltonian has no terms");
    if (hamiltonian_.degree() > max_degree)
        throw ConfigError(fmt::format("hamiltonian degree {} exceeds bound {}", hamiltonian_.degree(),
                                      max_degree));
    const std::vector<double> origin(dim, 0.0);
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto& f = factors_[i];
        if (f.kind == FactorKind::SaddleChart && !(f.epsilon > 0.0 && std::isfinite(f.epsilon)))
            throw ConfigError(fmt::format("factor {}: saddle-chart epsilon must be positive", i + 1));
        if (f.kind == FactorKind::SyntheticProfile) {
            if (f.psi.num_vars() != dim || f.phi.num_vars() != dim)
                throw ConfigError(fmt::format("factor {}: psi/phi must be polynomials in {} variables", i + 1, dim));
            if (std::abs(f.psi(origin)) <= Tolerances{}.tol_nonzero)
                throw ConfigError(fmt::format("factor {}: synthetic profile needs psi(0) != 0", i + 1));
        }
    }
}

bool SystemModel::all_synthetic() const noexcept {
    return std::none_of(factors_.begin(), factors_.end(), [](const auto& f) { return f.is_geometric(); });
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const json& require(const json& j, const char* field, std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
    auto it = j.find(field);
    if (it == j.end()) throw ConfigError(fmt::format("{}: missing field '{}'", where, field));
    return *it;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(fmt::format("{}: unknown field '{}'", where, key));
}

double number(const json& j, std::string_view where) {
    if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
    return j.get<double>();
}

}  // namespace

Polynomial polynomial_from_json(const json& j, std::size_t num_vars, std::string_view field) {
    const json& terms = j.is_array() ? j : require(j, "terms", field);
    if (!terms.is_array()) throw ConfigError(fmt::format("{}: 'terms' must be an array", field));
    Polynomial p(num_vars);
    std::set<Exponents> seen;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string where = fmt::format("{}.terms[{}]", field, t);
        const json& term = terms[t];
        const json& ex = require(term, "exponents", where);
        if (!ex.is_array()) throw ConfigError(where + ": 'exponents' must be an array");
        Exponents e;
        for (const auto& v : ex) {
            if (!v.is_number_integer()) throw ConfigError(where + ": exponents must be integers");
            e.push_back(v.get<int>());
        }
        if (!seen.insert(e).second) throw ConfigError(where + ": duplicate monomial");
        p.add_term(e, number(require(term, "coeff", where), where + ".coeff"));
    }
    return p;
}

json polynomial_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& [e, c] : p.terms()) terms.push_back({{"exponents", e}, {"coeff", c}});
    return {{"terms", terms}};
}

SystemModel build_model(const json& spec, int max_degree) {
    reject_unknown(spec, {"schema_version", "label", "center_dim", "factors", "hamiltonian"}, "model");
    if (auto it = spec.find("schema_version"); it != spec.end() && *it != 1)
        throw ConfigError("model: unsupported schema_version");
    std::string label;
    if (auto it = spec.find("label"); it != spec.end()) {
        if (!it->is_string()) throw ConfigError("model.label: expected a string");
        label = it->get<std::string>();
    }
    const json& cd = require(spec, "center_dim", "model");
    if (!cd.is_number_integer() || cd.get<long long>() < 0)
        throw ConfigError("model.center_dim: expected a non-negative integer");
    const auto center_dim = cd.get<std::size_t>();

    const json& fs = require(spec, "factors", "model");
    if (!fs.is_array() || fs.empty()) throw ConfigError("model.factors: expected a non-empty array");
    const std::size_t n = center_dim + fs.size();

    std::vector<HyperbolicFactor> factors;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const std::string where = fmt::format("model.factors[{}]", i);
        const json& fj = fs[i];
        reject_unknown(fj, {"kind", "params", "lobe"}, where);
        const json& kind = require(fj, "kind", where);
        if (!kind.is_string()) throw ConfigError(where + ".kind: expected a string");
        HyperbolicFactor f;
        f.kind = parse_factor_kind(kind.get<std::string>());
        if (auto it = fj.find("lobe"); it != fj.end()) {
            if (!it->is_string()) throw ConfigError(where + ".lobe: expected a string");
            f.lobe = parse_lobe(it->get<std::string>());
        }
        const json params = fj.value("params", json::object());
        if (!params.is_object()) throw ConfigError(where + ".params: expected an object");
        switch (f.kind) {
            case FactorKind::SaddleChart:
                reject_unknown(params, {"epsilon"}, where + ".params");
                if (params.contains("epsilon")) f.epsilon = number(params["epsilon"], where + ".params.epsilon");
                break;
            case FactorKind::DuffingDoubleWell:
            case FactorKind::Pendulum:
                reject_unknown(params, {}, where + ".params");
                break;
            case FactorKind::SyntheticProfile:
                reject_unknown(params, {"psi", "phi"}, where + ".params");
                f.psi = polynomial_from_json(require(params, "psi", where + ".params"), n, where + ".params.psi");
                f.phi = params.contains("phi") ? polynomial_from_json(params["phi"], n, where + ".params.phi")
                                               : Polynomial(n);
                break;
        }
        factors.push_back(std::move(f));
    }
    Polynomial h = polynomial_from_json(require(spec, "hamiltonian", "model"), n, "model.hamiltonian");
    return SystemModel(std::move(label), CenterBlock{center_dim}, std::move(factors), std::move(h), max_degree);
}

json model_to_json(const SystemModel& model) {
    json factors = json::array();
    for (const auto& f : model.factors()) {
        json params = json::object();
        if (f.kind == FactorKind::SaddleChart) params["epsilon"] = f.epsilon;
        if (f.kind == FactorKind::SyntheticProfile) {
            params["psi"] = polynomial_to_json(f.psi);
            params["phi"] = polynomial_to_json(f.phi);
        }
        factors.push_back({{"kind", to_string(f.kind)}, {"params", params}, {"lobe", to_string(f.lobe)}});
    }
    return {{"label", model.label()},
            {"center_dim", model.center_dim()},
            {"factors", factors},
            {"hamiltonian", polynomial_to_json(model.hamiltonian())}};
}

SystemModel permute_factors(const SystemModel& model, std::span<const std::size_t> factor_order) {
    const std::size_t c = model.center_dim();
    const std::size_t k = model.k();
    if (factor_order.size() != k) throw ConfigError("factor permutation has wrong length");
    std::vector<std::size_t> vars(model.n());
    for (std::size_t v = 0; v < c; ++v) vars[v] = v;
    for (std::size_t i = 0; i < k; ++i) vars[c + i] = c + factor_order[i];
    std::vector<std::size_t> check(vars);
    std::sort(check.begin(), check.end());
    for (std::size_t v = 0; v < check.size(); ++v)
        if (check[v] != v) throw ConfigError("factor order is not a permutation");

    std::vector<HyperbolicFactor> factors;
    for (std::size_t i = 0; i < k; ++i) {
        HyperbolicFactor f = model.factor(factor_order[i]);
        if (f.kind == FactorKind::SyntheticProfile) {
            f.psi = f.psi.permuted(vars);
            f.phi = f.phi.permuted(vars);
        }
        factors.push_back(std::move(f));
    }
    return SystemModel(model.label(), model.center(), std::move(factors), model.hamiltonian().permuted(vars));
}

// ---------------------------------------------------------------------------
// Conditions

bool ValidationReport::all_pass() const noexcept {
    auto ok = [](const ConditionCheck& c) { return c.pass; };
    return std::all_of(cond3.begin(), cond3.end(), ok) && cond4.pass && std::all_of(cond5.begin(), cond5.end(), ok);
}

std::optional<ConditionCheck> ValidationReport::first_failure() const {
    for (const auto& c : cond3)
        if (!c.pass) return c;
    if (!cond4.pass) return cond4;
    for (const auto& c : cond5)
        if (!c.pass) return c;
    return std::nullopt;
}

ValidationReport validate_conditions(const SystemModel& model, const Tolerances& tol) {
    ValidationReport report;
    const std::vector<double> origin(model.n(), 0.0);
    const Polynomial& h = model.hamiltonian();

    for (std::size_t i = 0; i < model.k(); ++i) {
        const std::size_t s = model.singular_coordinate(i);
        ConditionCheck c{.condition = "cond3", .factor = i};
        c.value = h.partial(origin, s);
        c.pass = std::abs(c.value) > tol.tol_nonzero;
        c.witness = fmt::format("dH/dF_{}(0) = {:.17g}", s + 1, c.value);
        report.cond3.push_back(std::move(c));
    }

    ConditionCheck& c4 = report.cond4;
    c4.condition = "cond4";
    if (model.center_dim() == 0) {
        c4.pass = true;
        c4.vacuous = true;
        c4.witness = "k = n: center manifold is a point";
    } else {
        const std::size_t m = model.center_dim();
        const Eigen::MatrixXd block = h.hessian(origin).topLeftCorner(m, m);
        c4.value = block.fullPivLu().determinant();
        c4.pass = std::abs(c4.value) > tol.tol_nonzero;
        c4.witness = fmt::format("det(d2H/dF_s dF_t)_(s,t<={})(0) = {:.17g}", m, c4.value);
    }

    for (std::size_t i = 0; i < model.k(); ++i) {
        const auto& f = model.factor(i);
        ConditionCheck c{.condition = "cond5", .factor = i, .pass = true};
        switch (f.kind) {
            case FactorKind::SaddleChart: c.witness = "F = pq vanishes on the axes"; break;
            case FactorKind::DuffingDoubleWell: c.witness = "F = |E| vanishes on the figure-eight E = 0"; break;
            case FactorKind::Pendulum: c.witness = "F = |E - 1| vanishes on the separatrix E = 1"; break;
            case FactorKind::SyntheticProfile: c.witness = "I = psi F ln F + phi with psi(0) != 0"; break;
        }
        report.cond5.push_back(std::move(c));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Corner domain

CornerDomain::CornerDomain(std::vector<double> lower, std::vector<double> upper, std::size_t center_dim)
    : lower_(std::move(lower)), upper_(std::move(upper)), center_dim_(center_dim) {
    if (lower_.size() != upper_.size()) throw ConfigError("box bounds have mismatched lengths");
    for (std::size_t j = 0; j < lower_.size(); ++j) {
        if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]))
            throw ConfigError(fmt::format("box bound for F_{} is not finite", j + 1));
        if (is_singular_coordinate(j)) {
            if (!(upper_[j] > 0.0))
                throw ConfigError(fmt::format("box upper bound for singular F_{} must be positive", j + 1));
            if (lower_[j] < 0.0)
                throw DomainError(fmt::format("box reaches outside the corner: lower bound of F_{} is negative", j + 1));
        }
        if (lower_[j] > upper_[j]) throw ConfigError(fmt::format("empty box along F_{}", j + 1));
    }
}

PointClass CornerDomain::classify(const MomentumPoint& F) const {
    if (F.size() != n()) throw ConfigError("point dimension does not match the domain");
    bool boundary = false;
    for (std::size_t j = 0; j < n(); ++j) {
        if (!(F[j] >= lower_[j] && F[j] <= upper_[j])) return PointClass::Outside;
        if (is_singular_coordinate(j) && F[j] == 0.0) boundary = true;
    }
    return boundary ? PointClass::Boundary : PointClass::Regular;
}

CornerDomain corner_domain(const SystemModel& model, std::vector<double> lower, std::vector<double> upper) {
    if (lower.size() != model.n() || upper.size() != model.n())
        throw ConfigError(fmt::format("box must have {} coordinates", model.n()));
    return CornerDomain(std::move(lower), std::move(upper), model.center_dim());
}

PointClass classify_point(const SystemModel& model, const MomentumPoint& F) {
    if (F.size() != model.n())
        throw ConfigError(fmt::format("point has {} coordinates, model has n = {}", F.size(), model.n()));
    bool boundary = false;
    for (std::size_t j = 0; j < F.size(); ++j) {
        if (!std::isfinite(F[j])) return PointClass::Outside;
        if (model.is_singular_coordinate(j)) {
            if (F[j] < 0.0) return PointClass::Outside;
            if (F[j] == 0.0) boundary = true;
        }
    }
    return boundary ? PointClass::Boundary : PointClass::Regular;
}

}  // namespace kprobe
