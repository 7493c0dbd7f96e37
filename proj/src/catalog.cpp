#include "kprobe/catalog.hpp"

#include <fmt/format.h>

#include "kprobe/error.hpp"

namespace kprobe {

using nlohmann::json;

namespace {

json term(std::vector<int> e, double c) { return {{"exponents", std::move(e)}, {"coeff", c}}; }

json poly(std::initializer_list<json> terms) { return {{"terms", json(std::vector<json>(terms))}}; }

json factor(std::string_view kind, std::string_view lobe = "inner", json params = json::object()) {
    return {{"kind", kind}, {"params", std::move(params)}, {"lobe", lobe}};
}

// I = -F ln F + F on coordinate s of an n-dimensional model.
json decoupled_synthetic(std::size_t n, std::size_t s) {
    std::vector<int> zero(n, 0), lin(n, 0);
    lin[s] = 1;
    return factor("synthetic-profile", "inner", {{"psi", poly({term(zero, -1.0)})}, {"phi", poly({term(lin, 1.0)})}});
}

json model(std::string label, int center_dim, json factors, json hamiltonian) {
    return {{"label", std::move(label)},
            {"center_dim", center_dim},
            {"factors", std::move(factors)},
            {"hamiltonian", std::move(hamiltonian)}};
}

std::vector<CatalogEntry> make_catalog() {
    std::vector<CatalogEntry> c;
    const json saddle = factor("saddle-chart", "inner", {{"epsilon", 1.0}});
    const json h2 = poly({term({2, 0}, 0.5), term({0, 1}, 1.0)});

    c.push_back({"decoupled-corank1", "F1^2/2 + F2 with closed-form I2 = -F2 ln F2 + F2",
                 model("decoupled-corank1", 1, {decoupled_synthetic(2, 1)}, h2)});
    c.push_back({"decoupled-corank2", "F1^2/2 + F2 + F3 with two closed-form singular actions",
                 model("decoupled-corank2", 1, {decoupled_synthetic(3, 1), decoupled_synthetic(3, 2)},
                       poly({term({2, 0, 0}, 0.5), term({0, 1, 0}, 1.0), term({0, 0, 1}, 1.0)}))});
    c.push_back({"saddle-corank1", "F1^2/2 + F2 with a geometric saddle chart (epsilon = 1)",
                 model("saddle-corank1", 1, {saddle}, h2)});
    c.push_back({"saddle-corank2", "F1^2/2 + F2 + F3 with two geometric saddle charts",
                 model("saddle-corank2", 1, {saddle, saddle},
                       poly({term({2, 0, 0}, 0.5), term({0, 1, 0}, 1.0), term({0, 0, 1}, 1.0)}))});
    c.push_back({"coupled-saddle", "F1^2/2 + F2 + F1 F2/2 with a geometric saddle chart",
                 model("coupled-saddle", 1, {saddle},
                       poly({term({2, 0}, 0.5), term({0, 1}, 1.0), term({1, 1}, 0.5)}))});
    c.push_back({"synthetic-coupled", "psi = -(1 + F1^2/4), phi = F2 + F1 F2/2, H = F1^2/2 + F2 + F1^2 F2/4",
                 model("synthetic-coupled", 1,
                       {factor("synthetic-profile", "inner",
                               {{"psi", poly({term({0, 0}, -1.0), term({2, 0}, -0.25)})},
                                {"phi", poly({term({0, 1}, 1.0), term({1, 1}, 0.5)})}})},
                       poly({term({2, 0}, 0.5), term({0, 1}, 1.0), term({2, 1}, 0.25)}))});
    c.push_back({"duffing-fixed-point", "single Duffing well (k = n = 1), H = F1",
                 model("duffing-fixed-point", 0, {factor("duffing-double-well", "inner")}, poly({term({1}, 1.0)}))});
    c.push_back({"duffing-outer", "F1^2/2 + F2, Duffing orbits encircling both wells",
                 model("duffing-outer", 1, {factor("duffing-double-well", "outer")}, h2)});
    c.push_back({"pendulum-libration", "F1^2/2 + F2, pendulum librations below the separatrix",
                 model("pendulum-libration", 1, {factor("pendulum", "inner")}, h2)});
    c.push_back({"pendulum-rotation", "pendulum rotations above the separatrix (k = n = 1), H = F1",
                 model("pendulum-rotation", 0, {factor("pendulum", "outer")}, poly({term({1}, 1.0)}))});
    c.push_back({"degenerate-center", "control: H = F1^3/3 + F2 violates the center Kolmogorov condition",
                 model("degenerate-center", 1, {decoupled_synthetic(2, 1)},
                       poly({term({3, 0}, 1.0 / 3.0), term({0, 1}, 1.0)}))});
    c.push_back({"degenerate-hyperbolic", "control: H = F1^2/2 + F2^2 has dH/dF2(0) = 0",
                 model("degenerate-hyperbolic", 1, {decoupled_synthetic(2, 1)},
                       poly({term({2, 0}, 0.5), term({0, 2}, 1.0)}))});
    return c;
}

}  // namespace

const std::vector<CatalogEntry>& model_catalog() {
    static const std::vector<CatalogEntry> catalog = make_catalog();
    return catalog;
}

const CatalogEntry& catalog_entry(std::string_view name) {
    for (const auto& e : model_catalog())
        if (e.name == name) return e;
    throw ConfigError(fmt::format("no catalog model named '{}'", name));
}

SystemModel catalog_model(std::string_view name) { return build_model(catalog_entry(name).spec); }

}  // namespace kprobe
