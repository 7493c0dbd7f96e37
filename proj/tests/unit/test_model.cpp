#include <doctest.h>

#include "helpers.hpp"
#include "kprobe/catalog.hpp"
#include "kprobe/error.hpp"

using namespace kprobe;
using namespace kprobe::test;

TEST_CASE("build_model: corank-1 and corank-2 saddle models") {
    const auto m1 = build_model(model_spec(1, {saddle()}, {term({2, 0}, 0.5), term({0, 1}, 1.0)}));
    CHECK(m1.n() == 2);
    CHECK(m1.k() == 1);
    const auto m2 = build_model(
        model_spec(1, {saddle(), saddle()}, {term({2, 0, 0}, 0.5), term({0, 1, 0}, 1.0), term({0, 0, 1}, 1.0)}));
    CHECK(m2.n() == 3);
    CHECK(m2.k() == 2);
    CHECK(m2.singular_coordinate(1) == 2);
}

TEST_CASE("build_model: duffing fixed point has no center block") {
    const auto m = build_model(model_spec(0, {{{"kind", "duffing-double-well"}, {"params", nlohmann::json::object()},
                                               {"lobe", "inner"}}},
                                          {term({1}, 1.0)}));
    CHECK(m.n() == 1);
    CHECK(m.k() == 1);
    const auto v = validate_conditions(m);
    CHECK(v.cond4.vacuous);
    CHECK(v.all_pass());
}

TEST_CASE("build_model: rejects malformed specs") {
    const auto H = std::vector<nlohmann::json>{term({2, 0}, 0.5), term({0, 1}, 1.0)};
    CHECK_THROWS_AS(build_model(model_spec(1, {{{"kind", "focus-focus"}, {"params", nlohmann::json::object()},
                                                {"lobe", "inner"}}},
                                           H)),
                    ConfigError);
    CHECK_THROWS_AS(build_model(model_spec(1, {saddle(0.0)}, H)), ConfigError);
    CHECK_THROWS_AS(build_model(model_spec(1, {saddle(-1.0)}, H)), ConfigError);
    const nlohmann::json bad_synthetic = {
        {"kind", "synthetic-profile"},
        {"params", {{"psi", {{"terms", {term({1, 0}, 1.0)}}}}, {"phi", {{"terms", nlohmann::json::array()}}}}},
        {"lobe", "inner"}};
    CHECK_THROWS_AS(build_model(model_spec(1, {bad_synthetic}, H)), ConfigError);
    CHECK_THROWS_AS(build_model(model_spec(1, {}, {term({1}, 1.0)})), ConfigError);
    CHECK_THROWS_AS(build_model(model_spec(1, {saddle()}, {term({9, 0}, 1.0)})), ConfigError);
    auto missing = model_spec(1, {saddle()}, H);
    missing.erase("hamiltonian");
    CHECK_THROWS_AS(build_model(missing), ConfigError);
}

TEST_CASE("validate_conditions: exact checks of the hyperbolic and center conditions") {
    SUBCASE("passing model") {
        const auto v = validate_conditions(catalog_model("saddle-corank1"));
        REQUIRE(v.cond3.size() == 1);
        CHECK(v.cond3[0].pass);
        CHECK(v.cond3[0].value == 1.0);
        CHECK(v.cond4.pass);
        CHECK(v.cond4.value == 1.0);
        CHECK(v.all_pass());
        CHECK_FALSE(v.first_failure().has_value());
    }
    SUBCASE("dH/dF2(0) = 0") {
        const auto v = validate_conditions(
            build_model(model_spec(1, {saddle()}, {term({2, 0}, 0.5), term({0, 2}, 1.0)})));
        CHECK_FALSE(v.cond3[0].pass);
        CHECK(v.cond3[0].value == 0.0);
        CHECK(v.first_failure()->condition == "cond3");
    }
    SUBCASE("d2H/dF1^2(0) = 0") {
        const auto v = validate_conditions(
            build_model(model_spec(1, {saddle()}, {term({3, 0}, 1.0), term({0, 1}, 1.0)})));
        CHECK(v.cond3[0].pass);
        CHECK_FALSE(v.cond4.pass);
        CHECK(v.cond4.value == 0.0);
        CHECK(v.first_failure()->condition == "cond4");
    }
}

TEST_CASE("validate_conditions: permuting factors permutes the per-factor entries only") {
    // two saddle factors with different dH/dF at 0
    const auto m = build_model(model_spec(
        1, {saddle(1.0), saddle(0.5)}, {term({2, 0, 0}, 0.5), term({0, 1, 0}, 2.0), term({0, 0, 1}, -3.0)}));
    const std::vector<std::size_t> order{1, 0};
    const auto p = permute_factors(m, order);
    const auto a = validate_conditions(m);
    const auto b = validate_conditions(p);
    REQUIRE(a.cond3.size() == 2);
    CHECK(b.cond3[0].value == a.cond3[1].value);
    CHECK(b.cond3[1].value == a.cond3[0].value);
    CHECK(b.cond3[0].pass == a.cond3[1].pass);
    CHECK(b.cond4.value == a.cond4.value);
    CHECK(b.cond5.size() == a.cond5.size());
    CHECK(p.factor(0).epsilon == 0.5);
}

TEST_CASE("model JSON round trip is the identity") {
    for (const auto& e : model_catalog()) {
        CAPTURE(e.name);
        const auto m = catalog_model(e.name);
        const auto text = model_to_json(m).dump();
        const auto back = build_model(nlohmann::json::parse(text));
        CHECK(back == m);
        CHECK(model_to_json(back).dump() == text);
    }
    // awkward coefficients survive bit-exactly
    const auto m = build_model(model_spec(1, {saddle(0.1)}, {term({2, 0}, 1.0 / 3.0), term({0, 1}, 0.1 + 0.2)}));
    CHECK(build_model(nlohmann::json::parse(model_to_json(m).dump())) == m);
}

TEST_CASE("corner_domain: membership") {
    const auto m = catalog_model("saddle-corank1");
    const auto box = corner_domain(m, {-0.5, 0.0}, {0.5, 0.1});
    CHECK(box.classify(pt({0.0, 0.05})) == PointClass::Regular);
    CHECK(box.classify(pt({0.0, 0.0})) == PointClass::Boundary);
    CHECK(box.classify(pt({0.0, -0.01})) == PointClass::Outside);
    CHECK(box.classify(pt({0.7, 0.05})) == PointClass::Outside);
    CHECK(classify_point(m, pt({0.0, 0.0})) == PointClass::Boundary);
    CHECK_THROWS_AS(corner_domain(m, {0.5, 0.0}, {-0.5, 0.1}), ConfigError);
    CHECK_THROWS_AS(corner_domain(m, {-0.5, 0.0}, {0.5, 0.0}), ConfigError);
}

TEST_CASE("catalog factors vanish exactly on their separatrix") {
    for (const auto& e : model_catalog()) {
        CAPTURE(e.name);
        const auto v = validate_conditions(catalog_model(e.name));
        for (const auto& c : v.cond5) CHECK(c.pass);
    }
}
