#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "kprobe/action_map.hpp"
#include "kprobe/catalog.hpp"
#include "kprobe/error.hpp"
#include "kprobe/hessian.hpp"

using namespace kprobe;
using namespace kprobe::test;
using std::numbers::e;

TEST_CASE("jacobian_I_wrt_F: decoupled corank-1") {
    const auto m = catalog_model("decoupled-corank1");
    for (auto mode : {DerivativeMode::Default, DerivativeMode::Differenced}) {
        const auto J = jacobian_I_wrt_F(m, pt({0.5, std::exp(-2.0)}), {}, mode);
        CHECK(std::abs(J(1, 1) - 2.0) <= 1e-7);
        CHECK(J(0, 0) == 1.0);
        CHECK(J(0, 1) == 0.0);
        const auto J3 = jacobian_I_wrt_F(m, pt({0.5, std::exp(-3.0)}), {}, mode);
        CHECK(std::abs(J3.determinant() - 3.0) <= 1e-7);
    }
}

TEST_CASE("jacobian_I_wrt_F: identity rows are exact for every model") {
    for (const auto& entry : model_catalog()) {
        const auto m = catalog_model(entry.name);
        const auto J = jacobian_I_wrt_F(m, grid5x5(m)[grid5x5(m).size() / 2]);
        for (std::size_t s = 0; s < m.center_dim(); ++s)
            for (std::size_t j = 0; j < m.n(); ++j) CHECK(J(s, j) == (s == j ? 1.0 : 0.0));
    }
}

TEST_CASE("frequency_map: decoupled corank-1") {
    const auto m = catalog_model("decoupled-corank1");
    const auto G = frequency_map(m, pt({0.5, std::exp(-2.0)}));
    CHECK(std::abs(G(0) - 0.5) < 1e-15);
    CHECK(std::abs(G(1) - 0.5) < 1e-15);
    for (int k = 3; k <= 8; ++k) {
        const double F2 = std::pow(10.0, -k);
        const auto g = frequency_map(m, pt({0.25, F2}));
        CHECK(std::abs(g(1) * std::log(F2) + 1.0) < 1e-12);
        CHECK(g(0) == doctest::Approx(0.25).epsilon(1e-15));
    }
    CHECK_THROWS_AS(frequency_map(m, pt({0.5, 0.1}), Eigen::MatrixXd::Zero(2, 2)), NumericalError);
}

TEST_CASE("jacobian_Gamma_wrt_F: decoupled corank-1 by differencing") {
    const auto m = catalog_model("decoupled-corank1");
    const auto D = jacobian_Gamma_wrt_F(m, pt({0.5, std::exp(-2.0)}));
    CHECK(rel(D(1, 1), e * e / 4) <= 1e-7);
    CHECK(std::abs(D(0, 0) - 1.0) <= 1e-7);
    CHECK(std::abs(D(1, 0)) <= 1e-7);
    CHECK(std::abs(D(0, 1)) <= 1e-7);
}

TEST_CASE("det_hessian: closed forms") {
    const auto s1 = det_hessian(catalog_model("decoupled-corank1"), pt({0.5, std::exp(-2.0)}));
    CHECK(std::abs(s1.detHess - e * e / 8) <= 1e-5);
    CHECK(s1.closed_form);
    CHECK(s1.detJ == doctest::Approx(2.0).epsilon(1e-14));
    const auto s2 = det_hessian(catalog_model("decoupled-corank2"), pt({0.5, std::exp(-2.0), std::exp(-2.0)}));
    CHECK(std::abs(s2.detHess - std::pow(e, 4) / 64) <= 1e-4);
    // the geometric saddle chart has the same actions, so the same determinant
    const auto g1 = det_hessian(catalog_model("saddle-corank1"), pt({0.5, std::exp(-2.0)}));
    CHECK_FALSE(g1.closed_form);
    CHECK(std::abs(g1.detHess - e * e / 8) <= 1e-5);
}

TEST_CASE("det_hessian: degenerate center gives a vanishing determinant") {
    const auto m = catalog_model("degenerate-center");
    for (int k = 2; k <= 10; k += 2) CHECK(std::abs(det_hessian(m, pt({0.0, std::pow(10.0, -k)})).detHess) <= 1e-9);
    // away from F1 = 0 it does not vanish
    CHECK(std::abs(det_hessian(m, pt({0.1, 1e-4})).detHess) > 1e-3);
}

TEST_CASE("det_hessian: refuses points below the floor and on the boundary") {
    const auto m = catalog_model("decoupled-corank1");
    CHECK_THROWS_AS(det_hessian(m, pt({0.0, 1e-13})), DomainError);
    CHECK_THROWS_AS(det_hessian(m, pt({0.0, 0.0})), DomainError);
    CHECK_NOTHROW(det_hessian(m, pt({0.0, 1e-12})));
}

TEST_CASE("synthetic models: differenced derivatives match the closed forms") {
    for (const char* name : {"decoupled-corank1", "decoupled-corank2", "synthetic-coupled"}) {
        const auto m = catalog_model(name);
        for (const auto& F : grid5x5(m)) {
            CAPTURE(name);
            const auto Ja = jacobian_I_wrt_F(m, F);
            const auto Jd = jacobian_I_wrt_F(m, F, {}, DerivativeMode::Differenced);
            const auto Ga = analytic_gamma_jacobian(m, F);
            const auto Gd = jacobian_Gamma_wrt_F(m, F);
            for (Eigen::Index r = 0; r < Ja.rows(); ++r)
                for (Eigen::Index c = 0; c < Ja.cols(); ++c) {
                    CHECK(std::abs(Jd(r, c) - Ja(r, c)) <= 1e-6 * std::max(1.0, std::abs(Ja(r, c))));
                    CHECK(std::abs(Gd(r, c) - Ga(r, c)) <= 1e-6 * std::max(1.0, std::abs(Ga(r, c))));
                }
        }
    }
}

TEST_CASE("action Hessian is symmetric on every catalog model") {
    for (const auto& entry : model_catalog()) {
        const auto m = catalog_model(entry.name);
        for (const auto& F : grid5x5(m)) {
            CAPTURE(entry.name);
            const auto s = det_hessian(m, F);
            CHECK(symmetry_defect(action_hessian(s)) <= 1e-4);
        }
    }
}

TEST_CASE("determinant identity against direct differencing in the actions") {
    for (const char* name : {"decoupled-corank1", "saddle-corank1", "coupled-saddle", "synthetic-coupled",
                             "duffing-outer", "pendulum-libration", "saddle-corank2"}) {
        const auto m = catalog_model(name);
        for (const auto& F : grid5x5(m)) {
            CAPTURE(name);
            CAPTURE(F.values);
            const auto s = det_hessian(m, F);
            const auto direct = direct_action_hessian(m, F);
            const double det_direct = direct.value.determinant();
            const double budget = propagated_det_error(direct.value, direct.error) +
                                  propagated_det_error(s.dGamma_dF, s.dGamma_dF_error) / std::abs(s.detJ);
            CHECK(std::abs(det_direct - s.detHess) <= 10 * budget + 1e-12 * std::abs(s.detHess));
        }
    }
}

TEST_CASE("momentum_from_action inverts the action map") {
    const auto m = catalog_model("coupled-saddle");
    const MomentumPoint F = pt({0.05, 3e-4});
    const auto I = action_at(m, F).values;
    const auto back = momentum_from_action(m, I, pt({0.04, 5e-4}));
    CHECK(std::abs(back[0] - F[0]) < 1e-13);
    CHECK(rel(back[1], F[1]) < 1e-10);
}
