#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "kprobe/asymptotics.hpp"
#include "kprobe/catalog.hpp"
#include "kprobe/error.hpp"
#include "kprobe/hessian.hpp"

using namespace kprobe;
using namespace kprobe::test;

namespace {

// decoupled corank-1 with the singular action multiplied by lambda
SystemModel rescaled_decoupled(double lambda) {
    const nlohmann::json f = {
        {"kind", "synthetic-profile"},
        {"params",
         {{"psi", {{"terms", {term({0, 0}, -lambda)}}}}, {"phi", {{"terms", {term({0, 1}, lambda)}}}}}},
        {"lobe", "inner"}};
    return build_model(model_spec(1, {f}, {term({2, 0}, 0.5), term({0, 1}, 1.0)}));
}

// t with t |ln t|^3 = c on (0, 1/e^3), by bisection in ln t
double closed_form_crossing(double c) {
    double lo = -60.0, hi = -3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::exp(mid) * std::pow(-mid, 3) < c ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("sequence tools") {
    std::vector<double> geo;
    for (int n = 0; n < 20; ++n) geo.push_back(2.0 + 0.5 * std::pow(0.7, n));
    CHECK(std::abs(aitken_limit(geo) - 2.0) < 1e-12);
    CHECK(aitken_limit(std::vector<double>(12, -1.0)) == -1.0);
    CHECK(tail_length(40) == 10);
    CHECK(tail_length(100) == 25);
    CHECK(tail_length(6) == 6);
    CHECK(tail_spread({1.0, 1.1, 0.9}, 1.0, 3) == doctest::Approx(0.1));
    CHECK(tail_monotone({1.0, 2.0, 3.0}, 3));
    CHECK_FALSE(tail_monotone({1.0, 3.0, 2.0}, 3));
    const auto s = summarize(geo);
    CHECK(s.tail == 10);
    CHECK(s.monotone);
}

TEST_CASE("radial_path: validation") {
    const auto m = catalog_model("decoupled-corank1");
    const auto p = radial_path(m, {1.0}, 1e-8, 1e-3, 40);
    REQUIRE(p.t.size() == 40);
    CHECK(p.t.front() == doctest::Approx(1e-3));
    CHECK(p.t.back() == doctest::Approx(1e-8));
    for (std::size_t i = 1; i < p.t.size(); ++i) CHECK(p.t[i] < p.t[i - 1]);
    CHECK_THROWS_AS(radial_path(m, {-1.0}, 1e-8, 1e-3, 40), ConfigError);
    CHECK_THROWS_AS(radial_path(m, {1.0}, 1e-3, 1e-8, 40), ConfigError);
    CHECK_THROWS_AS(radial_path(m, pt({0.0, 0.1}), {0.0, 1.0}, 1e-8, 1e-3, 40), ConfigError);
    CHECK_THROWS_AS(scaled_det_path(m, radial_path(m, {1.0}, 1e-14, 1e-3, 40)), DomainError);
}

TEST_CASE("scaled_det_path: decoupled corank-1") {
    const auto m = catalog_model("decoupled-corank1");
    const auto r = scaled_det_path(m, radial_path(m, {1.0}, 1e-8, 1e-3, 40));
    for (double s : r.scaled) CHECK(std::abs(s + 1.0) <= 1e-5);
    CHECK(std::abs(r.g_estimate + 1.0) <= 1e-5);
    CHECK(std::abs(r.exponents.a - 1.0) <= 0.02);
    CHECK(std::abs(r.exponents.b - 3.0) <= 0.02);
    CHECK(r.tail >= 10);
    CHECK(r.verdict == Verdict::KolmogorovHolds);
}

TEST_CASE("scaled_det_path: decoupled corank-2") {
    const auto m = catalog_model("decoupled-corank2");
    const auto r = scaled_det_path(m, radial_path(m, {1.0, 1.0}, 1e-8, 1e-3, 40));
    CHECK(std::abs(r.g_estimate - 1.0) <= 1e-4);
    CHECK(std::abs(r.exponents.a - 1.0) <= 0.02);
    CHECK(std::abs(r.exponents.b - 3.0) <= 0.02);
    CHECK(r.verdict == Verdict::KolmogorovHolds);
}

TEST_CASE("scaled_det_path: coupled saddle model stabilizes") {
    const auto m = catalog_model("coupled-saddle");
    const auto r = scaled_det_path(m, radial_path(m, {1.0}, 1e-6, 1e-3, 40));
    CHECK(r.g_spread <= 0.02);
    CHECK(std::abs(r.g_estimate) > 1e-9);
    CHECK(r.verdict == Verdict::KolmogorovHolds);
}

TEST_CASE("scaled_det_path: failing hypotheses still scan") {
    const auto m = catalog_model("degenerate-center");
    const auto r = scaled_det_path(m, radial_path(m, {1.0}, 1e-8, 1e-3, 20));
    CHECK(r.verdict == Verdict::HypothesisViolated);
    CHECK(r.scaled.size() == 20);
}

TEST_CASE("path independence of g") {
    for (const char* name : {"coupled-saddle", "synthetic-coupled", "saddle-corank2"}) {
        CAPTURE(name);
        const auto m = catalog_model(name);
        std::vector<double> d1(m.k(), 1.0), d2(m.k(), 3.0);
        if (m.k() == 2) d2 = {1.0, 4.0};
        const auto a = scaled_det_path(m, radial_path(m, d1, 1e-10, 1e-3, 40));
        const auto b = scaled_det_path(m, radial_path(m, d2, 1e-10, 1e-3, 40));
        CHECK(rel(a.g_estimate, b.g_estimate) <= 2 * 0.02);
    }
}

TEST_CASE("exponent regression: identifiable over 5 decades, wider over 2") {
    for (const char* name : {"decoupled-corank1", "saddle-corank1", "decoupled-corank2", "synthetic-coupled"}) {
        CAPTURE(name);
        const auto m = catalog_model(name);
        const std::vector<double> dir(m.k(), 1.0);
        const auto five = scaled_det_path(m, radial_path(m, dir, 1e-8, 1e-3, 40));
        const auto two = scaled_det_path(m, radial_path(m, dir, 1e-5, 1e-3, 40));
        CHECK(std::abs(five.exponents.a - 1.0) <= 0.05);
        CHECK(std::abs(five.exponents.b - 3.0) <= 0.05);
        // same number of points, so the wider interval comes from the
        // collinearity of sum ln F and sum ln|ln F| over a short window
        CHECK(two.exponents.a_halfwidth > 1.5 * five.exponents.a_halfwidth);
        CHECK(two.exponents.b_halfwidth > 1.5 * five.exponents.b_halfwidth);
    }
}

TEST_CASE("rescaling the singular action keeps the verdict") {
    const auto base = rescaled_decoupled(1.0);
    const auto path = radial_path(base, {1.0}, 1e-8, 1e-3, 40);
    const auto r1 = scaled_det_path(base, path);
    for (double lambda : {-1.0, 2.5, 1e-2}) {
        CAPTURE(lambda);
        const auto m = rescaled_decoupled(lambda);
        const auto r = scaled_det_path(m, path);
        CHECK(r.verdict == r1.verdict);
        CHECK(rel(r.g_estimate, r1.g_estimate / (lambda * lambda)) <= 1e-10);
        const auto box = corner_domain(m, {-0.1, 1e-6}, {0.1, 1e-2});
        CHECK(verify_kolmogorov(m, box, 200).verdict == Verdict::KolmogorovHolds);
    }
}

TEST_CASE("verify_kolmogorov: decoupled box") {
    const auto m = catalog_model("decoupled-corank1");
    const auto box = corner_domain(m, {-0.1, 1e-6}, {0.1, 1e-2});
    const auto r = verify_kolmogorov(m, box, 500, 7);
    CHECK(r.verdict == Verdict::KolmogorovHolds);
    CHECK(r.samples >= 500);
    CHECK(r.failures == 0);
    // |det| = 1/(F2 |ln F2|^3) is smallest at the top of the box
    const double floor = 1.0 / (1e-2 * std::pow(std::log(1e-2), 3) * -1.0);
    CHECK(r.min_abs_det >= floor * (1 - 1e-9));
    CHECK_THROWS_AS(verify_kolmogorov(m, box, 99), ConfigError);
}

TEST_CASE("verify_kolmogorov: degenerate center is a violation near F1 = 0") {
    const auto m = catalog_model("degenerate-center");
    const auto r = verify_kolmogorov(m, corner_domain(m, {-0.1, 1e-6}, {0.1, 1e-2}), 500);
    CHECK(r.verdict == Verdict::HypothesisViolated);
    CHECK(std::abs(r.argmin[0]) < 1e-2);
    CHECK(r.witness.find("cond4") != std::string::npos);
}

TEST_CASE("verify_kolmogorov: fixed-point model with a vacuous center condition") {
    const auto m = catalog_model("duffing-fixed-point");
    const auto r = verify_kolmogorov(m, corner_domain(m, {1e-6}, {1e-2}), 100);
    CHECK(r.validation.cond4.vacuous);
    CHECK(r.verdict == Verdict::KolmogorovHolds);
    CHECK(r.min_abs_det > 1e-9);
}

TEST_CASE("verify_kolmogorov: box must stay in the corner") {
    const auto m = catalog_model("decoupled-corank1");
    CHECK_THROWS_AS(verify_kolmogorov(m, corner_domain(m, {-0.1, -1e-3}, {0.1, 1e-2}), 100), DomainError);
}

TEST_CASE("box samples are seeded and reproducible") {
    const auto m = catalog_model("decoupled-corank2");
    const auto box = corner_domain(m, {-0.1, 1e-6, 1e-6}, {0.1, 1e-2, 1e-2});
    const auto a = box_samples(m, box, 200, 3);
    CHECK(a == box_samples(m, box, 200, 3));
    CHECK_FALSE(a == box_samples(m, box, 200, 4));
    for (const auto& F : a) CHECK(box.is_regular(F));
}

TEST_CASE("divergence_check: decoupled crossings") {
    const auto m1 = catalog_model("decoupled-corank1");
    const auto d1 = divergence_check(m1, radial_path(m1, {1.0}, 1e-12, 1e-3, 40));
    CHECK(d1.eventually_increasing);
    CHECK(d1.passed);
    REQUIRE(d1.crossings.size() == 3);
    for (const auto& c : d1.crossings) {
        CAPTURE(c.threshold);
        REQUIRE(c.reached);
        CHECK(rel(c.t, closed_form_crossing(1.0 / c.threshold)) <= 1e-6);
    }
    const auto m2 = catalog_model("decoupled-corank2");
    const auto d2 = divergence_check(m2, radial_path(m2, {1.0, 1.0}, 1e-12, 1e-3, 40));
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(d2.crossings[i].reached);
        CHECK(d2.crossings[i].t > d1.crossings[i].t);
    }
}

TEST_CASE("divergence_check: coupled model increases on the tail") {
    const auto m = catalog_model("coupled-saddle");
    const auto d = divergence_check(m, radial_path(m, {1.0}, 1e-12, 1e-3, 40));
    CHECK(d.eventually_increasing);
}

TEST_CASE("frequency_decay_check") {
    const auto m = catalog_model("decoupled-corank1");
    const auto f = frequency_decay_check(m, radial_path(m, {1.0}, 1e-8, 1e-3, 40));
    REQUIRE(f.singular.size() == 1);
    for (double v : f.singular[0].summary.values) CHECK(std::abs(v + 1.0) < 1e-12);
    REQUIRE(f.center.size() == 1);
    CHECK(std::abs(f.center[0].summary.limit) < 1e-12);
    CHECK(f.passed);
    const auto c = catalog_model("coupled-saddle");
    CHECK(frequency_decay_check(c, radial_path(c, {1.0}, 1e-8, 1e-3, 40)).passed);
}

TEST_CASE("block asymptotics on decoupled models") {
    for (const char* name : {"decoupled-corank1", "decoupled-corank2", "saddle-corank1", "saddle-corank2"}) {
        CAPTURE(name);
        const auto m = catalog_model(name);
        const auto r = block_asymptotics(m, radial_path(m, std::vector<double>(m.k(), 1.0), 1e-8, 1e-3, 40));
        CHECK(r.passed);
        for (const auto& s : r.sequences) {
            CAPTURE(s.name);
            CHECK(s.summary.spread <= 0.02);
            CHECK(std::abs(s.summary.limit) > 1e-9);
        }
    }
}
