#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "kprobe/catalog.hpp"
#include "kprobe/elliptic.hpp"
#include "kprobe/error.hpp"
#include "kprobe/geometry.hpp"
#include "kprobe/level_curve.hpp"
#include "kprobe/quadrature.hpp"

using namespace kprobe;
using namespace kprobe::test;
using std::numbers::pi;

namespace {

HyperbolicFactor factor_of(const char* kind, const char* lobe = "inner") {
    HyperbolicFactor f;
    f.kind = parse_factor_kind(kind);
    f.lobe = parse_lobe(lobe);
    return f;
}

std::vector<HyperbolicFactor> geometric_factors() {
    return {factor_of("saddle-chart"), factor_of("duffing-double-well", "inner"),
            factor_of("duffing-double-well", "outer"), factor_of("pendulum", "inner"), factor_of("pendulum", "outer")};
}

// pendulum closed forms in terms of h = G + 1 = p^2/2 - cos q
double pendulum_rotation_action(double G) {
    const double k = std::sqrt(2.0 / (G + 2.0));
    return 4.0 * std::sqrt(2.0 * (G + 2.0)) * elliptic_E(k);
}
double pendulum_libration_action(double G) {
    const double k = std::sqrt((G + 2.0) / 2.0);
    const auto ke = elliptic_KE(k);
    return 16.0 * (ke.E - (1.0 - k * k) * ke.K);
}

}  // namespace

TEST_CASE("tanh-sinh: endpoint singular integrals") {
    CHECK(std::abs(integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) - 2.0) <= 1e-12);
    CHECK(std::abs(integrate_tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0) + 1.0) <= 1e-12);
    const double lobe = integrate_tanh_sinh([](double q) { return 2.0 * q * std::sqrt(1.0 - q * q / 2.0); }, 0.0,
                                            std::sqrt(2.0));
    CHECK(std::abs(lobe - 4.0 / 3.0) <= 1e-12);
}

TEST_CASE("tanh-sinh: non-convergence reports the last estimates") {
    TanhSinhOptions o;
    o.max_levels = 3;
    o.abs_tol = 1e-300;
    try {
        tanh_sinh([](double x, double, double) { return std::sin(200.0 * x); }, 0.0, 10.0, o);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(std::string(e.what()).find("estimates") != std::string::npos);
    }
}

TEST_CASE("elliptic integrals by AGM") {
    const auto k0 = elliptic_KE(0.0);
    CHECK(k0.K == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(k0.E == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(elliptic_E(1.0) == 1.0);
    CHECK_THROWS_AS(elliptic_KE(1.0), DomainError);
    for (double k : {1.0 / std::sqrt(2.0), 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        CAPTURE(k);
        const auto ke = elliptic_KE(k);
        const double K = integrate_tanh_sinh(
            [k](double t) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(t) * std::sin(t)); }, 0.0, pi / 2, 1e-14);
        const double E = integrate_tanh_sinh(
            [k](double t) { return std::sqrt(1.0 - k * k * std::sin(t) * std::sin(t)); }, 0.0, pi / 2, 1e-14);
        CHECK(std::abs(ke.K - K) <= 1e-12);
        CHECK(std::abs(ke.E - E) <= 1e-12);
    }
}

TEST_CASE("trace_level_curve: saddle hyperbola") {
    const auto curve = trace_level_curve(factor_of("saddle-chart"), 0.25);
    const CurveBranch* first = nullptr;
    for (const auto& b : curve.branches)
        if (b.points.front().x() > 0.0) first = &b;
    REQUIRE(first != nullptr);
    CHECK_FALSE(first->closed);
    const auto& a = first->points.front();
    const auto& z = first->points.back();
    CHECK(std::abs(a.x() - 0.25) < 1e-12);
    CHECK(std::abs(a.y() - 1.0) < 1e-12);
    CHECK(std::abs(z.x() - 1.0) < 1e-12);
    CHECK(std::abs(z.y() - 0.25) < 1e-12);
    for (const auto& v : first->points) CHECK(std::abs(v.y() - 0.25 / v.x()) < 1e-10);
}

TEST_CASE("trace_level_curve: duffing separatrix and degenerate level") {
    const auto fam = make_phase_family(factor_of("duffing-double-well"));
    const auto curve = trace_level_curve(*fam, 0.0);
    double qmax = -1.0;
    bool through_origin = false;
    for (const auto& b : curve.branches)
        for (const auto& v : b.points) {
            qmax = std::max(qmax, v.x());
            through_origin = through_origin || v.norm() < 1e-12;
        }
    CHECK(through_origin);
    CHECK(std::abs(qmax - std::sqrt(2.0)) < 1e-9);
    CHECK_THROWS_AS(trace_level_curve(*fam, -0.25), DomainError);
    CHECK_THROWS_AS(trace_level_curve(*fam, -0.3), DomainError);
}

TEST_CASE("trace_level_curve: vertices stay on the level set, loops close") {
    TraceOptions o;
    struct Case {
        HyperbolicFactor f;
        double level;
    };
    for (const auto& c : std::vector<Case>{{factor_of("saddle-chart"), 0.01},
                                           {factor_of("saddle-chart"), -0.3},
                                           {factor_of("duffing-double-well"), -0.1},
                                           {factor_of("duffing-double-well", "outer"), 0.2},
                                           {factor_of("pendulum"), -1.0},
                                           {factor_of("pendulum", "outer"), 0.5}}) {
        CAPTURE(c.level);
        const auto fam = make_phase_family(c.f);
        const auto curve = trace_level_curve(*fam, c.level, o);
        REQUIRE_FALSE(curve.branches.empty());
        double left = -1e300;
        for (const auto& b : curve.branches) {
            double lo = 1e300;
            for (std::size_t i = 0; i < b.points.size(); ++i) {
                const auto& v = b.points[i];
                lo = std::min(lo, v.x());
                CHECK(std::abs(fam->level_function(v.x(), v.y()) - c.level) < o.trace_tol);
                if (i > 0) CHECK((v - b.points[i - 1]).norm() <= o.max_step * (1 + 1e-12));
            }
            if (b.closed) CHECK((b.points.front() - b.points.back()).norm() < o.trace_tol);
            CHECK(lo >= left);  // canonical order by leftmost vertex
            left = lo;
        }
    }
}

TEST_CASE("level curve CSV dump") {
    std::ostringstream s;
    write_level_curve_csv(trace_level_curve(factor_of("saddle-chart"), 0.5), s);
    CHECK(s.str().rfind("branch,q,p\n", 0) == 0);
}

TEST_CASE("turning points sit on p = 0 of the level set") {
    const auto fam = make_phase_family(factor_of("duffing-double-well", "outer"));
    const auto tp = turning_points(*fam, 0.3);
    REQUIRE(tp.points.size() == 2);
    for (const auto& v : tp.points) {
        CHECK(v.y() == 0.0);
        CHECK(std::abs(fam->level_function(v.x(), 0.0) - 0.3) < 1e-13);
    }
}

TEST_CASE("loop actions: closed forms") {
    const auto harmonic = make_harmonic_family();
    CHECK(std::abs(loop_action_integral(*harmonic, 1.0) - 2 * pi) < 1e-12);
    for (double E : {0.1, 1.0, 7.0}) CHECK(std::abs(period_integral(*harmonic, E) - 2 * pi) < 1e-12);

    const auto duff = factor_of("duffing-double-well");
    CHECK(std::abs(loop_action_integral(duff, -1e-12) - 4.0 / 3.0) < 1e-9);

    const auto rot = factor_of("pendulum", "outer");
    CHECK(std::abs(loop_action_integral(rot, 0.5) - pendulum_rotation_action(0.5)) < 1e-10);
    const auto lib = factor_of("pendulum");
    for (double G : {-1.9, -1.0, -0.01})
        CHECK(std::abs(loop_action_integral(lib, G) - pendulum_libration_action(G)) < 1e-10);
}

TEST_CASE("duffing action: quadrature agrees with a tighter re-run") {
    const auto outer = factor_of("duffing-double-well", "outer");
    Tolerances loose, tight;
    tight.action_tol = loose.action_tol / 10;
    CHECK(std::abs(loop_action_integral(outer, 0.01, loose) - loop_action_integral(outer, 0.01, tight)) < 1e-9);
}

TEST_CASE("separatrix areas") {
    CHECK(std::abs(separatrix_area(factor_of("duffing-double-well")) - 4.0 / 3.0) < 1e-10);
    CHECK(std::abs(separatrix_area(factor_of("duffing-double-well", "outer")) - 8.0 / 3.0) < 1e-10);
    CHECK(std::abs(separatrix_area(factor_of("pendulum")) - 16.0) < 1e-10);
    CHECK(std::abs(separatrix_area(factor_of("saddle-chart"))) < 1e-15);
}

TEST_CASE("saddle chart relative area matches F - F ln F") {
    const auto f = factor_of("saddle-chart");
    for (int m = 0; m <= 80; ++m) {
        const double F = std::pow(10.0, -m / 10.0);
        CAPTURE(F);
        CHECK(std::abs(loop_action_integral(f, F) - (F - F * std::log(F))) <= 1e-10);
    }
    // general half-width: A = -F ln F + F (1 + 2 ln eps)
    HyperbolicFactor wide = f;
    wide.epsilon = 2.0;
    const double F = 0.3;
    CHECK(std::abs(loop_action_integral(wide, F) - (-F * std::log(F) + F * (1 + 2 * std::log(2.0)))) <= 1e-10);
}

TEST_CASE("period integrals") {
    CHECK(std::abs(period_integral(factor_of("saddle-chart"), std::exp(-3.0)) - 3.0) < 1e-10);
    CHECK_THROWS_AS(period_integral(factor_of("duffing-double-well"), 0.0), DomainError);
    CHECK_THROWS_AS(loop_action_integral(factor_of("duffing-double-well"), 0.1), DomainError);
}

TEST_CASE("duffing period grows like ln(1/|f|)") {
    // T(f) = ln(1/|f|) + c + o(1). The ratio T / ln(1/|f|) drifts by the
    // constant c over any finite window, so the slope per decade is checked.
    const auto duff = factor_of("duffing-double-well");
    std::vector<double> slope;
    double prev = 0.0;
    for (int m = 4; m <= 8; ++m) {
        const double T = period_integral(duff, -std::pow(10.0, -m));
        if (m > 4) slope.push_back((T - prev) / std::log(10.0));
        prev = T;
    }
    for (double s : slope) CHECK(std::abs(s - 1.0) < 0.02);
    // the well's period is ln(16/|f|) + O(f ln f)
    for (int m = 6; m <= 8; ++m) {
        const double f = std::pow(10.0, -m);
        CHECK(std::abs(period_integral(duff, -f) - std::log(16.0 / f)) < 1e-4);
    }
}

TEST_CASE("action derivative equals the period") {
    // Below f ~ 1e-6 the difference of two O(1) actions over a step of
    // O(f h) is lost to rounding, so the grid stops there.
    for (const auto& f : geometric_factors()) {
        const auto fam = make_phase_family(f);
        auto d_level = [&](double level, double h) {
            const double up = level * std::exp(h), dn = level * std::exp(-h);
            return (loop_action_integral(*fam, up) - loop_action_integral(*fam, dn)) / (up - dn);
        };
        double sign = 0.0;
        for (int m = 1; m <= 6; ++m) {
            const double F = std::pow(10.0, -m);
            const double level = level_from_momentum(*fam, F);
            CAPTURE(to_string(f.kind));
            CAPTURE(level);
            const double h = 1e-3;
            const double d = (4 * d_level(level, h) - d_level(level, 2 * h)) / 3;
            const double T = period_integral(*fam, level);
            CHECK(std::abs(d - T) <= 1e-6 * (1 + std::abs(T)));
            const double I = loop_action_integral(*fam, level);
            CHECK(I > 0.0);
            if (m > 1) CHECK(std::signbit(I) == std::signbit(sign));
            sign = I;
        }
    }
}

TEST_CASE("saddle area: 200 points well inside the time budget") {
    const auto f = factor_of("saddle-chart");
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int m = 0; m < 200; ++m) {
        const double F = std::pow(10.0, -8.0 * m / 199.0);
        worst = std::max(worst, std::abs(loop_action_integral(f, F) - (F - F * std::log(F))));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(worst <= 1e-10);
    CHECK(secs < 5.0);
}
