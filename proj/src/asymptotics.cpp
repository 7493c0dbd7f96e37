#include "kprobe/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "kprobe/error.hpp"

namespace kprobe {

using nlohmann::json;

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::KolmogorovHolds: return "kolmogorov-holds";
        case Verdict::HypothesisViolated: return "hypothesis-violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

json to_json(const ValidationReport& v) {
    auto one = [](const ConditionCheck& c) {
        json j{{"condition", c.condition}, {"pass", c.pass}, {"vacuous", c.vacuous}, {"value", c.value},
               {"witness", c.witness}};
        j["factor"] = c.factor ? json(*c.factor + 1) : json(nullptr);
        return j;
    };
    json c3 = json::array(), c5 = json::array();
    for (const auto& c : v.cond3) c3.push_back(one(c));
    for (const auto& c : v.cond5) c5.push_back(one(c));
    return {{"all_pass", v.all_pass()}, {"cond3", c3}, {"cond4", one(v.cond4)}, {"cond5", c5}};
}

// ---------------------------------------------------------------------------

MomentumPoint SingularPath::at(double tv) const {
    MomentumPoint F = base;
    for (std::size_t j = 0; j < F.size(); ++j) F[j] += direction[j] * tv;
    return F;
}

json SingularPath::to_json() const {
    return {{"base", base.values}, {"direction", direction}, {"t", t}};
}

SingularPath radial_path(const SystemModel& model, MomentumPoint base, std::vector<double> direction, double t_min,
                         double t_max, int points) {
    const std::size_t n = model.n();
    if (base.size() != n || direction.size() != n)
        throw ConfigError(fmt::format("path base and direction need {} entries", n));
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(base[j]) || !std::isfinite(direction[j])) throw ConfigError("path entries must be finite");
        if (model.is_singular_coordinate(j)) {
            if (base[j] != 0.0) throw ConfigError(fmt::format("path base must have F{} = 0", j + 1));
            if (!(direction[j] > 0.0)) throw ConfigError(fmt::format("path direction for F{} must be > 0", j + 1));
        }
    }
    if (!(t_min > 0.0) || !(t_max > t_min)) throw ConfigError("path needs 0 < tmin < tmax");
    if (points < 2) throw ConfigError("path needs at least 2 points");
    SingularPath p{std::move(base), std::move(direction), {}};
    const double a = std::log(t_max), b = std::log(t_min);
    for (int m = 0; m < points; ++m)
        p.t.push_back(m == 0 ? t_max : m == points - 1 ? t_min : std::exp(a + (b - a) * m / (points - 1)));
    return p;
}

SingularPath radial_path(const SystemModel& model, const std::vector<double>& singular_direction, double t_min,
                         double t_max, int points) {
    if (singular_direction.size() != model.k())
        throw ConfigError(fmt::format("path spec needs {} singular directions", model.k()));
    std::vector<double> dir(model.n(), 0.0);
    for (std::size_t i = 0; i < model.k(); ++i) dir[model.singular_coordinate(i)] = singular_direction[i];
    return radial_path(model, MomentumPoint{std::vector<double>(model.n(), 0.0)}, std::move(dir), t_min, t_max,
                       points);
}

namespace {

void check_path(const SystemModel& model, const SingularPath& path, const Tolerances& tol) {
    if (path.base.size() != model.n() || path.direction.size() != model.n())
        throw ConfigError("path dimension does not match the model");
    if (path.t.size() < 2) throw ConfigError("path needs at least 2 samples");
    for (std::size_t m = 0; m < path.t.size(); ++m) {
        if (!(path.t[m] > 0.0)) throw ConfigError("path samples must be positive");
        if (m > 0 && !(path.t[m] < path.t[m - 1])) throw ConfigError("path samples must be strictly decreasing");
    }
    const MomentumPoint last = path.at(path.t.back());
    for (std::size_t i = 0; i < model.k(); ++i) {
        const std::size_t s = model.singular_coordinate(i);
        if (!(last[s] >= tol.F_floor))
            throw DomainError(fmt::format("path reaches F{} = {:.3g}, below F_floor = {:.3g}", s + 1, last[s],
                                          tol.F_floor));
    }
}

double singular_scale(const SystemModel& model, const MomentumPoint& F) {
    double s = 1.0;
    for (std::size_t i = 0; i < model.k(); ++i) {
        const double f = F[model.singular_coordinate(i)];
        s *= f * std::pow(std::log(f), 3);
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

double aitken_limit(const std::vector<double>& x) {
    if (x.empty()) throw ConfigError("aitken_limit of an empty sequence");
    const std::size_t n = x.size();
    if (n < 3) return x.back();
    const double x0 = x[n - 3], x1 = x[n - 2], x2 = x[n - 1];
    const double d1 = x1 - x0, d2 = x2 - x1;
    if (std::abs(d2) <= 1e-13 * std::abs(x2)) return x2;
    const double den = d2 - d1;
    if (den == 0.0) return x2;
    const double acc = x2 - d2 * d2 / den;
    // an accelerated value further out than the whole observed variation is
    // not trusted
    double range = 0.0;
    for (double v : x) range = std::max(range, std::abs(v - x2));
    if (!std::isfinite(acc) || std::abs(acc - x2) > range) return x2;
    return acc;
}

std::vector<double> running_limits(const std::vector<double>& x) {
    std::vector<double> out;
    std::vector<double> prefix;
    for (double v : x) {
        prefix.push_back(v);
        out.push_back(aitken_limit(prefix));
    }
    return out;
}

std::size_t tail_length(std::size_t n) { return std::min(n, std::max<std::size_t>(10, n / 4)); }

double tail_spread(const std::vector<double>& x, double limit, std::size_t tail) {
    tail = std::min(tail, x.size());
    double worst = 0.0;
    for (std::size_t m = x.size() - tail; m < x.size(); ++m) worst = std::max(worst, std::abs(x[m] - limit));
    if (limit == 0.0) return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return worst / std::abs(limit);
}

bool tail_monotone(const std::vector<double>& x, std::size_t tail) {
    tail = std::min(tail, x.size());
    int dir = 0;
    for (std::size_t m = x.size() - tail + 1; m < x.size(); ++m) {
        const double a = std::abs(x[m - 1]), b = std::abs(x[m]);
        if (std::abs(b - a) <= 1e-7 * std::max(a, b)) continue;
        const int d = b > a ? 1 : -1;
        if (dir != 0 && d != dir) return false;
        dir = d;
    }
    return true;
}

SequenceSummary summarize(std::vector<double> values) {
    SequenceSummary s;
    s.values = std::move(values);
    s.tail = tail_length(s.values.size());
    const std::vector<double> tail(s.values.end() - static_cast<std::ptrdiff_t>(s.tail), s.values.end());
    s.limit = aitken_limit(tail);
    s.spread = tail_spread(s.values, s.limit, s.tail);
    s.monotone = tail_monotone(s.values, s.tail);
    return s;
}

json ExponentFit::to_json() const {
    return {{"a", a}, {"b", b}, {"constant", constant}, {"a_halfwidth", a_halfwidth}, {"b_halfwidth", b_halfwidth}};
}

ExponentFit fit_exponents(const std::vector<double>& abs_det, const std::vector<double>& sum_log_F,
                          const std::vector<double>& sum_loglog_F) {
    std::vector<std::size_t> rows;
    for (std::size_t m = 0; m < abs_det.size(); ++m)
        if (abs_det[m] > 0.0 && std::isfinite(std::log(abs_det[m])) && std::isfinite(sum_log_F[m]) &&
            std::isfinite(sum_loglog_F[m]))
            rows.push_back(m);
    ExponentFit fit;
    if (rows.size() < 3) {
        fit.a = fit.b = fit.constant = std::numeric_limits<double>::quiet_NaN();
        fit.a_halfwidth = fit.b_halfwidth = std::numeric_limits<double>::infinity();
        return fit;
    }
    const auto N = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd X(N, 3);
    Eigen::VectorXd y(N);
    for (Eigen::Index r = 0; r < N; ++r) {
        const std::size_t m = rows[r];
        X(r, 0) = 1.0;
        X(r, 1) = -sum_log_F[m];
        X(r, 2) = -sum_loglog_F[m];
        y(r) = std::log(abs_det[m]);
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    fit.constant = beta(0);
    fit.a = beta(1);
    fit.b = beta(2);
    if (N > 3) {
        const double rss = (X * beta - y).squaredNorm();
        const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (rss / static_cast<double>(N - 3));
        fit.a_halfwidth = 1.96 * std::sqrt(std::max(0.0, cov(1, 1)));
        fit.b_halfwidth = 1.96 * std::sqrt(std::max(0.0, cov(2, 2)));
    } else {
        fit.a_halfwidth = fit.b_halfwidth = std::numeric_limits<double>::infinity();
    }
    return fit;
}

// ---------------------------------------------------------------------------

json HessianScalingReport::to_json() const {
    json F_rows = json::array();
    for (const auto& p : F) F_rows.push_back(p.values);
    return {{"path", path.to_json()},
            {"F", F_rows},
            {"raw_det", raw_det},
            {"scaled", scaled},
            {"running_g", running_g},
            {"g_estimate", g_estimate},
            {"g_spread", g_spread},
            {"tail", tail},
            {"tail_monotone", tail_monotone},
            {"exponents", exponents.to_json()},
            {"verdict", to_string(verdict)},
            {"validation", kprobe::to_json(validation)},
            {"note", note}};
}

HessianScalingReport scaled_det_path(const SystemModel& model, const SingularPath& path, const Tolerances& tol) {
    check_path(model, path, tol);
    HessianScalingReport r;
    r.path = path;
    r.validation = validate_conditions(model, tol);
    std::vector<double> slog, sloglog;
    for (double tv : path.t) {
        const MomentumPoint F = path.at(tv);
        const ActionChartSample smp = det_hessian(model, F, tol);
        r.F.push_back(F);
        r.raw_det.push_back(smp.detHess);
        r.scaled.push_back(smp.detHess * singular_scale(model, F));
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < model.k(); ++i) {
            const double f = F[model.singular_coordinate(i)];
            a += std::log(f);
            b += std::log(std::abs(std::log(f)));
        }
        slog.push_back(a);
        sloglog.push_back(b);
        spdlog::debug("t = {:.6g}: detHess = {:.17g}, scaled = {:.17g}", tv, smp.detHess, r.scaled.back());
    }
    r.running_g = running_limits(r.scaled);
    const SequenceSummary s = summarize(r.scaled);
    r.g_estimate = s.limit;
    r.g_spread = s.spread;
    r.tail = s.tail;
    r.tail_monotone = s.monotone;
    std::vector<double> absdet;
    for (double d : r.raw_det) absdet.push_back(std::abs(d));
    r.exponents = fit_exponents(absdet, slog, sloglog);

    if (!r.validation.all_pass()) {
        r.verdict = Verdict::HypothesisViolated;
        r.note = fmt::format("{} fails: {}", r.validation.first_failure()->condition,
                             r.validation.first_failure()->witness);
    } else if (r.tail < 10) {
        r.verdict = Verdict::Inconclusive;
        r.note = fmt::format("only {} tail samples; at least 10 are needed", r.tail);
    } else if (!(std::abs(r.g_estimate) > tol.tol_nonzero)) {
        r.verdict = Verdict::Inconclusive;
        r.note = "g estimate is not bounded away from 0";
    } else if (r.g_spread > tol.g_tol) {
        r.verdict = Verdict::Inconclusive;
        r.note = fmt::format("tail spread {:.3g} exceeds g_tol {:.3g}", r.g_spread, tol.g_tol);
    } else if (!r.tail_monotone) {
        r.verdict = Verdict::Inconclusive;
        r.note = "|scaled| tail is not monotone";
    } else {
        r.verdict = Verdict::KolmogorovHolds;
        r.note = "scaled determinant stabilizes at a nonzero limit (Cauchy criterion on the sampled tail)";
    }
    return r;
}

// ---------------------------------------------------------------------------

json DivergenceRecord::to_json() const {
    json c = json::array();
    for (const auto& x : crossings)
        c.push_back({{"threshold", x.threshold}, {"reached", x.reached}, {"t", x.reached ? json(x.t) : json(nullptr)}});
    return {{"t", t}, {"abs_det", abs_det}, {"eventually_increasing", eventually_increasing}, {"crossings", c},
            {"passed", passed}};
}

DivergenceRecord divergence_check(const SystemModel& model, const SingularPath& path, const Tolerances& tol,
                                  const std::vector<double>& thresholds) {
    check_path(model, path, tol);
    DivergenceRecord r;
    r.t = path.t;
    auto absdet = [&](double tv) { return std::abs(det_hessian(model, path.at(tv), tol).detHess); };
    for (double tv : path.t) r.abs_det.push_back(absdet(tv));

    const std::size_t n = r.abs_det.size();
    r.eventually_increasing = true;
    for (std::size_t m = n / 2 + 1; m < n; ++m)
        if (!(r.abs_det[m] > r.abs_det[m - 1])) r.eventually_increasing = false;

    for (double thr : thresholds) {
        ThresholdCrossing c{thr};
        for (std::size_t m = 1; m < n && !c.reached; ++m) {
            if (r.abs_det[m - 1] < thr && r.abs_det[m] >= thr) {
                // bisection in ln t
                double hi = std::log(path.t[m - 1]), lo = std::log(path.t[m]);
                for (int it = 0; it < 60 && hi - lo > 1e-12 * std::abs(lo); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (absdet(std::exp(mid)) >= thr ? lo : hi) = mid;
                }
                c.reached = true;
                c.t = std::exp(0.5 * (lo + hi));
            }
        }
        if (!c.reached && !r.abs_det.empty() && r.abs_det.front() >= thr) {
            c.reached = true;
            c.t = path.t.front();
        }
        r.crossings.push_back(c);
    }
    r.passed = r.eventually_increasing;
    return r;
}

// ---------------------------------------------------------------------------

json NamedSequence::to_json() const {
    return {{"name", name},
            {"factor", factor ? json(*factor + 1) : json(nullptr)},
            {"values", summary.values},
            {"limit", summary.limit},
            {"spread", summary.spread},
            {"tail", summary.tail},
            {"passed", passed}};
}

namespace {

json sequences_json(const std::vector<NamedSequence>& v) {
    json a = json::array();
    for (const auto& s : v) a.push_back(s.to_json());
    return a;
}

NamedSequence stabilized(std::string name, std::optional<std::size_t> factor, std::vector<double> values,
                         const Tolerances& tol) {
    NamedSequence s{std::move(name), factor, summarize(std::move(values))};
    s.passed = std::abs(s.summary.limit) > tol.tol_nonzero && s.summary.spread <= tol.g_tol;
    return s;
}

}  // namespace

json FrequencyDecayRecord::to_json() const {
    return {{"singular", sequences_json(singular)}, {"center", sequences_json(center)}, {"passed", passed}};
}

FrequencyDecayRecord frequency_decay_check(const SystemModel& model, const SingularPath& path, const Tolerances& tol) {
    check_path(model, path, tol);
    std::vector<std::vector<double>> sing(model.k()), cent(model.center_dim());
    for (double tv : path.t) {
        const MomentumPoint F = path.at(tv);
        const Eigen::VectorXd g = frequency_map(model, F, tol);
        for (std::size_t i = 0; i < model.k(); ++i) {
            const std::size_t s = model.singular_coordinate(i);
            sing[i].push_back(g(s) * std::log(F[s]));
        }
        for (std::size_t c = 0; c < model.center_dim(); ++c) cent[c].push_back(g(c));
    }
    FrequencyDecayRecord r;
    r.passed = true;
    for (std::size_t i = 0; i < model.k(); ++i) {
        r.singular.push_back(stabilized(fmt::format("Gamma_{} ln F_{}", model.singular_coordinate(i) + 1,
                                                    model.singular_coordinate(i) + 1),
                                        i, std::move(sing[i]), tol));
        r.passed = r.passed && r.singular.back().passed;
    }
    // center frequencies converge to those of the center manifold, dH/dF_t at
    // the limit point; compared on an absolute scale since they may vanish
    const Eigen::VectorXd limit_grad = model.hamiltonian().gradient(path.base.span());
    for (std::size_t c = 0; c < model.center_dim(); ++c) {
        NamedSequence s{fmt::format("Gamma_{}", c + 1), std::nullopt, summarize(std::move(cent[c]))};
        const double ref = limit_grad(c);
        double worst = 0.0;
        for (std::size_t m = s.summary.values.size() - s.summary.tail; m < s.summary.values.size(); ++m)
            worst = std::max(worst, std::abs(s.summary.values[m] - ref));
        s.summary.limit = ref;
        s.summary.spread = worst / std::max(1.0, std::abs(ref));
        s.passed = s.summary.spread <= tol.g_tol;
        r.passed = r.passed && s.passed;
        r.center.push_back(std::move(s));
    }
    return r;
}

json BlockAsymptoticsRecord::to_json() const { return {{"sequences", sequences_json(sequences)}, {"passed", passed}}; }

BlockAsymptoticsRecord block_asymptotics(const SystemModel& model, const SingularPath& path, const Tolerances& tol) {
    check_path(model, path, tol);
    const std::size_t k = model.k();
    std::vector<std::vector<double>> dI(k), gam(k), dgam(k);
    std::vector<double> detj;
    for (double tv : path.t) {
        const MomentumPoint F = path.at(tv);
        const ActionChartSample smp = det_hessian(model, F, tol);
        double prod = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t s = model.singular_coordinate(i);
            const double L = std::log(F[s]);
            prod *= L;
            dI[i].push_back(smp.J(s, s) / L);
            gam[i].push_back(smp.Gamma(s) * L);
            dgam[i].push_back(smp.dGamma_dF(s, s) * F[s] * L * L);
        }
        detj.push_back(smp.detJ / prod);
    }
    BlockAsymptoticsRecord r;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t s = model.singular_coordinate(i) + 1;
        r.sequences.push_back(stabilized(fmt::format("(dI_{0}/dF_{0}) / ln F_{0}", s), i, std::move(dI[i]), tol));
    }
    r.sequences.push_back(stabilized("detJ / prod ln F", std::nullopt, std::move(detj), tol));
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t s = model.singular_coordinate(i) + 1;
        r.sequences.push_back(stabilized(fmt::format("Gamma_{0} ln F_{0}", s), i, std::move(gam[i]), tol));
    }
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t s = model.singular_coordinate(i) + 1;
        r.sequences.push_back(
            stabilized(fmt::format("dGamma_{0}/dF_{0} F_{0} (ln F_{0})^2", s), i, std::move(dgam[i]), tol));
    }
    r.passed = std::all_of(r.sequences.begin(), r.sequences.end(), [](const NamedSequence& s) { return s.passed; });
    return r;
}

// ---------------------------------------------------------------------------

json KolmogorovRecord::to_json() const {
    json fails = json::array();
    for (const auto& p : failure_points) fails.push_back(p.values);
    return {{"validation", kprobe::to_json(validation)},
            {"samples", samples},
            {"min_abs_det", min_abs_det},
            {"argmin", argmin.values},
            {"failures", failures},
            {"failure_points", fails},
            {"verdict", to_string(verdict)},
            {"witness", witness}};
}

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += static_cast<double>(i % base) * f;
        i /= base;
        f *= inv;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::vector<MomentumPoint> box_samples(const SystemModel& model, const CornerDomain& box, std::size_t count,
                                       std::uint64_t seed, const Tolerances& tol) {
    const std::size_t n = model.n();
    if (box.n() != n) throw ConfigError("box dimension does not match the model");
    if (n > std::size(kPrimes)) throw ConfigError("too many coordinates for the Halton sequence");
    std::vector<double> lo(box.lower()), hi(box.upper());
    for (std::size_t j = 0; j < n; ++j)
        if (model.is_singular_coordinate(j)) {
            lo[j] = std::max(lo[j], tol.F_floor);
            if (!(hi[j] >= lo[j])) throw DomainError(fmt::format("box for F{} lies below F_floor", j + 1));
        }
    auto place = [&](std::size_t j, double u) {
        if (model.is_singular_coordinate(j)) return std::exp(std::log(lo[j]) + u * (std::log(hi[j]) - std::log(lo[j])));
        return lo[j] + u * (hi[j] - lo[j]);
    };

    std::vector<MomentumPoint> pts;
    // anchors: center, then corners
    MomentumPoint c{std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) c[j] = place(j, 0.5);
    pts.push_back(c);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        MomentumPoint p{std::vector<double>(n)};
        for (std::size_t j = 0; j < n; ++j) p[j] = (mask >> j) & 1 ? hi[j] : lo[j];
        pts.push_back(p);
    }

    std::mt19937_64 rng(seed);
    std::vector<double> shift(n);
    for (auto& s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    for (std::size_t m = 1; m <= count; ++m) {
        MomentumPoint p{std::vector<double>(n)};
        for (std::size_t j = 0; j < n; ++j) {
            double u = radical_inverse(m, kPrimes[j]) + shift[j];
            u -= std::floor(u);
            p[j] = place(j, u);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

KolmogorovRecord verify_kolmogorov(const SystemModel& model, const CornerDomain& box, std::size_t samples,
                                   std::uint64_t seed, const Tolerances& tol) {
    if (samples < 100) throw ConfigError("verify_kolmogorov needs at least 100 samples");
    KolmogorovRecord r;
    r.validation = validate_conditions(model, tol);
    const auto pts = box_samples(model, box, samples, seed, tol);
    r.samples = pts.size();
    r.min_abs_det = std::numeric_limits<double>::infinity();
    for (const auto& F : pts) {
        const double d = std::abs(det_hessian(model, F, tol).detHess);
        if (d < r.min_abs_det) {
            r.min_abs_det = d;
            r.argmin = F;
        }
        if (!(d > tol.tol_nonzero)) {
            ++r.failures;
            if (r.failure_points.size() < 10) r.failure_points.push_back(F);
        }
    }
    if (!r.validation.all_pass()) {
        r.verdict = Verdict::HypothesisViolated;
        const auto f = r.validation.first_failure();
        r.witness = fmt::format("{} fails ({}); min |detHess| = {:.3g} at F = ({})", f->condition, f->witness,
                                r.min_abs_det, fmt::join(r.argmin.values, ", "));
    } else if (r.failures == 0) {
        r.verdict = Verdict::KolmogorovHolds;
        r.witness = fmt::format("min |detHess| = {:.17g} at F = ({})", r.min_abs_det, fmt::join(r.argmin.values, ", "));
    } else {
        r.verdict = Verdict::Inconclusive;
        r.witness = fmt::format("{} samples with |detHess| <= tol_nonzero; first at F = ({})", r.failures,
                                fmt::join(r.failure_points.front().values, ", "));
    }
    return r;
}

}  // namespace kprobe
