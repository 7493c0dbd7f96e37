#include "kprobe/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "kprobe/asymptotics.hpp"
#include "kprobe/catalog.hpp"
#include "kprobe/config.hpp"
#include "kprobe/error.hpp"
#include "kprobe/geometry.hpp"
#include "kprobe/level_curve.hpp"
#include "kprobe/report.hpp"

namespace kprobe {

using nlohmann::json;

namespace {

void setup_logging() {
    auto logger = spdlog::get("kprobe");
    if (!logger) {
        logger = spdlog::stderr_logger_mt("kprobe");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
    }
    const char* env = std::getenv("KPROBE_LOG");
    const std::string level = env ? env : "info";
    if (level == "error")
        spdlog::set_level(spdlog::level::err);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        throw ConfigError(fmt::format("KPROBE_LOG must be error, info or debug (got '{}')", level));
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw ConfigError(fmt::format("{}: '{}' is not a number", what, item));
        v.push_back(x);
        pos = comma + 1;
    }
    return v;
}

std::string point_text(const MomentumPoint& F) { return fmt::format("({:.6g})", fmt::join(F.values, ", ")); }

// --- probe -------------------------------------------------------------------

struct ProbeArgs {
    std::string config;
    std::vector<std::string> points;
    bool dump_curves = false;
};

int cmd_probe(const ProbeArgs& a, std::ostream& out) {
    RunConfig cfg = load_config(a.config);
    if (!a.points.empty()) {
        cfg.points.clear();
        for (const auto& p : a.points) {
            auto v = parse_list(p, "--point");
            if (v.size() != cfg.model.n())
                throw ConfigError(fmt::format("--point: expected {} coordinates, got {}", cfg.model.n(), v.size()));
            cfg.points.push_back({std::move(v)});
        }
    }
    if (cfg.points.empty()) throw ConfigError("config.points: no points to probe (use 'points' or --point)");

    const ValidationReport val = validate_conditions(cfg.model, cfg.tol);
    std::vector<ActionChartSample> samples;
    for (const auto& F : cfg.points) {
        samples.push_back(det_hessian(cfg.model, F, cfg.tol));
        spdlog::debug("probed F = {}", point_text(F));
    }
    ReportWriter w(cfg.output_dir);
    emit_report(w, "probe", samples, ReportFormat::Json);
    emit_report(w, "probe", samples, ReportFormat::Csv);
    if (a.dump_curves) {
        for (std::size_t p = 0; p < cfg.points.size(); ++p)
            for (std::size_t i = 0; i < cfg.model.k(); ++i) {
                const auto& f = cfg.model.factor(i);
                if (!f.is_geometric()) continue;
                const auto fam = make_phase_family(f);
                const double level = level_from_momentum(*fam, cfg.points[p][cfg.model.singular_coordinate(i)]);
                TraceOptions o;
                o.max_step = cfg.tol.max_step;
                o.trace_tol = cfg.tol.trace_tol;
                std::ostringstream csv;
                write_level_curve_csv(trace_level_curve(*fam, level, o), csv);
                w.write(fmt::format("curve_point{}_factor{}.csv", p + 1, i + 1), csv.str());
            }
    }
    w.write_manifest();

    for (std::size_t p = 0; p < samples.size(); ++p)
        out << fmt::format("point {}: F = {}  detJ = {:.10g}  detHess = {:.10g}\n", p + 1, point_text(samples[p].F),
                           samples[p].detJ, samples[p].detHess);
    out << fmt::format("wrote {} point(s) to {}\n", samples.size(), cfg.output_dir.string());
    if (!val.all_pass()) {
        const auto f = val.first_failure();
        out << fmt::format("validation failed: {} ({})\n", f->condition, f->witness);
        return kExitNegative;
    }
    return kExitOk;
}

// --- fit-action ----------------------------------------------------------------

struct FitArgs {
    std::string config;
    int factor = 0;  // 1-based, 0 = all
};

int cmd_fit_action(const FitArgs& a, std::ostream& out) {
    const RunConfig cfg = load_config(a.config);
    std::vector<std::size_t> which;
    if (a.factor == 0) {
        for (std::size_t i = 0; i < cfg.model.k(); ++i) which.push_back(i);
    } else {
        if (a.factor < 1 || static_cast<std::size_t>(a.factor) > cfg.model.k())
            throw ConfigError(fmt::format("--factor: expected 1..{}", cfg.model.k()));
        which.push_back(static_cast<std::size_t>(a.factor - 1));
    }
    std::vector<SingularActionFit> fits;
    std::string summary = "factor  kind                 psi0        uncertainty  max_residual  oracle\n";
    for (std::size_t i : which) {
        fits.push_back(fit_singular_action(cfg.model, i, fit_grid_for(cfg, i), cfg.tol));
        const auto& fit = fits.back();
        const auto& f = cfg.model.factor(i);
        std::string oracle = "-";
        if (f.is_geometric()) oracle = fmt::format("period {:.10f}", psi0_from_period(f, 1e-11, 1e-12, cfg.tol));
        summary += fmt::format("{:<7d} {:<20s} {:<11.4f} {:<12.1e} {:<13.2e} {}\n", i + 1, to_string(f.kind),
                               fit.psi0, fit.psi0_uncertainty, fit.max_residual, oracle);
        out << fmt::format("factor {}: psi0 = {:.4f} ± {:.1e} (max residual {:.2e}, {} samples)\n", i + 1, fit.psi0,
                           fit.psi0_uncertainty, fit.max_residual, fit.num_samples);
    }
    ReportWriter w(cfg.output_dir);
    for (const auto& fit : fits) w.write(fmt::format("fit_factor{}.json", fit.factor_index + 1), dump_json(fit.to_json()));
    emit_report(w, "fit_summary", fits, ReportFormat::Csv);
    w.write("fit_summary.txt", summary);
    w.write_manifest();
    return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
    std::string config;
    std::string path_spec;
    std::optional<double> tmin, tmax;
    std::optional<int> points;
    std::optional<std::size_t> samples;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    RunConfig cfg = load_config(a.config);
    if (!a.path_spec.empty()) {
        cfg.path.direction = parse_list(a.path_spec, "--path-spec");
        if (cfg.path.direction.size() != cfg.model.k())
            throw ConfigError(fmt::format("--path-spec: expected {} entries", cfg.model.k()));
    }
    if (a.tmin) cfg.path.tmin = *a.tmin;
    if (a.tmax) cfg.path.tmax = *a.tmax;
    if (a.points) cfg.path.points = *a.points;
    if (a.samples) cfg.box.samples = *a.samples;

    const SystemModel& m = cfg.model;
    std::vector<double> dir(m.n(), 0.0);
    MomentumPoint base{std::vector<double>(m.n(), 0.0)};
    for (std::size_t c = 0; c < m.center_dim(); ++c) base[c] = cfg.path.center[c];
    for (std::size_t i = 0; i < m.k(); ++i) dir[m.singular_coordinate(i)] = cfg.path.direction[i];
    const SingularPath path = radial_path(m, base, dir, cfg.path.tmin, cfg.path.tmax, cfg.path.points);

    const ValidationReport val = validate_conditions(m, cfg.tol);
    const HessianScalingReport scaling = scaled_det_path(m, path, cfg.tol);
    const DivergenceRecord div = divergence_check(m, path, cfg.tol);
    const FrequencyDecayRecord freq = frequency_decay_check(m, path, cfg.tol);
    const KolmogorovRecord kol =
        verify_kolmogorov(m, corner_domain(m, cfg.box.lower, cfg.box.upper), cfg.box.samples, cfg.seed, cfg.tol);

    Verdict verdict = Verdict::Inconclusive;
    if (!val.all_pass())
        verdict = Verdict::HypothesisViolated;
    else if (scaling.verdict == Verdict::KolmogorovHolds && kol.verdict == Verdict::KolmogorovHolds && div.passed &&
             freq.passed)
        verdict = Verdict::KolmogorovHolds;

    const json record{{"model", model_to_json(m)},
                      {"model_source", cfg.model_source},
                      {"seed", cfg.seed},
                      {"validation", to_json(val)},
                      {"scaling", scaling.to_json()},
                      {"divergence", div.to_json()},
                      {"frequency_decay", freq.to_json()},
                      {"kolmogorov", kol.to_json()},
                      {"verdict", to_string(verdict)}};
    ReportWriter w(cfg.output_dir);
    w.write("verify.json", dump_json(record));
    emit_report(w, "scaling", scaling, ReportFormat::Csv);
    w.write_manifest();

    out << fmt::format("model {}: validation {}\n", m.label(), val.all_pass() ? "passed" : "FAILED");
    if (!val.all_pass()) {
        const auto f = val.first_failure();
        out << fmt::format("  witness: {} ({})\n", f->condition, f->witness);
    }
    out << fmt::format("scaling: g = {:.10g}, spread = {:.3g} over {} tail samples, exponents a = {:.4f} ± {:.2g}, "
                       "b = {:.4f} ± {:.2g}: {}\n",
                       scaling.g_estimate, scaling.g_spread, scaling.tail, scaling.exponents.a,
                       scaling.exponents.a_halfwidth, scaling.exponents.b, scaling.exponents.b_halfwidth,
                       to_string(scaling.verdict));
    out << fmt::format("divergence: eventually increasing = {}", div.eventually_increasing);
    for (const auto& c : div.crossings)
        out << (c.reached ? fmt::format(", |det| = {:g} at t = {:.6g}", c.threshold, c.t)
                          : fmt::format(", |det| = {:g} not reached", c.threshold));
    out << "\n";
    out << fmt::format("frequency decay: {}\n", freq.passed ? "passed" : "failed");
    out << fmt::format("kolmogorov: {} samples, {}: {}\n", kol.samples, to_string(kol.verdict), kol.witness);
    out << fmt::format("verdict: {}\n", to_string(verdict));
    return verdict == Verdict::KolmogorovHolds ? kExitOk : kExitNegative;
}

int cmd_models_list(std::ostream& out) {
    for (const auto& e : model_catalog()) out << fmt::format("{:<24s} {}\n", e.name, e.description);
    return kExitOk;
}

int cmd_models_show(const std::string& name, std::ostream& out) {
    out << dump_json(catalog_entry(name).spec);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"kprobe: Hessian determinant of H in actions near hyperbolic singularities", "kprobe"};
    app.require_subcommand(1);

    ProbeArgs probe;
    auto* p = app.add_subcommand("probe", "evaluate detHess and the action chart at points");
    p->add_option("--config", probe.config, "run config JSON")->required();
    p->add_option("--point", probe.points, "point f1,f2,... (repeatable; replaces config points)");
    p->add_flag("--dump-curves", probe.dump_curves, "also write traced level curves of the geometric factors");

    FitArgs fit;
    auto* f = app.add_subcommand("fit-action", "fit I = psi F ln F + phi for the singular actions");
    f->add_option("--config", fit.config, "run config JSON")->required();
    f->add_option("--factor", fit.factor, "factor index, 1-based (default: all)");

    VerifyArgs ver;
    auto* v = app.add_subcommand("verify", "scaling law, divergence, frequency decay and box verdict");
    v->add_option("--config", ver.config, "run config JSON")->required();
    v->add_option("--path-spec", ver.path_spec, "singular directions c1,c2,...");
    v->add_option("--tmin", ver.tmin);
    v->add_option("--tmax", ver.tmax);
    v->add_option("--points", ver.points, "path samples");
    v->add_option("--samples", ver.samples, "box samples for the verdict");

    std::string show_name;
    auto* models = app.add_subcommand("models", "built-in model catalog");
    models->require_subcommand(1);
    auto* list = models->add_subcommand("list", "list catalog models");
    auto* show = models->add_subcommand("show", "print a catalog model as JSON");
    show->add_option("name", show_name)->required();

    std::vector<const char*> argv{"kprobe"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        setup_logging();
        if (p->parsed()) return cmd_probe(probe, out);
        if (f->parsed()) return cmd_fit_action(fit, out);
        if (v->parsed()) return cmd_verify(ver, out);
        if (list->parsed()) return cmd_models_list(out);
        if (show->parsed()) return cmd_models_show(show_name, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}

}  // namespace kprobe
