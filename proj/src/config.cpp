#include "kprobe/config.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "kprobe/catalog.hpp"
#include "kprobe/error.hpp"

namespace kprobe {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
    for (const auto& [key, _] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(fmt::format("{}: unknown field '{}'", where, key));
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
    return j.get<double>();
}

double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) throw ConfigError(fmt::format("{}: must be positive", where));
    return v;
}

long long integer(const json& j, const std::string& where, long long min) {
    if (!j.is_number_integer() || j.get<long long>() < min)
        throw ConfigError(fmt::format("{}: expected an integer >= {}", where, min));
    return j.get<long long>();
}

std::vector<double> numbers(const json& j, const std::string& where, std::size_t expected) {
    if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array", where));
    if (j.size() != expected)
        throw ConfigError(fmt::format("{}: expected {} entries, got {}", where, expected, j.size()));
    std::vector<double> v;
    for (std::size_t m = 0; m < j.size(); ++m) v.push_back(number(j[m], fmt::format("{}[{}]", where, m)));
    return v;
}

json read_json_file(const std::filesystem::path& file, const std::string& what) {
    std::ifstream in(file);
    if (!in) throw ConfigError(fmt::format("{}: cannot open {}", what, file.string()));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {} is not valid JSON ({})", what, file.string(), e.what()));
    }
}

SystemModel resolve_model(const json& j, const std::filesystem::path& base_dir, std::string& source) {
    const int given = static_cast<int>(j.contains("model")) + static_cast<int>(j.contains("model_file")) +
                      static_cast<int>(j.contains("catalog_model"));
    if (given == 0) throw ConfigError("config: one of 'model', 'model_file' or 'catalog_model' is required");
    if (given > 1) throw ConfigError("config: give only one of 'model', 'model_file' and 'catalog_model'");
    if (j.contains("model")) {
        source = "inline";
        return build_model(j["model"]);
    }
    if (j.contains("model_file")) {
        if (!j["model_file"].is_string()) throw ConfigError("config.model_file: expected a string");
        const std::filesystem::path p = base_dir / j["model_file"].get<std::string>();
        source = "file:" + j["model_file"].get<std::string>();
        return build_model(read_json_file(p, "config.model_file"));
    }
    if (!j["catalog_model"].is_string()) throw ConfigError("config.catalog_model: expected a string");
    const std::string name = j["catalog_model"].get<std::string>();
    source = "catalog:" + name;
    try {
        return catalog_model(name);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("config.catalog_model: {}", e.what()));
    }
}

}  // namespace

Tolerances parse_tolerances(const json& j, Tolerances t) {
    reject_unknown(j, {"tol_nonzero", "g_tol", "fit_tol", "h_u", "h_rel", "F_floor", "action_tol", "trace_tol",
                       "max_step", "cross_tol", "sym_tol"},
                   "config.tolerances");
    auto set = [&](const char* key, double& field) {
        if (j.contains(key)) field = positive(j[key], fmt::format("config.tolerances.{}", key));
    };
    set("tol_nonzero", t.tol_nonzero);
    set("g_tol", t.g_tol);
    set("fit_tol", t.fit_tol);
    set("h_u", t.h_u);
    set("h_rel", t.h_rel);
    set("F_floor", t.F_floor);
    set("action_tol", t.action_tol);
    set("trace_tol", t.trace_tol);
    set("max_step", t.max_step);
    set("cross_tol", t.cross_tol);
    set("sym_tol", t.sym_tol);
    return t;
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    reject_unknown(j, {"schema_version", "model", "model_file", "catalog_model", "points", "output_dir", "seed",
                       "tolerances", "fit", "path", "box"},
                   "config");
    if (!j.contains("schema_version")) throw ConfigError("config: missing field 'schema_version'");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<long long>() != kConfigSchemaVersion)
        throw ConfigError(fmt::format("config.schema_version: only version {} is supported", kConfigSchemaVersion));

    std::string source;
    RunConfig cfg{resolve_model(j, base_dir, source)};
    cfg.model_source = source;
    const SystemModel& m = cfg.model;
    const std::size_t n = m.n(), k = m.k();

    if (j.contains("points")) {
        const json& pts = j["points"];
        if (!pts.is_array()) throw ConfigError("config.points: expected an array of points");
        for (std::size_t p = 0; p < pts.size(); ++p)
            cfg.points.push_back({numbers(pts[p], fmt::format("config.points[{}]", p), n)});
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string() || j["output_dir"].get<std::string>().empty())
            throw ConfigError("config.output_dir: expected a non-empty string");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
    if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(integer(j["seed"], "config.seed", 0));
    if (j.contains("tolerances")) cfg.tol = parse_tolerances(j["tolerances"]);

    if (j.contains("fit")) {
        const json& f = j["fit"];
        reject_unknown(f, {"singular_range", "points_per_decade", "degree", "center", "half_width", "counts"},
                       "config.fit");
        if (f.contains("singular_range")) {
            const auto r = numbers(f["singular_range"], "config.fit.singular_range", 2);
            if (!(r[0] > 0.0 && r[1] > r[0])) throw ConfigError("config.fit.singular_range: need 0 < lo < hi");
        }
        if (f.contains("points_per_decade")) integer(f["points_per_decade"], "config.fit.points_per_decade", 1);
        if (f.contains("degree")) integer(f["degree"], "config.fit.degree", 0);
        if (f.contains("center")) numbers(f["center"], "config.fit.center", n);
        if (f.contains("half_width")) numbers(f["half_width"], "config.fit.half_width", n);
        if (f.contains("counts")) {
            const auto c = numbers(f["counts"], "config.fit.counts", n);
            for (std::size_t q = 0; q < n; ++q) integer(f["counts"][q], fmt::format("config.fit.counts[{}]", q), 1);
        }
        cfg.fit = f;
    }

    cfg.path.direction.assign(k, 1.0);
    cfg.path.center.assign(m.center_dim(), 0.0);
    if (j.contains("path")) {
        const json& p = j["path"];
        reject_unknown(p, {"direction", "center", "tmin", "tmax", "points"}, "config.path");
        if (p.contains("direction")) {
            cfg.path.direction = numbers(p["direction"], "config.path.direction", k);
            for (double c : cfg.path.direction)
                if (!(c > 0.0)) throw ConfigError("config.path.direction: entries must be positive");
        }
        if (p.contains("center")) cfg.path.center = numbers(p["center"], "config.path.center", m.center_dim());
        if (p.contains("tmin")) cfg.path.tmin = positive(p["tmin"], "config.path.tmin");
        if (p.contains("tmax")) cfg.path.tmax = positive(p["tmax"], "config.path.tmax");
        if (p.contains("points")) cfg.path.points = static_cast<int>(integer(p["points"], "config.path.points", 2));
        if (!(cfg.path.tmin < cfg.path.tmax)) throw ConfigError("config.path: tmin must be below tmax");
    }

    cfg.box.lower.assign(n, -0.1);
    cfg.box.upper.assign(n, 0.1);
    for (std::size_t i = 0; i < k; ++i) {
        cfg.box.lower[m.singular_coordinate(i)] = 1e-6;
        cfg.box.upper[m.singular_coordinate(i)] = 1e-2;
    }
    if (j.contains("box")) {
        const json& b = j["box"];
        reject_unknown(b, {"lower", "upper", "samples"}, "config.box");
        if (b.contains("lower")) cfg.box.lower = numbers(b["lower"], "config.box.lower", n);
        if (b.contains("upper")) cfg.box.upper = numbers(b["upper"], "config.box.upper", n);
        if (b.contains("samples"))
            cfg.box.samples = static_cast<std::size_t>(integer(b["samples"], "config.box.samples", 100));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    return parse_config(read_json_file(file, "config"), file.parent_path().empty() ? "." : file.parent_path());
}

FitGrid fit_grid_for(const RunConfig& cfg, std::size_t i) {
    FitGrid g = default_fit_grid(cfg.model, i);
    const json& f = cfg.fit;
    if (f.contains("singular_range")) {
        g.sing_lo = f["singular_range"][0].get<double>();
        g.sing_hi = f["singular_range"][1].get<double>();
    }
    if (f.contains("points_per_decade")) g.per_decade = f["points_per_decade"].get<int>();
    if (f.contains("degree")) g.degree = f["degree"].get<int>();
    if (f.contains("center")) {
        g.center = f["center"].get<std::vector<double>>();
        g.center[cfg.model.singular_coordinate(i)] = 0.0;
    }
    if (f.contains("half_width")) g.half_width = f["half_width"].get<std::vector<double>>();
    if (f.contains("counts")) g.counts = f["counts"].get<std::vector<int>>();
    return g;
}

}  // namespace kprobe
