#include "kprobe/report.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include "kprobe/error.hpp"

namespace kprobe {

using nlohmann::json;

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

ReportWriter::ReportWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw ConfigError(fmt::format("output_dir {} is not writable: {}", dir_.string(), ec.message()));
}

std::filesystem::path ReportWriter::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
    Entry e{name, sha256_hex(content), content.size()};
    if (it == entries_.end())
        entries_.push_back(std::move(e));
    else
        *it = std::move(e);
    return path;
}

std::filesystem::path ReportWriter::write_manifest() {
    std::vector<Entry> sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
    json arts = json::array();
    for (const auto& e : sorted) arts.push_back({{"file", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    const std::string content = dump_json({{"schema_version", 1}, {"artifacts", arts}});
    const auto path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    return path;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

namespace {

std::string join_row(const std::vector<std::string>& cells) { return fmt::format("{}\n", fmt::join(cells, ",")); }

void numbered(std::vector<std::string>& header, const char* prefix, std::size_t n) {
    for (std::size_t j = 1; j <= n; ++j) header.push_back(fmt::format("{}{}", prefix, j));
}

}  // namespace

std::string samples_csv(const std::vector<ActionChartSample>& samples) {
    if (samples.empty()) throw ConfigError("emit_report: empty record set");
    const std::size_t n = samples.front().F.size();
    std::vector<std::string> h;
    numbered(h, "F", n);
    numbered(h, "I", n);
    h.push_back("detJ");
    numbered(h, "Gamma", n);
    h.push_back("detHess");
    std::string out = join_row(h);
    for (const auto& s : samples) {
        std::vector<std::string> r;
        for (double v : s.F.values) r.push_back(format_double(v));
        for (double v : s.I.values) r.push_back(format_double(v));
        r.push_back(format_double(s.detJ));
        for (Eigen::Index j = 0; j < s.Gamma.size(); ++j) r.push_back(format_double(s.Gamma(j)));
        r.push_back(format_double(s.detHess));
        out += join_row(r);
    }
    return out;
}

std::string scaling_csv(const HessianScalingReport& report) {
    if (report.path.t.empty()) throw ConfigError("emit_report: empty record set");
    std::vector<std::string> h{"t"};
    numbered(h, "F", report.path.base.size());
    h.insert(h.end(), {"detHess", "scaled", "running_g"});
    std::string out = join_row(h);
    for (std::size_t m = 0; m < report.path.t.size(); ++m) {
        std::vector<std::string> r{format_double(report.path.t[m])};
        for (double v : report.F[m].values) r.push_back(format_double(v));
        r.push_back(format_double(report.raw_det[m]));
        r.push_back(format_double(report.scaled[m]));
        r.push_back(format_double(report.running_g[m]));
        out += join_row(r);
    }
    return out;
}

std::string fits_csv(const std::vector<SingularActionFit>& fits) {
    if (fits.empty()) throw ConfigError("emit_report: empty record set");
    std::string out = "factor,psi0,psi0_uncertainty,max_residual,scale,condition_number,num_samples\n";
    for (const auto& f : fits)
        out += join_row({std::to_string(f.factor_index + 1), format_double(f.psi0), format_double(f.psi0_uncertainty),
                         format_double(f.max_residual), format_double(f.scale), format_double(f.condition_number),
                         std::to_string(f.num_samples)});
    return out;
}

std::filesystem::path emit_report(ReportWriter& writer, const std::string& stem,
                                  const std::vector<ActionChartSample>& records, ReportFormat format) {
    if (records.empty()) throw ConfigError("emit_report: empty record set");
    if (format == ReportFormat::Csv) return writer.write(stem + ".csv", samples_csv(records));
    json arr = json::array();
    for (const auto& r : records) arr.push_back(r.to_json());
    return writer.write(stem + ".json", dump_json(arr));
}

std::filesystem::path emit_report(ReportWriter& writer, const std::string& stem, const HessianScalingReport& report,
                                  ReportFormat format) {
    if (report.path.t.empty()) throw ConfigError("emit_report: empty record set");
    if (format == ReportFormat::Csv) return writer.write(stem + ".csv", scaling_csv(report));
    return writer.write(stem + ".json", dump_json(report.to_json()));
}

std::filesystem::path emit_report(ReportWriter& writer, const std::string& stem,
                                  const std::vector<SingularActionFit>& records, ReportFormat format) {
    if (records.empty()) throw ConfigError("emit_report: empty record set");
    if (format == ReportFormat::Csv) return writer.write(stem + ".csv", fits_csv(records));
    json arr = json::array();
    for (const auto& r : records) arr.push_back(r.to_json());
    return writer.write(stem + ".json", dump_json(arr));
}

}  // namespace kprobe
