#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kprobe/action_map.hpp"
#include "kprobe/asymptotics.hpp"
#include "kprobe/hessian.hpp"

namespace kprobe {

enum class ReportFormat { Csv, Json };

/// 17 significant digits; re-parses to the same double.
std::string format_double(double x);

std::string sha256_hex(std::string_view data);

/// Writes artifacts into one directory and keeps the list for the manifest.
class ReportWriter {
public:
    explicit ReportWriter(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::filesystem::path write(const std::string& name, const std::string& content);
    /// manifest.json listing every artifact written so far with its SHA-256.
    std::filesystem::path write_manifest();

private:
    struct Entry {
        std::string name;
        std::string sha256;
        std::size_t bytes;
    };
    std::filesystem::path dir_;
    std::vector<Entry> entries_;
};

/// Header F1..Fn, I1..In, detJ, Gamma1..Gamman, detHess; one row per sample.
std::string samples_csv(const std::vector<ActionChartSample>& samples);
/// Header t, F1..Fn, detHess, scaled, running_g; one row per path sample.
std::string scaling_csv(const HessianScalingReport& report);
std::string fits_csv(const std::vector<SingularActionFit>& fits);

std::string dump_json(const nlohmann::json& j);

/// Writes <stem>.csv or <stem>.json. Empty record sets raise ConfigError and
/// leave no file behind.
std::filesystem::path emit_report(ReportWriter& writer, const std::string& stem,
                                  const std::vector<ActionChartSample>& records, ReportFormat format);
std::filesystem::path emit_report(ReportWriter& writer, const std::string& stem, const HessianScalingReport& report,
                                  ReportFormat format);
std::filesystem::path emit_report(ReportWriter& writer, const std::string& stem,
                                  const std::vector<SingularActionFit>& records, ReportFormat format);

}  // namespace kprobe
