#pragma once

#include "mbgeom/chern_weil.hpp"
#include "mbgeom/geodesics.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbgeom {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed or unresolvable configuration (exit status 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Report write failure (exit status 3).
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReportFormat { kJson, kCsv };

struct ResultRow {
  std::string name;
  double raw = 0.0;
  std::optional<long> rounded;
  double tolerance = 0.0;
  bool pass = false;
};

struct RunReport {
  std::string scenario;
  nlohmann::ordered_json inputs;
  std::vector<ResultRow> results;
  nlohmann::ordered_json timings = nlohmann::ordered_json::object();
  std::string version = kVersion;

  bool pass() const;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::vector<std::string> descriptors;  // config keys the scenario reads
};

/// Registry in stable order.
const std::vector<ScenarioInfo>& list_scenarios();

/// Fills scenario defaults, validates and returns the effective config.
/// Throws ConfigError.
nlohmann::ordered_json resolve_config(const nlohmann::json& config);

RunReport run_scenario(const nlohmann::json& config);

nlohmann::ordered_json report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);
std::string render_report(const RunReport& report, ReportFormat format);

/// Writes through a temporary file and rename. Throws OutputError.
void emit_report(const RunReport& report, const std::string& path, ReportFormat format);

/// Applies "a.b.c=value" onto a config; value parsed as JSON, else a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Descriptor resolution for built-ins.
Chart parse_chart(const std::string& label);
MetricSection parse_metric(const std::string& label);
/// "monopole:n=3", "trivial:rank=2", or summands joined with '+'.
BundleConnection parse_bundle(const std::string& label, const Chart& base);
/// Degree a bundle descriptor is built to have.
long descriptor_degree(const std::string& label);

}  // namespace mbgeom
