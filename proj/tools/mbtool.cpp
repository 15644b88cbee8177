#include "mbgeom/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mbgeom::ConfigError("cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw mbgeom::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

int run(const std::string& config_path, const std::string& scenario,
        const std::vector<std::string>& overrides) {
  json config = json::object();
  if (!config_path.empty()) config = load_config(config_path);
  if (!scenario.empty()) config["scenario"] = scenario;
  for (const auto& o : overrides) mbgeom::apply_override(config, o);

  const nlohmann::ordered_json effective = mbgeom::resolve_config(config);
  const auto& output = effective["output"];
  const std::string format_name = output.value("format", "json");
  mbgeom::ReportFormat format;
  if (format_name == "json")
    format = mbgeom::ReportFormat::kJson;
  else if (format_name == "csv")
    format = mbgeom::ReportFormat::kCsv;
  else
    throw mbgeom::ConfigError("output.format must be json or csv");

  const mbgeom::RunReport report = mbgeom::run_scenario(config);
  if (output.contains("path")) {
    mbgeom::emit_report(report, output["path"].get<std::string>(), format);
  } else {
    std::cout << mbgeom::render_report(report, format);
    std::cout.flush();
    if (!std::cout) throw mbgeom::OutputError("cannot write to stdout");
  }
  if (!report.pass()) {
    for (const auto& r : report.results)
      if (!r.pass) std::cerr << "mbtool: check failed: " << r.name << " = " << r.raw << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mbtool: metric bundles, curvature and index integrals"};
  app.require_subcommand(1);

  std::string config_path, scenario;
  std::vector<std::string> overrides;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and emit its report");
  auto* config_opt = run_cmd->add_option("--config", config_path, "JSON config file");
  auto* scenario_opt = run_cmd->add_option("--scenario", scenario, "Scenario tag");
  run_cmd->add_option("--set", overrides, "Override a config field, key=value (dotted keys nest)");
  config_opt->excludes(scenario_opt);

  auto* list_cmd = app.add_subcommand("list", "List registered scenarios as JSON");
  auto* version_cmd = app.add_subcommand("version", "Print the toolkit version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*list_cmd) {
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (const auto& s : mbgeom::list_scenarios())
        out.push_back({{"name", s.name}, {"description", s.description},
                       {"descriptors", s.descriptors}});
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*version_cmd) {
      std::cout << mbgeom::kVersion << '\n';
      return 0;
    }
    if (config_path.empty() && scenario.empty()) {
      std::cerr << "mbtool: run needs --config or --scenario\n";
      return 1;
    }
    return run(config_path, scenario, overrides);
  } catch (const mbgeom::ConfigError& e) {
    std::cerr << "mbtool: config error: " << e.what() << '\n';
    return 1;
  } catch (const mbgeom::OutputError& e) {
    std::cerr << "mbtool: output error: " << e.what() << '\n';
    return 3;
  } catch (const mbgeom::GeometryError& e) {
    std::cerr << "mbtool: numerical failure (" << mbgeom::to_string(e.kind()) << "): " << e.what()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mbtool: " << e.what() << '\n';
    return 2;
  }
}
