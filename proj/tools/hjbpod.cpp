#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjbpod/error.hpp"
#include "hjbpod/pipeline.hpp"

namespace {

int exit_code(const hjbpod::Error& e) {
  if (dynamic_cast<const hjbpod::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const hjbpod::NumericalError*>(&e)) return 3;
  if (dynamic_cast<const hjbpod::IoError*>(&e)) return 4;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HJB feedback control of the lid-driven cavity through a POD-DEIM reduced model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "flat key = value config file (every key has a default)");
  app.add_option("--out", out_dir, "output directory (overrides the 'out' key)");
  app.add_option("--override", overrides, "key=value, repeatable")->allow_extra_args(false);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "uncontrolled run, snapshots and steady shape functions"},
      {"reduce", "POD basis, DEIM and reduced models"},
      {"solve-hjb", "value function and feedback policy per shape"},
      {"control", "closed-loop runs and error reports"},
      {"report", "combined tables and plot data"},
      {"run-all", "every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    // Accept `hjbpod run-all config.txt` as well as --config.
    sub->add_option("config", config_path, "config file")->check(CLI::ExistingFile);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = config_path.empty() ? hjbpod::parse_config("") : hjbpod::load_config(config_path);
    for (const auto& o : overrides) hjbpod::apply_override(config, o);
    if (!out_dir.empty()) hjbpod::apply_override(config, "out=" + out_dir);

    const std::string cmd = app.get_subcommands().front()->get_name();
    auto& log = std::clog;
    if (cmd == "simulate") hjbpod::cmd_simulate(config, log);
    else if (cmd == "reduce") hjbpod::cmd_reduce(config, log);
    else if (cmd == "solve-hjb") hjbpod::cmd_solve_hjb(config, log);
    else if (cmd == "control") hjbpod::cmd_control(config, log);
    else if (cmd == "report") hjbpod::cmd_report(config, log);
    else hjbpod::cmd_run_all(config, log);
  } catch (const hjbpod::Error& e) {
    std::cerr << "hjbpod: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "hjbpod: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
