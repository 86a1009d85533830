// thermoevo <mode> --config <path> [--all] [--out <dir>]

#include <CLI11.hpp>

#include <iostream>

#include "thermoevo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Thermoelastic evolutionary equations: certify, simulate, verify"};
  std::string mode;
  thermoevo::CliOptions opts;
  app.add_option("mode", mode, "check | simulate | verify | patterns")
      ->required()
      ->check(CLI::IsMember({"check", "simulate", "verify", "patterns"}));
  app.add_option("--config", opts.config_path, "JSON run configuration");
  app.add_flag("--all", opts.all, "patterns: print every catalog family");
  app.add_option("--out", opts.out_dir, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  opts.mode = thermoevo::run_mode_from_string(mode);
  return thermoevo::run(opts, std::cout, std::cerr);
}
