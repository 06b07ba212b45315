#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace impulse::cli;

  CLI::App app{"Frictional impacts of holonomic systems against a rough unilateral constraint"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opts.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* resolve = app.add_subcommand("resolve", "Resolve a single impact at the initial state");
  add_common(resolve);
  CLI::App* simulate = app.add_subcommand("simulate", "Event-driven simulation to CSV/JSON");
  add_common(simulate);
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter over a uniform grid");
  add_common(sweep);
  sweep->add_option("--param", opts.param, "Parameter name")->required();
  sweep->add_option("--from", opts.from, "First value")->required();
  sweep->add_option("--to", opts.to, "Last value")->required();
  sweep->add_option("--count", opts.count, "Number of values")->required();
  sweep->add_option("--mode", opts.mode, "impact (single resolution) or simulate")
      ->check(CLI::IsMember({"impact", "simulate"}));
  CLI::App* check = app.add_subcommand("check", "Run model diagnostics");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (resolve->parsed()) return cmd_resolve(opts, std::cout, std::cerr);
  if (simulate->parsed()) return cmd_simulate(opts, std::cout, std::cerr);
  if (sweep->parsed()) return cmd_sweep(opts, std::cout, std::cerr);
  return cmd_check(opts, std::cout, std::cerr);
}
