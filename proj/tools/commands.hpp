#pragma once

// Subcommand implementations behind the `impulse` executable. Each returns the
// process exit code: 0 success, 1 usage/schema, 2 numerical/domain failure.

#include "scenario.hpp"

#include "impulse/errors.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace impulse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

int exit_code_for(ErrorKind kind);

struct Options {
  std::string scenario;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;  // csv | json
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int count = 0;
  std::string mode = "impact";  // sweep: impact | simulate
};

// Fixed 17-significant-digit decimal form used by every CSV writer.
std::string format_number(double v);

// --- resolve ---------------------------------------------------------------
nlohmann::json outcome_to_json(const ContactLaw& law, const Vector& left_velocity, const ImpactOutcome& outcome);
void write_outcome_table(std::ostream& os, const std::vector<std::string>& coordinates,
                         const Vector& left_velocity, const ImpactOutcome& outcome);

// --- simulate --------------------------------------------------------------
void write_samples_csv(std::ostream& os, const Trajectory& traj, Index n);
void write_events_csv(std::ostream& os, const Trajectory& traj, Index n);
nlohmann::json trajectory_to_json(const Trajectory& traj);

// --- sweep -----------------------------------------------------------------
std::vector<double> sweep_values(double from, double to, int count);
std::vector<SweepRow> sweep_scenario(const nlohmann::json& document, const std::string& param,
                                     const std::vector<double>& values, SweepMode mode);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, Index n);

// --- check -----------------------------------------------------------------
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<CheckResult> run_checks(const Scenario& scenario);

int cmd_resolve(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_check(const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace impulse::cli
