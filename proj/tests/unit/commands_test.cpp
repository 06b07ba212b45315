#include "commands.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace impulse::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kScenarios = IMPULSE_SCENARIO_DIR;
const std::string kData = IMPULSE_TEST_DATA_DIR;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("impulse_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string write(const std::string& name, const json& doc) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }

 private:
  fs::path path_;
};

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

Options options(const std::string& scenario) {
  Options o;
  o.scenario = scenario;
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IMPULSE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::Schema), kExitUsage);
  EXPECT_EQ(exit_code_for(ErrorKind::Parse), kExitUsage);
  EXPECT_EQ(exit_code_for(ErrorKind::Io), kExitUsage);
  EXPECT_EQ(exit_code_for(ErrorKind::UnknownParameter), kExitUsage);
  EXPECT_EQ(exit_code_for(ErrorKind::UnknownModel), kExitUsage);
  EXPECT_EQ(exit_code_for(ErrorKind::Grazing), kExitNumerical);
  EXPECT_EQ(exit_code_for(ErrorKind::Domain), kExitNumerical);
  EXPECT_EQ(exit_code_for(ErrorKind::Metric), kExitNumerical);
}

TEST(FormatNumber, RoundTripsAtSeventeenDigits) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -0.0, 123456789.123456789}) {
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v) << format_number(v);
  }
}

TEST(CmdResolve, PointSlipJson) {
  std::ostringstream out, err;
  Options o = options(kScenarios + "/point_slip.json");
  o.format = "json";
  ASSERT_EQ(cmd_resolve(o, out, err), kExitOk) << err.str();
  const json report = json::parse(out.str());
  EXPECT_EQ(report["branch"], "slip");
  const auto right = report["right_velocity"].get<std::vector<double>>();
  ASSERT_EQ(right.size(), 2u);
  EXPECT_NEAR(right[0], 0.5, 1e-12);
  EXPECT_NEAR(right[1], 0.5, 1e-12);
}

TEST(CmdResolve, RodVerticalTableAndFile) {
  TempDir dir;
  std::ostringstream out, err;
  Options o = options(kScenarios + "/rod_vertical.json");
  o.out_dir = dir.path().string();
  ASSERT_EQ(cmd_resolve(o, out, err), kExitOk) << err.str();
  EXPECT_NE(out.str().find("stick"), std::string::npos) << out.str();
  std::ifstream f(dir.path() / "resolve.json");
  const json report = json::parse(f);
  EXPECT_EQ(report["branch"], "stick");
  const auto right = report["right_velocity"].get<std::vector<double>>();
  EXPECT_NEAR(right[0], 0.0, 1e-12);
  EXPECT_NEAR(right[2], 0.0, 1e-12);
  EXPECT_GT(right[1], 0.0);
}

TEST(CmdResolve, ErrorsMapToExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_resolve(options(kData + "/malformed.json"), out, err), kExitUsage);
  EXPECT_NE(err.str().find("error:"), std::string::npos);
  TempDir dir;
  json doc = json::parse(R"({
    "model": {"builtin": "point", "parameters": {"m": 1}},
    "law": {"type": "ideal"},
    "initial": {"q": [0, 0], "qdot": [1, 0]}
  })");
  EXPECT_EQ(cmd_resolve(options(dir.write("graze.json", doc)), out, err), kExitNumerical);
}

TEST(CmdSimulate, BounceCsvFiles) {
  TempDir dir;
  std::ostringstream out, err;
  Options o = options(kScenarios + "/point_bounce.json");
  o.out_dir = dir.path().string();
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk) << err.str();
  const auto samples = read_lines(dir.path() / "samples.csv");
  ASSERT_GT(samples.size(), 2u);
  EXPECT_EQ(samples.front(), "t,q1,q2,qd1,qd2");
  const auto events = read_lines(dir.path() / "events.csv");
  ASSERT_GT(events.size(), 6u);
  EXPECT_EQ(events.front(), "t,branch,dE,I1,I2,pre_qd1,pre_qd2,post_qd1,post_qd2");
  EXPECT_EQ(split(events.back())[1], "settled");
  double previous = 1e300;
  for (std::size_t i = 1; i + 1 < events.size(); ++i) {
    const double post = std::abs(std::stod(split(events[i])[8]));
    EXPECT_LT(post, previous);
    previous = post;
  }
}

TEST(CmdSimulate, ZeroImpactRunHasHeaderOnlyEvents) {
  TempDir dir;
  std::ifstream in(kScenarios + "/point_bounce.json");
  json doc = json::parse(in);
  doc["simulation"]["t_end"] = 0.2;
  std::ostringstream out, err;
  Options o = options(dir.write("short.json", doc));
  o.out_dir = dir.path().string();
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk) << err.str();
  EXPECT_EQ(read_lines(dir.path() / "events.csv").size(), 1u);
}

TEST(CmdSimulate, CsvRoundTripsTrajectory) {
  TempDir dir;
  const Scenario sc = load_scenario(kScenarios + "/point_bounce.json");
  const Trajectory traj = run_simulation(sc.config);
  std::ostringstream out, err;
  Options o = options(kScenarios + "/point_bounce.json");
  o.out_dir = dir.path().string();
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk) << err.str();
  const auto lines = read_lines(dir.path() / "samples.csv");
  ASSERT_EQ(lines.size(), traj.samples.size() + 1);
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto cells = split(lines[i + 1]);
    const GeneralizedState& s = traj.samples[i];
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(std::stod(cells[0]), s.time);
    EXPECT_EQ(std::stod(cells[1]), s.q(0));
    EXPECT_EQ(std::stod(cells[2]), s.q(1));
    EXPECT_EQ(std::stod(cells[3]), s.qdot(0));
    EXPECT_EQ(std::stod(cells[4]), s.qdot(1));
  }
}

TEST(CmdSimulate, JsonTrajectory) {
  TempDir dir;
  std::ostringstream out, err;
  Options o = options(kScenarios + "/rod_drop.json");
  o.out_dir = dir.path().string();
  o.format = "json";
  ASSERT_EQ(cmd_simulate(o, out, err), kExitOk) << err.str();
  std::ifstream f(dir.path() / "trajectory.json");
  const json traj = json::parse(f);
  EXPECT_TRUE(traj["samples"].is_array());
  EXPECT_FALSE(traj["events"].empty());
}

TEST(CmdSweep, RodThetaSignFlip) {
  std::ostringstream out, err;
  Options o = options(kScenarios + "/rod_inclined.json");
  o.param = "theta";
  o.from = 0.5;
  o.to = 1.5;
  o.count = 41;
  o.mode = "impact";
  json doc;
  {
    std::ifstream in(o.scenario);
    doc = json::parse(in);
  }
  doc["law"]["mu_s"] = 100.0;
  doc["law"]["e_S"] = 0.5;
  doc["model"]["parameters"] = {{"m", 1}, {"L", 1}, {"A", 1.0 / 3.0}};
  doc["initial"]["qdot"] = json::array({0, -1, 0});
  TempDir dir;
  o.scenario = dir.write("rod.json", doc);
  ASSERT_EQ(cmd_sweep(o, out, err), kExitOk) << err.str();
  std::istringstream rows(out.str());
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "value,branch,qdR1,qdR2,qdR3,dE");
  int flips = 0, count = 0;
  bool last = false;
  while (std::getline(rows, line)) {
    const auto cells = split(line);
    const bool up = std::stod(cells[3]) > 0.0;
    const double th = std::stod(cells[0]);
    EXPECT_EQ(up, std::cos(th) * std::cos(th) < 1.0 / 3.0) << th;
    if (count > 0 && up != last) ++flips;
    last = up;
    ++count;
  }
  EXPECT_EQ(count, 41);
  EXPECT_EQ(flips, 1);
}

TEST(CmdSweep, SingleValueAndUnknownParameter) {
  std::ostringstream out, err;
  Options o = options(kScenarios + "/point_slip.json");
  o.param = "mu_s";
  o.from = 0.2;
  o.to = 0.9;
  o.count = 1;
  ASSERT_EQ(cmd_sweep(o, out, err), kExitOk) << err.str();
  std::istringstream rows(out.str());
  std::vector<std::string> lines;
  for (std::string line; std::getline(rows, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(split(lines[1])[0], "0.20000000000000001");
  o.param = "nope";
  EXPECT_EQ(cmd_sweep(o, out, err), kExitUsage);
  EXPECT_THROW(sweep_values(0.0, 1.0, 0), Error);
  EXPECT_EQ(sweep_values(0.0, 1.0, 5), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(CmdSweep, FrictionSweepHasOneTransition) {
  std::ostringstream out, err;
  Options o = options(kScenarios + "/point_slip.json");
  o.param = "mu_s";
  o.from = 0.0;
  o.to = 2.0;
  o.count = 81;
  ASSERT_EQ(cmd_sweep(o, out, err), kExitOk) << err.str();
  std::istringstream rows(out.str());
  std::string line;
  std::getline(rows, line);
  std::string previous;
  int transitions = 0;
  while (std::getline(rows, line)) {
    const std::string branch = split(line)[1];
    if (!previous.empty() && branch != previous) ++transitions;
    previous = branch;
  }
  EXPECT_EQ(transitions, 1);
  EXPECT_EQ(previous, "stick");
}

TEST(CmdCheck, ShippedScenariosPass) {
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".json") continue;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_check(options(entry.path().string()), out, err), kExitOk)
        << entry.path() << "\n" << out.str() << err.str();
    EXPECT_EQ(out.str().find("FAIL"), std::string::npos) << out.str();
  }
}

TEST(CmdCheck, WrongHandWrittenGradientFails) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check(options(kData + "/bad_gradient.json"), out, err), kExitNumerical) << err.str();
  EXPECT_NE(out.str().find("FAIL gradient-fd"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("max relative deviation"), std::string::npos) << out.str();
}

TEST(CmdCheck, IndefiniteMetricFails) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_check(options(kData + "/indefinite_metric.json"), out, err), kExitNumerical) << err.str();
  EXPECT_NE(out.str().find("FAIL metric-spd"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("negative"), std::string::npos) << out.str();
}

TEST(Executable, ExitCodes) {
  EXPECT_EQ(run_cli("check --scenario " + kScenarios + "/rod_vertical.json"), 0);
  EXPECT_EQ(run_cli("resolve --scenario " + kData + "/malformed.json"), 1);
  EXPECT_EQ(run_cli("resolve"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("check --scenario " + kData + "/indefinite_metric.json"), 2);
}

}  // namespace
}  // namespace impulse::cli
