#include "commands.hpp"

#include "impulse/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace impulse::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void join_columns(std::ostream& os, const char* prefix, Index n) {
  for (Index i = 1; i <= n; ++i) os << ',' << prefix << i;
}

void write_values(std::ostream& os, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) os << ',' << format_number(v(i));
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return f;
}

fs::path output_dir(const Options& opts, const Scenario& sc) {
  fs::path dir = opts.out_dir ? fs::path(*opts.out_dir) : fs::path(sc.output_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::string output_format(const Options& opts, const Scenario& sc) {
  const std::string f = opts.format.value_or(sc.output_format);
  if (f != "csv" && f != "json") fail(ErrorKind::Schema, "--format must be csv or json");
  return f;
}

// Runs `body`, mapping library errors onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

double relative_gap(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema:
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::UnknownModel:
    case ErrorKind::UnknownParameter:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json outcome_to_json(const ContactLaw& law, const Vector& left_velocity, const ImpactOutcome& outcome) {
  return json{
      {"law", std::string(law.name())},
      {"branch", std::string(to_string(outcome.branch))},
      {"left_velocity", to_json(left_velocity)},
      {"split",
       {{"parallel_B", to_json(outcome.split.parallel_B)},
        {"ortho_B", to_json(outcome.split.ortho_B)},
        {"ortho_S", to_json(outcome.split.ortho_S)},
        {"norm_ortho_B", outcome.split.norm_ortho_B},
        {"norm_ortho_S", outcome.split.norm_ortho_S}}},
      {"impulse", to_json(outcome.impulse)},
      {"right_velocity", to_json(outcome.right_velocity)},
      {"lambda", outcome.lambda},
      {"delta_energy", outcome.delta_energy},
  };
}

void write_outcome_table(std::ostream& os, const std::vector<std::string>& coordinates,
                         const Vector& left_velocity, const ImpactOutcome& outcome) {
  const std::vector<std::pair<std::string, const Vector*>> columns = {
      {"qdot_L", &left_velocity},     {"parallel_B", &outcome.split.parallel_B},
      {"ortho_B", &outcome.split.ortho_B}, {"ortho_S", &outcome.split.ortho_S},
      {"impulse", &outcome.impulse},  {"qdot_R", &outcome.right_velocity},
  };
  constexpr int w = 24;
  os << std::left << std::setw(10) << "coord";
  for (const auto& [name, v] : columns) os << std::right << std::setw(w) << name;
  os << '\n';
  for (std::size_t i = 0; i < coordinates.size(); ++i) {
    os << std::left << std::setw(10) << coordinates[i];
    for (const auto& [name, v] : columns) {
      os << std::right << std::setw(w) << format_number((*v)(static_cast<Index>(i)));
    }
    os << '\n';
  }
  os << std::left << std::setw(14) << "branch" << to_string(outcome.branch) << '\n'
     << std::setw(14) << "lambda" << format_number(outcome.lambda) << '\n'
     << std::setw(14) << "|ortho_B|" << format_number(outcome.split.norm_ortho_B) << '\n'
     << std::setw(14) << "|ortho_S|" << format_number(outcome.split.norm_ortho_S) << '\n'
     << std::setw(14) << "delta_T" << format_number(outcome.delta_energy) << '\n';
}

void write_samples_csv(std::ostream& os, const Trajectory& traj, Index n) {
  os << 't';
  join_columns(os, "q", n);
  join_columns(os, "qd", n);
  os << '\n';
  for (const GeneralizedState& s : traj.samples) {
    os << format_number(s.time);
    write_values(os, s.q);
    write_values(os, s.qdot);
    os << '\n';
  }
}

void write_events_csv(std::ostream& os, const Trajectory& traj, Index n) {
  os << "t,branch,dE";
  join_columns(os, "I", n);
  join_columns(os, "pre_qd", n);
  join_columns(os, "post_qd", n);
  os << '\n';
  for (const ImpactEvent& e : traj.events) {
    os << format_number(e.time) << ','
       << (e.kind == EventKind::Settled ? std::string_view("settled") : to_string(e.branch)) << ','
       << format_number(e.delta_energy);
    write_values(os, e.impulse);
    write_values(os, e.pre_qdot);
    write_values(os, e.post_qdot);
    os << '\n';
  }
}

json trajectory_to_json(const Trajectory& traj) {
  json samples = json::array();
  for (const GeneralizedState& s : traj.samples) {
    samples.push_back({{"t", s.time}, {"q", to_json(s.q)}, {"qdot", to_json(s.qdot)}});
  }
  json events = json::array();
  for (const ImpactEvent& e : traj.events) {
    events.push_back({{"t", e.time},
                      {"branch", e.kind == EventKind::Settled ? std::string("settled")
                                                              : std::string(to_string(e.branch))},
                      {"dE", e.delta_energy},
                      {"impulse", to_json(e.impulse)},
                      {"pre_qdot", to_json(e.pre_qdot)},
                      {"post_qdot", to_json(e.post_qdot)}});
  }
  return json{{"stop", std::string(to_string(traj.stop))}, {"samples", samples}, {"events", events}};
}

std::vector<double> sweep_values(double from, double to, int count) {
  if (count < 1) fail(ErrorKind::Schema, "--count must be at least 1");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    values.push_back(from);
    return values;
  }
  for (int i = 0; i < count; ++i) values.push_back(from + (to - from) * i / (count - 1));
  return values;
}

std::vector<SweepRow> sweep_scenario(const json& document, const std::string& param,
                                     const std::vector<double>& values, SweepMode mode) {
  // Resolve the name once so an unknown parameter fails before any run.
  (void)with_parameter(document, param, values.empty() ? 0.0 : values.front());
  return sweep([&](double v) { return parse_scenario(with_parameter(document, param, v)).config; },
               values, mode);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, Index n) {
  os << "value,branch";
  join_columns(os, "qdR", n);
  os << ",dE\n";
  for (const SweepRow& r : rows) {
    os << format_number(r.value) << ',' << to_string(r.branch);
    write_values(os, r.right_velocity);
    os << ',' << format_number(r.delta_energy) << '\n';
  }
}

std::vector<CheckResult> run_checks(const Scenario& sc) {
  const MechanicalSystem& system = sc.config.system;
  const Index n = system.dim();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<Vector> configs{sc.config.initial.q};
  for (int i = 0; i < 8; ++i) {
    Vector q = sc.config.initial.q;
    for (Index j = 0; j < n; ++j) q(j) += 0.05 * unit(rng) * (1.0 + std::abs(q(j)));
    if (system.check_configuration) {
      try {
        system.check_configuration(q);
      } catch (const Error&) {
        continue;
      }
    }
    configs.push_back(q);
  }

  std::vector<CheckResult> results;

  CheckResult spd{"metric-spd", true, ""};
  for (const Vector& q : configs) {
    try {
      validate_metric(system.metric.at(q));
    } catch (const Error& e) {
      spd.passed = false;
      spd.detail = e.what();
      break;
    }
  }
  if (spd.passed) spd.detail = "positive definite at " + std::to_string(configs.size()) + " configurations";
  results.push_back(spd);

  CheckResult grad{"gradient-fd", true, ""};
  double worst = 0.0;
  try {
    for (const Vector& q : configs) {
      const RowVector g = system.surface.gradient(q);
      Vector fd(n);
      for (Index j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(q(j)));
        Vector qp = q;
        Vector qm = q;
        qp(j) += h;
        qm(j) -= h;
        fd(j) = (system.surface.value(qp) - system.surface.value(qm)) / (2.0 * h);
      }
      worst = std::max(worst, relative_gap(g.transpose(), fd));
    }
    grad.passed = worst <= 1e-6;
    grad.detail = "max relative deviation " + format_number(worst);
  } catch (const Error& e) {
    grad.passed = false;
    grad.detail = e.what();
  }
  results.push_back(grad);

  CheckResult rank{"rank", true, ""};
  try {
    for (const Vector& q : configs) {
      const RowVector normal = system.surface.gradient(q);
      const Matrix C = system.stick.rows(q);
      const Index k = C.rows();
      if (C.cols() != n || k < 1 || k > n - 1) fail(ErrorKind::DegenerateConstraint, "stick needs 1..n-1 rows of length n");
      Matrix stacked(k + 1, n);
      stacked.row(0) = normal;
      stacked.bottomRows(k) = C;
      Eigen::JacobiSVD<Matrix> svd_c(C);
      Eigen::JacobiSVD<Matrix> svd_s(stacked);
      if (!(svd_c.singularValues()(k - 1) > kPivotRatio * svd_c.singularValues()(0))) {
        fail(ErrorKind::DegenerateConstraint, "stick rows not of full row rank");
      }
      if (!(svd_s.singularValues()(k) > kPivotRatio * svd_s.singularValues()(0))) {
        fail(ErrorKind::DegenerateConstraint, "stick rows not independent of the surface gradient");
      }
    }
    rank.detail = "full rank at " + std::to_string(configs.size()) + " configurations";
  } catch (const Error& e) {
    rank.passed = false;
    rank.detail = e.what();
  }
  results.push_back(rank);

  if (spd.passed && rank.passed) {
    CheckResult oracle{"projector-oracle", true, ""};
    double gap = 0.0;
    try {
      for (const Vector& q : configs) {
        const ContactFrame frame = evaluate_frame(system, q);
        for (int r = 0; r < 4; ++r) {
          Vector v = r == 0 ? Vector(sc.config.initial.qdot) : Vector(n);
          if (r > 0) {
            for (Index j = 0; j < n; ++j) v(j) = unit(rng);
          }
          const VelocitySplit split = triple_split(frame, v);
          Matrix both(frame.stick.rows() + 1, n);
          both.row(0) = frame.normal;
          both.bottomRows(frame.stick.rows()) = frame.stick;
          const Vector ortho_S = v - projection_oracle(frame.metric, frame.normal, v);
          const Vector ortho_all = v - projection_oracle(frame.metric, both, v);
          const double scale = std::max(1.0, v.lpNorm<Eigen::Infinity>());
          gap = std::max(gap, (split.ortho_S - ortho_S).lpNorm<Eigen::Infinity>() / scale);
          gap = std::max(gap, (split.ortho_S + split.ortho_B - ortho_all).lpNorm<Eigen::Infinity>() / scale);
        }
      }
      oracle.passed = gap <= 1e-9;
      oracle.detail = "max relative deviation " + format_number(gap);
    } catch (const Error& e) {
      oracle.passed = false;
      oracle.detail = e.what();
    }
    results.push_back(oracle);

    if (sc.builtin) {
      CheckResult analytic{"analytic-oracle", true, ""};
      double worst_gap = 0.0;
      try {
        for (const Vector& q : configs) {
          const ContactFrame frame = evaluate_frame(system, q);
          for (int r = 0; r < 4; ++r) {
            GeneralizedState st{0.0, q, r == 0 ? Vector(sc.config.initial.qdot) : Vector(n)};
            if (r > 0) {
              for (Index j = 0; j < n; ++j) st.qdot(j) = unit(rng);
            }
            const VelocitySplit generic = triple_split(frame, st.qdot);
            const VelocitySplit printed = analytic_split_oracle(*sc.builtin, st);
            const double scale = std::max(1.0, st.qdot.lpNorm<Eigen::Infinity>());
            worst_gap = std::max({worst_gap,
                                  (generic.parallel_B - printed.parallel_B).lpNorm<Eigen::Infinity>() / scale,
                                  (generic.ortho_B - printed.ortho_B).lpNorm<Eigen::Infinity>() / scale,
                                  (generic.ortho_S - printed.ortho_S).lpNorm<Eigen::Infinity>() / scale});
          }
        }
        analytic.passed = worst_gap <= 1e-9;
        analytic.detail = "max relative deviation " + format_number(worst_gap);
      } catch (const Error& e) {
        analytic.passed = false;
        analytic.detail = e.what();
      }
      results.push_back(analytic);
    }
  }
  return results;
}

int cmd_resolve(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(opts.scenario);
    const ImpactOutcome outcome = resolve_impact(sc.config.system, sc.config.initial, sc.config.law);
    const json report = outcome_to_json(sc.config.law, sc.config.initial.qdot, outcome);
    if (opts.format.value_or("csv") == "json") {
      out << report.dump(2) << '\n';
    } else {
      write_outcome_table(out, sc.coordinates(), sc.config.initial.qdot, outcome);
    }
    if (opts.out_dir) {
      std::ofstream f = open_output(output_dir(opts, sc) / "resolve.json");
      f << report.dump(2) << '\n';
    }
    return kExitOk;
  });
}

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(opts.scenario);
    const std::string format = output_format(opts, sc);
    const Trajectory traj = run_simulation(sc.config);
    const fs::path dir = output_dir(opts, sc);
    const Index n = sc.config.system.dim();
    if (format == "json") {
      std::ofstream f = open_output(dir / "trajectory.json");
      f << trajectory_to_json(traj).dump(1) << '\n';
    } else {
      std::ofstream samples = open_output(dir / "samples.csv");
      write_samples_csv(samples, traj, n);
      std::ofstream events = open_output(dir / "events.csv");
      write_events_csv(events, traj, n);
    }
    out << "samples " << traj.samples.size() << ", impacts " << traj.impact_count() << ", stop "
        << to_string(traj.stop) << ", output " << dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.param.empty()) fail(ErrorKind::Schema, "sweep requires --param");
    SweepMode mode = SweepMode::SingleImpact;
    if (opts.mode == "simulate") {
      mode = SweepMode::Simulation;
    } else if (opts.mode != "impact") {
      fail(ErrorKind::Schema, "--mode must be impact or simulate");
    }
    const Scenario sc = load_scenario(opts.scenario);
    const std::vector<double> values = sweep_values(opts.from, opts.to, opts.count);
    const std::vector<SweepRow> rows = sweep_scenario(sc.document, opts.param, values, mode);
    const Index n = sc.config.system.dim();
    if (opts.out_dir) {
      std::ofstream f = open_output(output_dir(opts, sc) / "sweep.csv");
      write_sweep_csv(f, rows, n);
    } else {
      write_sweep_csv(out, rows, n);
    }
    return kExitOk;
  });
}

int cmd_check(const Options& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(opts.scenario);
    bool ok = true;
    for (const CheckResult& r : run_checks(sc)) {
      out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(18) << r.name << r.detail << '\n';
      ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitNumerical;
  });
}

}  // namespace impulse::cli
