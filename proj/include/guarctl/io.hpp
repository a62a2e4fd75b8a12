#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "guarctl/evaluation.hpp"
#include "guarctl/inversion.hpp"
#include "guarctl/signal.hpp"
#include "guarctl/trajectory.hpp"

namespace guarctl {

/// All numeric output uses 17 significant digits, enough to round-trip an
/// IEEE double exactly, so reruns can be compared byte for byte.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Sampled motion as CSV: comment line with the config digest, header
/// t,x1..xn, one row per sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const std::string& config_digest) {
  os << "# config=" << config_digest << "\n";
  os << "t";
  for (int a = 1; a <= traj.dim(); ++a) os << ",x" << a;
  os << "\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << fmt17(traj.times()[i]);
    for (double c : traj.states()[i]) os << "," << fmt17(c);
    os << "\n";
  }
}

/// Piecewise-constant signal as CSV: one row per breakpoint (the value that
/// starts holding there) plus a closing row at the end time.
inline void write_signal_csv(std::ostream& os, const Signal& sig,
                             const std::string& column_prefix,
                             const std::string& config_digest) {
  os << "# config=" << config_digest << "\n";
  os << "t";
  for (int a = 1; a <= sig.dim(); ++a) os << "," << column_prefix << a;
  os << "\n";
  for (std::size_t i = 0; i < sig.starts().size(); ++i) {
    os << fmt17(sig.starts()[i]);
    for (double c : sig.values()[i]) os << "," << fmt17(c);
    os << "\n";
  }
  os << fmt17(sig.end());
  for (double c : sig.values().back()) os << "," << fmt17(c);
  os << "\n";
}

/// Identified surrogate disturbances as CSV: t,vbar1..vbark.
inline void write_surrogate_csv(std::ostream& os,
                                const std::vector<std::pair<double, Vec>>& log,
                                const std::string& config_digest) {
  os << "# config=" << config_digest << "\n";
  os << "t";
  if (!log.empty())
    for (std::size_t a = 1; a <= log.front().second.size(); ++a)
      os << ",vbar" << a;
  os << "\n";
  for (const auto& [t, v] : log) {
    os << fmt17(t);
    for (double c : v) os << "," << fmt17(c);
    os << "\n";
  }
}

/// Key=value report with the config digest on the first line.
inline void write_report(std::ostream& os, const std::string& body,
                         const std::string& config_digest) {
  os << "config=" << config_digest << "\n" << body;
}

/// Study results as JSON Lines: a meta record, one record per member run,
/// one per refinement level, and a closing summary.  Keys are emitted in
/// sorted order and doubles in shortest round-trip form, so identical runs
/// produce identical bytes.
inline void write_study_jsonl(std::ostream& os, const StudyResult& study,
                              const std::string& config_digest) {
  using nlohmann::json;
  os << json{{"record", "meta"},
             {"config", config_digest},
             {"strategy", study.strategy},
             {"reference", study.reference},
             {"trend_tol", study.trend_tol},
             {"lb_tol", study.lb_tol}}
            .dump()
     << "\n";
  for (const StudyPoint& pt : study.points) {
    for (const MemberOutcome& m : pt.estimate.members) {
      json rec{{"record", "run"},    {"eps", pt.eps},
               {"blocks", pt.blocks}, {"diam", pt.diam},
               {"member", m.member},  {"ok", m.ok}};
      if (m.ok)
        rec["cost"] = m.cost;
      else
        rec["error"] = m.error;
      os << rec.dump() << "\n";
    }
    os << json{{"record", "level"},
               {"eps", pt.eps},
               {"blocks", pt.blocks},
               {"diam", pt.diam},
               {"sup_cost", pt.estimate.sup_cost},
               {"argmax", pt.estimate.argmax_member},
               {"all_ok", pt.estimate.all_ok}}
              .dump()
       << "\n";
  }
  os << json{{"record", "summary"},
             {"final_sup", study.points.back().estimate.sup_cost},
             {"monotone", study.monotone},
             {"approaches", study.approaches},
             {"lower_bound_ok", study.lower_bound_ok}}
            .dump()
     << "\n";
}

/// Flat CSV mirror of the per-run study records.
inline void write_study_csv(std::ostream& os, const StudyResult& study,
                            const std::string& config_digest) {
  os << "# config=" << config_digest << "\n";
  os << "eps,blocks,diam,member,ok,cost\n";
  for (const StudyPoint& pt : study.points)
    for (const MemberOutcome& m : pt.estimate.members) {
      os << fmt17(pt.eps) << "," << pt.blocks << "," << fmt17(pt.diam) << ","
         << m.member << "," << (m.ok ? "1" : "0") << ","
         << (m.ok ? fmt17(m.cost) : "") << "\n";
    }
}

/// Open an output file, failing with a configuration error when the path is
/// not writable.
inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  return f;
}

}  // namespace guarctl
