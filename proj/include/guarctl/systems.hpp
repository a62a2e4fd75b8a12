#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "guarctl/config.hpp"
#include "guarctl/example_bilinear.hpp"
#include "guarctl/expression.hpp"
#include "guarctl/oracle.hpp"

namespace guarctl {

namespace detail {

inline Box box_from_points(const std::vector<Vec>& pts, const char* what) {
  if (pts.size() != 2)
    throw ConfigError(std::string(what) +
                      ": expected two points 'lo ; hi'");
  Box b{pts[0], pts[1]};
  b.validate();
  return b;
}

inline std::vector<int> resolution_list(const ConfigMap& cfg,
                                        const std::string& section,
                                        const std::string& key, int dim,
                                        int fallback) {
  if (!cfg.has(section, key))
    return std::vector<int>(static_cast<std::size_t>(dim), fallback);
  const std::vector<double> raw = cfg.get_doubles(section, key);
  std::vector<int> out;
  if (raw.size() == 1)
    out.assign(static_cast<std::size_t>(dim),
               static_cast<int>(raw.front()));
  else {
    if (raw.size() != static_cast<std::size_t>(dim))
      throw ConfigError("config: " + section + "." + key +
                        " must give one value or one per axis");
    for (double r : raw) out.push_back(static_cast<int>(r));
  }
  for (int r : out)
    if (r < 2)
      throw ConfigError("config: " + section + "." + key +
                        " entries must be >= 2");
  return out;
}

inline CompactSet set_from_config(const ConfigMap& cfg,
                                  const std::string& section,
                                  const std::string& prefix,
                                  const std::string& default_kind) {
  const std::string kind =
      cfg.get_string(section, prefix + "_kind", default_kind);
  if (kind == "finite")
    return CompactSet::finite(cfg.get_points(section, prefix + "_points"));
  if (kind == "box") {
    const Box b = box_from_points(cfg.get_points(section, prefix + "_box"),
                                  (section + "." + prefix + "_box").c_str());
    return CompactSet::grid(
        b, resolution_list(cfg, section, prefix + "_resolution", b.dim(), 9));
  }
  throw ConfigError("config: " + section + "." + prefix +
                    "_kind must be 'finite' or 'box', got '" + kind + "'");
}

}  // namespace detail

/// Build the conflict-controlled system described by [system].  `bilinear`
/// selects the built-in benchmark (bounds and control grid resolution may be
/// overridden); `custom` assembles dynamics from per-component right-hand
/// side expressions and inline set descriptions.
inline Dynamics build_dynamics(const ConfigMap& cfg) {
  const std::string id = cfg.get_string("system", "id");
  if (id == "bilinear") {
    Box bounds{{-1.2, -1.2}, {1.2, 1.2}};
    if (cfg.has("system", "bounds"))
      bounds = detail::box_from_points(cfg.get_points("system", "bounds"),
                                       "system.bounds");
    const int res = cfg.get_int("system", "control_resolution", 9);
    Dynamics dyn = make_bilinear_dynamics(bounds, res);
    dyn.bounds_margin = cfg.get_double("system", "margin", 0.1);
    dyn.validate();
    return dyn;
  }
  if (id != "custom")
    throw ConfigError("config: system.id must be 'bilinear' or 'custom', got '" +
                      id + "'");

  Dynamics dyn;
  dyn.id = "custom";
  dyn.state_dim = cfg.get_int("system", "state_dim");
  dyn.t0 = cfg.get_double("system", "t0", 0.0);
  dyn.theta = cfg.get_double("system", "theta", 1.0);
  dyn.bounds = detail::box_from_points(cfg.get_points("system", "bounds"),
                                       "system.bounds");
  dyn.bounds_margin = cfg.get_double("system", "margin", 0.1);
  dyn.control_set = detail::set_from_config(cfg, "system", "control", "box");
  dyn.disturbance_set =
      detail::set_from_config(cfg, "system", "disturbance", "finite");

  // One expression per state component, ';'-separated.
  const std::string rhs_text = cfg.get_string("system", "rhs");
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= rhs_text.size()) {
    std::size_t stop = rhs_text.find(';', start);
    if (stop == std::string::npos) stop = rhs_text.size();
    parts.push_back(rhs_text.substr(start, stop - start));
    start = stop + 1;
  }
  while (!parts.empty() && parts.back().find_first_not_of(" \t") ==
                               std::string::npos)
    parts.pop_back();
  if (parts.size() != static_cast<std::size_t>(dyn.state_dim))
    throw ConfigError("config: system.rhs needs exactly " +
                      std::to_string(dyn.state_dim) +
                      " ';'-separated expressions");
  auto exprs = std::make_shared<std::vector<Expression>>();
  for (const std::string& p : parts)
    exprs->push_back(Expression::parse(p, dyn.state_dim, dyn.control_dim(),
                                       dyn.disturbance_dim()));
  dyn.f = [exprs](double t, std::span<const double> x,
                  std::span<const double> u, std::span<const double> v,
                  std::span<double> dx) {
    for (std::size_t k = 0; k < exprs->size(); ++k)
      dx[k] = (*exprs)[k].eval(t, x, u, v);
  };
  dyn.validate();
  return dyn;
}

/// Terminal cost from [cost].terminal, an expression over x alone.  The
/// bilinear benchmark defaults to its payoff x2.
inline TerminalFn build_terminal(const ConfigMap& cfg, const Dynamics& dyn) {
  std::string text;
  if (cfg.has("cost", "terminal"))
    text = cfg.get_string("cost", "terminal");
  else if (dyn.id == "bilinear")
    text = "x2";
  else
    throw ConfigError("config: missing required key cost.terminal");
  auto expr = std::make_shared<Expression>(
      Expression::parse(text, dyn.state_dim, 0, 0));
  return [expr](std::span<const double> x) {
    return expr->eval(0.0, x, {}, {});
  };
}

/// Value grid from [value_grid] with benchmark-friendly defaults: 100 time
/// steps, 41 nodes per axis, box = the system working bounds.
inline ValueGridSpec build_value_grid(const ConfigMap& cfg,
                                      const Dynamics& dyn) {
  ValueGridSpec grid;
  grid.time_steps = cfg.get_int("value_grid", "time_steps", 100);
  grid.box = dyn.bounds;
  if (cfg.has("value_grid", "box"))
    grid.box = detail::box_from_points(cfg.get_points("value_grid", "box"),
                                       "value_grid.box");
  const std::vector<int> nodes = detail::resolution_list(
      cfg, "value_grid", "nodes", dyn.state_dim, 41);
  grid.nodes = nodes;
  grid.validate(dyn.state_dim);
  return grid;
}

}  // namespace guarctl
