#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guarctl/evaluation.hpp"
#include "guarctl/io.hpp"
#include "guarctl/systems.hpp"

namespace guarctl {

/// Options shared by every subcommand (from the command line, not the
/// config file).
struct CliOptions {
  std::string out_dir;  // overrides [output].dir when nonempty
  int jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

namespace detail {

inline std::string resolve_out_dir(const ConfigMap& cfg,
                                   const CliOptions& opts) {
  const std::string dir = !opts.out_dir.empty()
                              ? opts.out_dir
                              : cfg.get_string("output", "dir", "out");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + dir +
                      "': " + ec.message());
  return dir;
}

/// Seeds are always explicit: a missing seed is a configuration error, never
/// a silent wall-clock default.
inline std::uint64_t resolve_seed(const ConfigMap& cfg,
                                  const std::string& section,
                                  const CliOptions& opts) {
  if (opts.seed_override) return *opts.seed_override;
  return cfg.get_u64(section, "seed");
}

inline Vec single_point(const ConfigMap& cfg, const std::string& section,
                        const std::string& key) {
  const std::vector<Vec> pts = cfg.get_points(section, key);
  if (pts.size() != 1)
    throw ConfigError("config: " + section + "." + key +
                      " must hold exactly one point");
  return pts.front();
}

}  // namespace detail

/// Lazily built, shared DP value table for everything in one invocation that
/// needs the grid value function (shift oracles, adversarial policies, the
/// study reference).
class TableProvider {
 public:
  TableProvider(const ConfigMap& cfg, const Dynamics& dyn,
                const TerminalFn& terminal)
      : cfg_(&cfg), dyn_(&dyn), terminal_(&terminal) {}

  std::shared_ptr<const ValueTable> get() const {
    if (!cache_)
      cache_ = std::make_shared<const ValueTable>(
          dp_quasi_value(*dyn_, *terminal_, build_value_grid(*cfg_, *dyn_)));
    return cache_;
  }

 private:
  const ConfigMap* cfg_;
  const Dynamics* dyn_;
  const TerminalFn* terminal_;
  mutable std::shared_ptr<const ValueTable> cache_;
};

namespace detail {

inline std::vector<Vec> pbar_points(const ConfigMap& cfg,
                                    const Dynamics& dyn) {
  if (cfg.has("strategy", "pbar")) return cfg.get_points("strategy", "pbar");
  if (dyn.id == "bilinear") return bilinear_corner_controls();
  throw ConfigError("config: strategy.pbar is required for non-benchmark "
                    "systems");
}

inline std::vector<Vec> shift_points(const ConfigMap& cfg,
                                     const Dynamics& dyn) {
  if (cfg.has("strategy", "shift_points"))
    return cfg.get_points("strategy", "shift_points");
  if (cfg.has("strategy", "shift_net"))
    return dyn.control_set.epsilon_net(
        cfg.get_double("strategy", "shift_net"));
  return dyn.control_set.enumerate();
}

}  // namespace detail

/// Strategy family from [strategy]: (eps, partition) -> fresh feedback.
/// For the test-window strategies `eps` scales the window; the others ignore
/// it.  Kinds: ue (net test actions), ubar (explicit finite test set), ustar
/// (previous control as test), explicit (benchmark hand rule), constant.
inline StrategyFamily build_strategy_family(const ConfigMap& cfg,
                                            const Dynamics& dyn,
                                            const TableProvider& table) {
  const std::string kind = cfg.get_string("strategy", "kind");
  const int model_substeps = cfg.get_int("strategy", "model_substeps", 8);
  Vec u_star, v_star;
  if (cfg.has("strategy", "u_star"))
    u_star = detail::single_point(cfg, "strategy", "u_star");
  if (cfg.has("strategy", "v_star"))
    v_star = detail::single_point(cfg, "strategy", "v_star");

  if (kind == "constant") {
    const Vec u = detail::single_point(cfg, "strategy", "u");
    return [u](double, const Partition& part) {
      return std::make_unique<ConstantFeedback>(part, u);
    };
  }
  if (kind == "explicit") {
    if (dyn.id != "bilinear")
      throw ConfigError("config: the explicit strategy is specific to the "
                        "bilinear benchmark");
    Vec u0 = u_star.empty() ? Vec{1.0, 1.0} : u_star;
    return [u0](double, const Partition& part) {
      return std::make_unique<ExplicitBilinearFeedback>(part, u0);
    };
  }
  if (kind == "ustar") {
    PreviousControlStrategyConfig c;
    c.pbar = detail::pbar_points(cfg, dyn);
    c.u_star = u_star;
    c.v_star = v_star;
    c.model_substeps = model_substeps;
    auto oracle = std::make_shared<ValueTableOracle>(table.get());
    return [dyn, oracle, c](double, const Partition& part) {
      return std::make_unique<UstarFeedback>("ustar", dyn, part, oracle, c);
    };
  }
  if (kind == "ue" || kind == "ubar") {
    EpsilonStrategyConfig c;
    c.eps = cfg.get_double("strategy", "eps", 0.1);
    if (kind == "ubar" || cfg.has("strategy", "test_controls"))
      c.test_controls = cfg.get_points("strategy", "test_controls");
    else
      c.test_controls = dyn.control_set.epsilon_net(
          cfg.get_double("strategy", "test_net", 1.0));
    c.shift_set = detail::shift_points(cfg, dyn);
    c.u_star = u_star;
    c.v_star = v_star;
    c.model_substeps = model_substeps;
    auto oracle = std::make_shared<ValueTableOracle>(table.get());
    return [kind, dyn, oracle, c](double eps, const Partition& part) {
      EpsilonStrategyConfig cc = c;
      if (eps > 0.0) cc.eps = eps;
      return std::make_unique<UeFeedback>(kind, dyn, part, oracle,
                                          std::move(cc));
    };
  }
  throw ConfigError("config: unknown strategy.kind '" + kind + "'");
}

/// Single-run strategy handle at the eps given in [strategy] (if any).
inline StrategyHandle build_strategy(const ConfigMap& cfg, const Dynamics& dyn,
                                     const TableProvider& table) {
  StrategyHandle handle;
  handle.id = cfg.get_string("strategy", "kind");
  handle.eps = cfg.get_double("strategy", "eps", 0.0);
  StrategyFamily family = build_strategy_family(cfg, dyn, table);
  handle.make = [family = std::move(family), eps = handle.eps](
                    const Partition& part) { return family(eps, part); };
  return handle;
}

/// Disturbance for a single simulation, from [disturbance]: a constant
/// point, an explicit piecewise-constant signal, one member of a seeded
/// bang-bang bank, or the table adversary.
inline std::unique_ptr<DisturbancePolicy> build_disturbance(
    const ConfigMap& cfg, const Dynamics& dyn, const TableProvider& table,
    const CliOptions& opts) {
  const std::string kind = cfg.get_string("disturbance", "kind");
  if (kind == "constant") {
    const Vec v = detail::single_point(cfg, "disturbance", "value");
    return std::make_unique<SignalDisturbance>(
        "constant", Signal::constant(dyn.t0, dyn.theta, v));
  }
  if (kind == "piecewise") {
    const std::vector<double> breaks = cfg.get_doubles("disturbance", "breaks");
    std::vector<Vec> values = cfg.get_points("disturbance", "values");
    return std::make_unique<SignalDisturbance>(
        "piecewise", Signal(breaks, std::move(values), dyn.theta));
  }
  if (kind == "bangbang") {
    const std::uint64_t seed = detail::resolve_seed(cfg, "disturbance", opts);
    const double rate = cfg.get_double("disturbance", "switch_rate", 4.0);
    const int member = cfg.get_int("disturbance", "member", 0);
    if (member < 0)
      throw ConfigError("config: disturbance.member must be >= 0");
    const DisturbanceEnsemble bank =
        DisturbanceEnsemble::random_bang_bang(dyn, member + 1, rate, seed);
    return bank.members[static_cast<std::size_t>(member)].make();
  }
  if (kind == "adversarial")
    return std::make_unique<AdversarialValuePolicy>(dyn, table.get());
  throw ConfigError("config: unknown disturbance.kind '" + kind + "'");
}

/// Evaluation ensemble from [ensemble]: a seeded bang-bang bank, the table
/// adversary, or their union.
inline DisturbanceEnsemble build_ensemble(const ConfigMap& cfg,
                                          const Dynamics& dyn,
                                          const TableProvider& table,
                                          const CliOptions& opts) {
  const std::string kind = cfg.get_string("ensemble", "kind", "bangbang");
  const bool wants_bank =
      kind == "bangbang" || kind == "bangbang+adversarial";
  const bool wants_adv =
      kind == "adversarial" || kind == "bangbang+adversarial";
  if (!wants_bank && !wants_adv)
    throw ConfigError("config: unknown ensemble.kind '" + kind + "'");
  std::optional<DisturbanceEnsemble> out;
  if (wants_bank) {
    const std::uint64_t seed = detail::resolve_seed(cfg, "ensemble", opts);
    out = DisturbanceEnsemble::random_bang_bang(
        dyn, cfg.get_int("ensemble", "count", 100),
        cfg.get_double("ensemble", "switch_rate", 4.0), seed);
  }
  if (wants_adv) {
    const DisturbanceEnsemble adv =
        DisturbanceEnsemble::adversarial(dyn, table.get());
    out = out ? out->unite(adv, out->id + "+adversarial") : adv;
  }
  return *out;
}

/// `simulate`: one closed-loop run; writes trajectory/control/disturbance
/// CSVs, the surrogate log, and a key=value summary.
inline int cmd_simulate(const ConfigMap& cfg, const CliOptions& opts) {
  const Dynamics dyn = build_dynamics(cfg);
  const TerminalFn terminal = build_terminal(cfg, dyn);
  const TableProvider table(cfg, dyn, terminal);
  const Vec z0 = detail::single_point(cfg, "run", "z0");
  const int blocks = cfg.get_int("run", "blocks");
  const int substeps = cfg.get_int("run", "substeps", 8);
  const Partition part = Partition::uniform(dyn.t0, dyn.theta, blocks);

  const StrategyHandle strat = build_strategy(cfg, dyn, table);
  auto feedback = strat.make(part);
  auto disturbance = build_disturbance(cfg, dyn, table, opts);
  const ClosedLoopRun run =
      simulate_closed_loop(dyn, part, *feedback, *disturbance, z0, substeps);
  const double cost = terminal(run.x.back_state());

  const std::string dir = detail::resolve_out_dir(cfg, opts);
  const std::string digest = cfg.digest_hex();
  {
    auto f = open_output(dir + "/trajectory.csv");
    write_trajectory_csv(f, run.x, digest);
  }
  {
    auto f = open_output(dir + "/control.csv");
    write_signal_csv(f, run.u, "u", digest);
  }
  {
    auto f = open_output(dir + "/disturbance.csv");
    write_signal_csv(f, run.v, "v", digest);
  }
  if (!feedback->surrogate_log().empty()) {
    auto f = open_output(dir + "/surrogate.csv");
    write_surrogate_csv(f, feedback->surrogate_log(), digest);
  }
  {
    std::string body = "command=simulate\nstrategy=" + strat.id +
                       "\nblocks=" + std::to_string(blocks) +
                       "\ncost=" + fmt17(cost) + "\n";
    auto f = open_output(dir + "/summary.txt");
    write_report(f, body, digest);
  }
  std::cout << "cost=" << fmt17(cost) << "\n";
  return 0;
}

/// `value`: build the grid value table, persist it, and report the value at
/// the initial state.
inline int cmd_value(const ConfigMap& cfg, const CliOptions& opts) {
  const Dynamics dyn = build_dynamics(cfg);
  const TerminalFn terminal = build_terminal(cfg, dyn);
  const TableProvider table(cfg, dyn, terminal);
  const Vec z0 = detail::single_point(cfg, "run", "z0");
  const std::shared_ptr<const ValueTable> tab = table.get();
  const double value = tab->value(dyn.t0, z0);

  const std::string dir = detail::resolve_out_dir(cfg, opts);
  const std::string digest = cfg.digest_hex();
  {
    auto f = open_output(dir + "/value_table.txt");
    tab->save(f);
  }
  {
    std::string body = "command=value\nvalue=" + fmt17(value) +
                       "\ntime_steps=" + std::to_string(tab->time_steps()) +
                       "\n";
    auto f = open_output(dir + "/value.txt");
    write_report(f, body, digest);
  }
  std::cout << "value=" << fmt17(value) << "\n";
  return 0;
}

namespace detail {

inline std::vector<TimeState> check_samples(const ConfigMap& cfg,
                                            const Dynamics& dyn) {
  const std::vector<Vec> raw = cfg.get_points("check", "samples");
  std::vector<TimeState> out;
  for (const Vec& p : raw) {
    if (p.size() != static_cast<std::size_t>(dyn.state_dim) + 1)
      throw ConfigError("config: check.samples entries must be 't x1 .. xn'");
    out.push_back({p[0], Vec(p.begin() + 1, p.end())});
  }
  return out;
}

}  // namespace detail

/// `check`: run one structural check (assumption1 | assumption2 | saddle)
/// over config-given probe points; the verdict goes to report.txt and
/// stdout.  The exit code stays 0 whenever the check ran; the verdict is the
/// `result=` line.
inline int cmd_check(const ConfigMap& cfg, const CliOptions& opts) {
  const Dynamics dyn = build_dynamics(cfg);
  const std::string kind = cfg.get_string("check", "kind");
  const double tol_f = cfg.get_double("check", "tol_f", -1.0);
  const std::vector<TimeState> probes = detail::check_samples(cfg, dyn);

  CheckReport report;
  if (kind == "assumption1") {
    report = check_assumption1(dyn, cfg.get_points("check", "test_set"),
                               probes, tol_f);
  } else if (kind == "assumption2" || kind == "saddle") {
    const Vec s = detail::single_point(cfg, "check", "s");
    if (s.size() != static_cast<std::size_t>(dyn.state_dim))
      throw ConfigError("config: check.s must have state dimension");
    std::vector<ShiftSample> shifted;
    for (const TimeState& p : probes) shifted.push_back({p.t, p.x, s});
    if (kind == "assumption2") {
      std::vector<Vec> pbar = cfg.has("check", "pbar")
                                  ? cfg.get_points("check", "pbar")
                                  : detail::pbar_points(cfg, dyn);
      report = check_assumption2(dyn, pbar, shifted, tol_f);
    } else {
      report = check_saddle(dyn, shifted,
                            cfg.get_double("check", "tol", 1e-6));
    }
  } else {
    throw ConfigError("config: unknown check.kind '" + kind + "'");
  }

  const std::string dir = detail::resolve_out_dir(cfg, opts);
  {
    auto f = open_output(dir + "/report.txt");
    write_report(f, report.to_text(), cfg.digest_hex());
  }
  std::cout << report.to_text();
  return 0;
}

/// `study`: sup-cost refinement study of a strategy family against a fixed
/// ensemble, graded against the grid reference value; optionally followed by
/// the guaranteed-result chain comparison at the finest partition.
inline int cmd_study(const ConfigMap& cfg, const CliOptions& opts) {
  const Dynamics dyn = build_dynamics(cfg);
  const TerminalFn terminal = build_terminal(cfg, dyn);
  const TableProvider table(cfg, dyn, terminal);
  const Vec z0 = detail::single_point(cfg, "run", "z0");
  const int substeps = cfg.get_int("run", "substeps", 8);

  const std::vector<double> blocks_raw = cfg.get_doubles("study", "blocks");
  std::vector<double> eps_raw{0.0};
  if (cfg.has("study", "eps")) eps_raw = cfg.get_doubles("study", "eps");
  if (eps_raw.size() != 1 && eps_raw.size() != blocks_raw.size())
    throw ConfigError("config: study.eps must be one value or match "
                      "study.blocks");
  std::vector<StudySchedule> schedule;
  for (std::size_t k = 0; k < blocks_raw.size(); ++k)
    schedule.push_back(
        {eps_raw[eps_raw.size() == 1 ? 0 : k],
         static_cast<int>(blocks_raw[k])});

  const StrategyFamily family = build_strategy_family(cfg, dyn, table);
  const std::string strategy_id = cfg.get_string("strategy", "kind");
  const DisturbanceEnsemble ensemble = build_ensemble(cfg, dyn, table, opts);

  const double reference = cfg.has("study", "reference")
                               ? cfg.get_double("study", "reference")
                               : table.get()->value(dyn.t0, z0);
  const double trend_tol = cfg.get_double("study", "trend_tol", 0.1);
  const double lb_tol = cfg.get_double("study", "lb_tol", 0.02);

  const StudyResult study = convergence_study(
      dyn, terminal, strategy_id, family, schedule, ensemble, z0, substeps,
      reference, trend_tol, lb_tol, opts.jobs);

  const std::string dir = detail::resolve_out_dir(cfg, opts);
  const std::string digest = cfg.digest_hex();
  {
    auto f = open_output(dir + "/study.jsonl");
    write_study_jsonl(f, study, digest);
  }
  {
    auto f = open_output(dir + "/study.csv");
    write_study_csv(f, study, digest);
  }
  for (const StudyPoint& pt : study.points)
    std::cout << "level eps=" << fmt17(pt.eps) << " blocks=" << pt.blocks
              << " sup=" << fmt17(pt.estimate.sup_cost)
              << " argmax=" << pt.estimate.argmax_member << "\n";
  std::cout << "summary reference=" << fmt17(study.reference) << " monotone="
            << (study.monotone ? "true" : "false") << " approaches="
            << (study.approaches ? "true" : "false") << " lower_bound_ok="
            << (study.lower_bound_ok ? "true" : "false") << "\n";

  if (cfg.get_bool("study", "chain", false)) {
    const StudySchedule fin = schedule.back();
    const Partition part = Partition::uniform(dyn.t0, dyn.theta, fin.blocks);
    StrategyHandle handle{strategy_id, fin.eps,
                          [&family, eps = fin.eps](const Partition& p) {
                            return family(eps, p);
                          }};
    const std::uint64_t bank_seed = detail::resolve_seed(cfg, "ensemble", opts);
    const DisturbanceEnsemble bank = DisturbanceEnsemble::random_bang_bang(
        dyn, cfg.get_int("ensemble", "count", 100),
        cfg.get_double("ensemble", "switch_rate", 4.0), bank_seed);
    const DisturbanceEnsemble bank2 = DisturbanceEnsemble::random_bang_bang(
        dyn, cfg.get_int("study", "chain_count", 50),
        cfg.get_double("ensemble", "switch_rate", 4.0),
        cfg.has("study", "chain_seed") ? cfg.get_u64("study", "chain_seed")
                                       : bank_seed + 1);
    const DisturbanceEnsemble adv =
        DisturbanceEnsemble::adversarial(dyn, table.get());

    const double gp = estimate_guaranteed_result(dyn, terminal, handle, bank,
                                                 part, z0, substeps, opts.jobs)
                          .sup_cost;
    const double gc = std::max(
        gp, estimate_guaranteed_result(dyn, terminal, handle, bank2, part, z0,
                                       substeps, opts.jobs)
                .sup_cost);
    const double gs = std::max(
        gc, estimate_guaranteed_result(dyn, terminal, handle, adv, part, z0,
                                       substeps, opts.jobs)
                .sup_cost);
    const ChainReport chain = chain_check(
        reference, gp, gc, gs, cfg.get_double("study", "chain_tol", 0.02));
    {
      auto f = open_output(dir + "/chain.txt");
      write_report(f, chain.to_text(), digest);
    }
    std::cout << "chain gq=" << fmt17(chain.gq) << " gp=" << fmt17(chain.gp)
              << " gc=" << fmt17(chain.gc) << " gs=" << fmt17(chain.gs)
              << " result=" << (chain.pass ? "pass" : "fail") << "\n";
  }
  return 0;
}

}  // namespace guarctl
