// Command-line front end: simulate | value | check | study, each driven by
// an INI-style experiment config.  Exit codes: 0 success, 1 configuration or
// validation error, 2 numerical failure at run time.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <guarctl/guarctl.hpp>

int main(int argc, char** argv) {
  CLI::App app{"worst-case control: simulation, value grids, structural "
               "checks and convergence studies"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 1;
  std::uint64_t seed_override = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_dir,
                    "output directory (overrides [output].dir)");
    sub->add_option("--jobs", jobs, "parallel workers for ensemble runs")
        ->check(CLI::PositiveNumber);
    return sub->add_option("--seed-override", seed_override,
                           "replace the configured random seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "one closed-loop run");
  CLI::Option* sim_seed = add_common(sim);
  CLI::App* val = app.add_subcommand("value", "build the grid value table");
  CLI::Option* val_seed = add_common(val);
  CLI::App* chk = app.add_subcommand("check", "structural checks");
  CLI::Option* chk_seed = add_common(chk);
  CLI::App* stu = app.add_subcommand("study", "refinement study");
  CLI::Option* stu_seed = add_common(stu);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  guarctl::CliOptions opts;
  opts.out_dir = out_dir;
  opts.jobs = jobs;
  for (const CLI::Option* o : {sim_seed, val_seed, chk_seed, stu_seed})
    if (o->count() > 0) opts.seed_override = seed_override;

  try {
    const guarctl::ConfigMap cfg = guarctl::ConfigMap::parse_file(config_path);
    if (sim->parsed()) return guarctl::cmd_simulate(cfg, opts);
    if (val->parsed()) return guarctl::cmd_value(cfg, opts);
    if (chk->parsed()) return guarctl::cmd_check(cfg, opts);
    if (stu->parsed()) return guarctl::cmd_study(cfg, opts);
    std::cerr << "error: no subcommand given\n";
    return 1;
  } catch (const guarctl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const guarctl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
