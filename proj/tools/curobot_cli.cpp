#include <map>
#include <thread>

#include "CLI11.hpp"
#include "curobot/cli.hpp"

int main(int argc, char ** argv)
{
  using namespace curobot;

  CLI::App app{"CuRobot cube-robot simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string feedback;
  std::string controller;

  auto * run = app.add_subcommand("run", "simulate a scenario file, write trace.csv and summary.json");
  run->add_option("scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  auto * seed_opt = run->add_option("--seed", seed, "override run.seed");
  run->add_option("--feedback", feedback, "override run.feedback")->check(CLI::IsMember({"truth", "estimator"}));
  run->add_option("--controller", controller, "override controller.mode")->check(CLI::IsMember({"mpc", "pid"}));

  int repeats = 10;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string base;
  auto * sweep = app.add_subcommand("line-sweep", "line heading sweep 0..45 deg, writes sweep.csv");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--repeats", repeats, "seeds per heading")->check(CLI::PositiveNumber);
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--scenario", base, "base scenario (default: built-in line_sweep)");

  auto * validate = app.add_subcommand("validate", "check a scenario file and print the effective config");
  validate->add_option("scenario", scenario_path, "scenario JSON")->required();

  std::string preset_dir = "presets";
  auto * presets = app.add_subcommand("presets", "write the built-in presets as JSON");
  presets->add_option("--out", preset_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }

  if (run->parsed()) {
    cli::RunOverrides o;
    if (seed_opt->count() > 0) {
      o.seed = seed;
    }
    if (!feedback.empty()) {
      o.feedback = feedback == "truth" ? Feedback::Truth : Feedback::Estimator;
    }
    if (!controller.empty()) {
      o.controller = controller == "mpc" ? ControllerMode::Mpc : ControllerMode::Pid;
    }
    return cli::cmd_run(scenario_path, out_dir, o);
  }
  if (sweep->parsed()) {
    std::optional<std::filesystem::path> base_path;
    if (!base.empty()) {
      base_path = base;
    }
    return cli::cmd_line_sweep(out_dir, repeats, threads, base_path);
  }
  if (validate->parsed()) {
    return cli::cmd_validate(scenario_path);
  }
  return cli::cmd_presets(preset_dir);
}
