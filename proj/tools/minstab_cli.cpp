#include "minstab/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Stability criterion toolkit for nonparametric minimal submanifolds"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"criterion", "Check the closed-form stability criterion on the configured graph"},
      {"analyze", "Criterion plus the smallest eigenvalue of the second variation"},
      {"flow", "Scale the initial data and run mean curvature flow"},
      {"verify-algebra", "Randomized checks of the pointwise inequality"},
      {"pipeline", "Scale, flow, check the criterion and estimate the second variation spectrum"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* cfg = sub->add_option("--config", config_path, "INI configuration file");
    if (name != "verify-algebra") cfg->required();
    sub->add_option("--seed", seed, "Seed overriding [constants] seed");
    sub->add_option("--out", out_dir, "Output directory overriding [output] dir");
    sub->add_option("--mode", mode, "Criterion mode")->check(CLI::IsMember({"slope", "omega_paper", "omega_derived"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : minstab::kExitError;
  }

  try {
    const minstab::Subcommand command = minstab::parse_subcommand(app.get_subcommands().front()->get_name());
    minstab::RunConfig config = config_path.empty() ? minstab::parse_config("", command)
                                                    : minstab::load_config(config_path, command);
    if (seed) config.constants.seed = *seed;
    if (out_dir) config.output.dir = *out_dir;
    if (mode) config.constants.mode = minstab::parse_mode(*mode);
    const minstab::CommandResult result = minstab::run_command(config, std::cout);
    std::cout << "report: " << config.output.dir << "/report.json (exit " << result.exit_code << ")\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return minstab::kExitError;
}
