// Command-line front end: privleak <subcommand> <config.json> [-o out.csv] [--threads N]

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "privleak/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Change-time privacy analysis for step inputs to LTI systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_path;
  std::size_t threads = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"bound", "per-tau exponents and the change-time variance bound"},
      {"directions", "most private and fully private input directions"},
      {"optimize", "nominal vs privacy-regularized steady-state inputs"},
      {"simulate", "Monte Carlo trials with the maximum-likelihood change-time estimator"},
      {"zero-check", "verify a supplied transmission-zero direction"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON analysis description")->required();
    sub->add_option("-o,--output", output_path, "write CSV here instead of stdout");
    sub->add_option("--threads", threads, "trial worker threads (simulate); overrides PRIVLEAK_THREADS");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: UsageError: " << e.what() << '\n';
    return privleak::cli::kConfigError;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  if (output_path.empty()) {
    return privleak::cli::run_file(subcommand, config_path, std::cout, std::cerr, threads);
  }
  std::ofstream out(output_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: IOError: cannot open " << output_path << '\n';
    return privleak::cli::kConfigError;
  }
  return privleak::cli::run_file(subcommand, config_path, out, std::cerr, threads);
}
