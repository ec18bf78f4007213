#include <iostream>

#include <CLI11.hpp>

#include "witten/runner.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path,
             const std::string& out_dir, int threads, long seed) {
  witten::RunContext ctx;
  ctx.config = witten::load_json_file(config_path);
  ctx.config_dir = std::filesystem::absolute(config_path).parent_path();
  ctx.out_dir = out_dir.empty() ? std::filesystem::current_path()
                                : std::filesystem::path(out_dir);
  ctx.threads = std::max(1, threads);
  ctx.seed = seed;
  // the config's own command field, when present, must match the subcommand
  if (ctx.config.contains("command") &&
      ctx.config.at("command").get<std::string>() != command)
    throw witten::ValidationError("config command '" +
                                  ctx.config.at("command").get<std::string>() +
                                  "' does not match subcommand '" + command + "'");
  witten::run_command(ctx, command);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"witten-index-lab: spectral shift functions, cutoff "
               "convergence, and the resolvent-regularized Witten index"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1;
  long seed = 0;

  for (const char* name : {"ssf", "dirac", "converge", "check", "witten"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config JSON path")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--seed", seed, "seed recorded in reports");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(command, config_path, out_dir, threads, seed);
  } catch (const witten::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const witten::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 4;
  } catch (const witten::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  }
}
