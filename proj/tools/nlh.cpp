// Command-line front end: nlh <convergence|iterations|contraction|solve|mesh-info>
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
// 3 solver did not converge (solve only; the trace is still written).

#include <iostream>

#include "CLI11.hpp"
#include "nlh/experiments.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out;
  std::vector<std::string> sets;
};

nlh::RunConfig resolve(const Options& o) {
  std::vector<std::string> overrides = o.sets;
  if (!o.out.empty()) overrides.push_back("output.directory=" + o.out);
  if (o.config_path.empty()) return nlh::parse_config_text("", overrides);
  return nlh::load_config(o.config_path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element solver for the Helmholtz equation with a Kerr nonlinearity on the unit disk"};
  app.require_subcommand(1);

  Options opts;
  using Command = int (*)(const nlh::RunConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"convergence", "h-convergence study against a reference or analytic solution", nlh::cmd_convergence},
      {"iterations", "fixed-point iteration counts over a parameter sweep", nlh::cmd_iterations},
      {"contraction", "contraction factors of both schemes over f or epsilon", nlh::cmd_contraction},
      {"solve", "single solve with mesh, solution, trace and manifest dumps", nlh::cmd_solve},
      {"mesh-info", "mesh statistics per level and degree", nlh::cmd_mesh_info},
  };
  Command selected = nullptr;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opts.config_path, "config file (sectioned key = value)");
    sub->add_option("-o,--out", opts.out, "output directory (overrides output.directory)");
    sub->add_option("-s,--set", opts.sets, "override, e.g. --set problem.k=16,32")->take_all();
    sub->callback([&selected, f = fn] { selected = f; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  nlh::RunConfig config;
  try {
    config = resolve(opts);
  } catch (const nlh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    return selected(config, std::cout);
  } catch (const nlh::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
