#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kvflow/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Geometric heat flow laboratory for vector fields on closed manifolds"};
  app.require_subcommand(1);

  kvflow::CliOptions opt;
  std::string verify_suite;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "configuration file")->required();
    sub->add_option("--out", opt.out_dir, "output directory override");
    sub->add_option("--seed", opt.seed, "initial-field seed override")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* run = app.add_subcommand("run", "evolve a configured initial field");
  add_common(run);
  CLI::App* spectrum = app.add_subcommand("spectrum", "operator eigenvalues and kernel");
  add_common(spectrum);
  CLI::App* verify =
      app.add_subcommand("verify", "identity suites: yano, energy, einstein, ns-decay");
  verify->add_option("suite", verify_suite, "yano|energy|einstein|ns-decay")->required();
  add_common(verify);
  CLI::App* err = app.add_subcommand("err", "limit energy of the configured run");
  add_common(err);
  CLI::App* plotdata = app.add_subcommand("plotdata", "per-quantity series from monitors.csv");
  add_common(plotdata);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  opt.seed_set = run->count("--seed") + spectrum->count("--seed") + verify->count("--seed") +
                     err->count("--seed") + plotdata->count("--seed") >
                 0;

  try {
    if (run->parsed()) return kvflow::run_command(opt);
    if (spectrum->parsed()) return kvflow::spectrum_command(opt);
    if (verify->parsed()) return kvflow::verify_command(verify_suite, opt);
    if (err->parsed()) return kvflow::err_command(opt);
    if (plotdata->parsed()) return kvflow::plotdata_command(opt);
  } catch (const kvflow::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
