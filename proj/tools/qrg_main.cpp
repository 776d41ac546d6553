#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "qrg/error.hpp"
#include "qrg/kernels.hpp"

int main(int argc, char** argv) {
  using namespace qrg::cli;
  CLI::App app{"Random walks on graphs with a random perfect matching"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::uint64_t seed = 0;
  int threads = 0;
  bool summary = false;
  app.add_option("--config", config_path, "JSON experiment config");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (default 0xC0FFEE)");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_flag("--summary", summary, "print fits and pass/fail lines");

  for (const char* name : {"generate", "mix", "spectral", "entropy", "couple", "verify"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInvalidConfig;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (*seed_opt) cfg.master = seed;
    if (!out.empty()) cfg.out = out;
    validate(cfg);
  } catch (const qrg::Error& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kInvalidConfig;
  }
  if (threads > 0) qrg::set_threads(threads);

  RunOptions opts;
  opts.summary = summary;
  return dispatch(app.get_subcommands().front()->get_name(), cfg, opts);
}
