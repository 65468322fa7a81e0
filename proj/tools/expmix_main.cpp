#include <string>

#include "CLI11.hpp"
#include "expmix/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"operator-theoretic mixing diagnostics for expanding "
               "semiflows and hyperbolic skew products"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool have_seed = false, have_out = false, have_workers = false;

  app.add_option("--config", config_path, "configuration file (key = value)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed override");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* w_opt = app.add_option("--workers", workers, "worker thread count");

  const std::vector<std::string> subs = {"check",     "uni",    "spectrum",
                                         "dolgopyat", "cone",   "correlate",
                                         "laplace",   "skew",   "lorenz"};
  for (const auto& name : subs) app.add_subcommand(name)->fallthrough(true);

  CLI11_PARSE(app, argc, argv);
  have_seed = seed_opt->count() > 0;
  have_out = out_opt->count() > 0;
  have_workers = w_opt->count() > 0;

  expmix::cli::Config cfg;
  try {
    if (!config_path.empty())
      cfg = expmix::cli::Config::from_file(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (have_seed) cfg.set("run.seed", std::to_string(seed));
  if (have_out) cfg.set("run.out", out_dir);
  if (have_workers) cfg.set("run.workers", std::to_string(workers));

  return expmix::cli::run(app.get_subcommands().front()->get_name(), cfg);
}
