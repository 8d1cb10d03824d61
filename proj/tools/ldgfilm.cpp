#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "ldg/error.hpp"
#include "ldg/harness.hpp"
#include "ldg/kernels.hpp"

namespace {

void print_summary(const ldg::Outcome& o) {
  for (const auto& c : o.report["checks"]) {
    std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << " = "
              << c["value"].dump() << " (" << c["relation"].get<std::string>() << " " << c["tolerance"].dump()
              << ")\n";
  }
  if (o.report.contains("error")) std::cerr << "error: " << o.report["error"].get<std::string>() << '\n';
  std::cout << "exit " << o.exit_code << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landau-de Gennes thin-film defect simulator"};
  app.set_version_flag("--version", ldg::kVersion);
  app.require_subcommand(1);

  std::string out = "out";
  int workers = 0;
  app.add_option("--out", out, "output directory");
  app.add_option("--workers", workers, "OpenMP worker count (default: LDG_WORKERS or all cores)");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a config through its recipe");
  run_cmd->add_option("config", config_path, "config file")->required();

  std::string param = "eps";
  double from = 0.2, to = 0.025;
  int rungs = 7;
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter and aggregate");
  sweep_cmd->add_option("config", config_path, "config file")->required();
  sweep_cmd->add_option("--param", param, "eps, k, or resolution")
      ->check(CLI::IsMember({"eps", "k", "resolution"}));
  sweep_cmd->add_option("--from", from, "first value");
  sweep_cmd->add_option("--to", to, "last value");
  sweep_cmd->add_option("--rungs", rungs, "number of values");

  int k = 2, scan = 64;
  auto* wmap_cmd = app.add_subcommand("wmap", "renormalized-energy landscape and argmin");
  wmap_cmd->add_option("config", config_path, "config file")->required();
  wmap_cmd->add_option("--k", k, "number of defects");
  wmap_cmd->add_option("--scan", scan, "scan lattice size");

  for (auto* sub : {run_cmd, sweep_cmd, wmap_cmd}) {
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "OpenMP worker count");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ldg::kExitConfigInvalid;
  }

  if (workers <= 0) {
    if (const char* env = std::getenv("LDG_WORKERS")) workers = std::atoi(env);
  }
  ldg::set_worker_count(workers);

  ldg::RunConfig cfg;
  try {
    cfg = ldg::load_config(config_path);
  } catch (const ldg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ldg::kExitConfigInvalid;
  }
  cfg.out = out;

  ldg::Outcome o;
  if (run_cmd->parsed()) {
    o = ldg::run(cfg);
  } else if (sweep_cmd->parsed()) {
    const auto p = param == "eps" ? ldg::SweepParam::Eps
                   : param == "k" ? ldg::SweepParam::K
                                  : ldg::SweepParam::Resolution;
    o = ldg::sweep(cfg, p, from, to, rungs);
  } else {
    o = ldg::wmap(cfg, k, scan);
  }
  print_summary(o);
  return o.exit_code;
}
