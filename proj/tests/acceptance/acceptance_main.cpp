// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ldg/diagnostics.hpp"
#include "ldg/error.hpp"
#include "ldg/harness.hpp"
#include "ldg/kernels.hpp"
#include "ldg/solver.hpp"

using namespace ldg;
namespace fs = std::filesystem;

namespace {

fs::path g_out;

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome run_text(const std::string& text, const std::string& name) {
  RunConfig cfg = parse_config(text);
  cfg.out = g_out / name;
  return run(cfg);
}

std::string failed_checks(const Outcome& o) {
  std::string s;
  if (o.report.contains("error")) s += " error=" + o.report["error"].get<std::string>();
  for (const auto& c : o.report["checks"])
    if (!c["passed"].get<bool>()) s += " " + c["name"].get<std::string>() + "=" + c["value"].dump();
  return s;
}

double check_value(const Outcome& o, const std::string& name) {
  for (const auto& c : o.report["checks"])
    if (c["name"] == name) return c["value"].get<double>();
  return std::nan("");
}

Eigen::Matrix3d to_eigen(const Mat3& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = m[i][j];
  return e;
}

Verdict algebraic_identities() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const BulkSpec bulk = BulkSpec::classic(-1.0, 1.0, 1.0);
  const ModelParams sets[] = {ModelParams(1.0, 0.3, 0.5, bulk, 0.1), ModelParams(1.0, -0.2, -0.5, bulk, 0.1),
                              ModelParams(0.7, 0.4, -0.4, bulk, 0.1)};
  double e_mix = 0.0;
  for (int it = 0; it < 100000; ++it) {
    GradientSample g;
    g.p[0][0] = n(rng), g.p[0][1] = n(rng), g.p[1][0] = n(rng), g.p[1][1] = n(rng);
    g.r[0] = n(rng), g.r[1] = n(rng);
    for (const ModelParams& p : sets) {
      const double a = g_e_mixed(g, p), b = g_e_sos(g, p);
      e_mix = std::max(e_mix, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
  }
  double e_eig = 0.0, e_trip = 0.0, e_inv = 0.0;
  for (int it = 0; it < 20000; ++it) {
    const PRPoint x{{u(rng), u(rng)}, u(rng)};
    const QTensor q = from_pr(x);
    const Eigen::Matrix3d m = to_eigen(q.matrix());
    std::array<double, 3> mine = eigensystem_pr(x).eigenvalues;
    std::sort(mine.begin(), mine.end());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    for (int i = 0; i < 3; ++i) e_eig = std::max(e_eig, std::abs(mine[i] - es.eigenvalues()(i)));
    const PRPoint y = to_pr(q);
    const double scale = std::max(1.0, std::abs(x.p.x) + std::abs(x.p.y) + std::abs(x.r));
    e_trip = std::max({e_trip, std::abs(y.p.x - x.p.x) / scale, std::abs(y.p.y - x.p.y) / scale,
                       std::abs(y.r - x.r) / scale});
    const Invariants inv = invariants(x);
    const double s2 = 1.0 + m.squaredNorm();
    e_inv = std::max({e_inv, std::abs(inv.det - m.determinant()) / (s2 * s2), std::abs(inv.norm2 - m.squaredNorm()) / s2});
  }
  const bool ok = e_mix < 1e-12 && e_eig < 1e-10 && e_trip < 1e-14 && e_inv < 1e-12;
  return {ok, fmt("mixed-vs-sos %.2e (<1e-12)", e_mix) + fmt(", eig %.2e (<1e-10)", e_eig) +
                  fmt(", roundtrip %.2e", e_trip) + fmt(", invariants %.2e (<1e-12)", e_inv)};
}

template <class Model>
double gradient_error(const Grid& g, Model model, std::vector<double> x, std::uint64_t seed) {
  const int N = Model::N;
  Assembler<Model> a(g, model);
  std::vector<double> grad(x.size());
  a.evaluate(x.data(), grad.data());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (int dir = 0; dir < 10; ++dir) {
    std::vector<double> xp = x, xm = x;
    const double h = 1e-5;
    double dd = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
      if (!g.interior(n)) continue;
      for (int k = 0; k < N; ++k) {
        const double d = nd(rng);
        xp[n * N + k] += h * d;
        xm[n * N + k] -= h * d;
        dd += grad[n * N + k] * d;
      }
    }
    const double fd = (a.evaluate(xp.data(), nullptr).total() - a.evaluate(xm.data(), nullptr).total()) / (2 * h);
    worst = std::max(worst, std::abs(fd - dd) / std::abs(dd));
  }
  return worst;
}

Verdict gradient_check() {
  auto grid = Grid::build(ShapeSpec{RoundedRect{2.0, 2.0, 0.3}, {0.0, 0.0}}, 16);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_values = [&](int N) {
    std::vector<double> x(static_cast<std::size_t>(grid->num_nodes()) * N, 0.0);
    for (int n = 0; n < grid->num_nodes(); ++n)
      if (grid->active(n))
        for (int k = 0; k < N; ++k) x[n * N + k] = u(rng);
    return x;
  };
  const BulkSpec bulk = BulkSpec::classic(-1.0, 1.0, 1.0);
  double worst = 0.0;
  worst = std::max(worst, gradient_error(*grid, LdGDensity(ModelParams(1, 0, 0, bulk, 0.2)), random_values(3), 1));
  worst = std::max(worst, gradient_error(*grid, LdGDensity(ModelParams(1, 0.5, 0.5, bulk, 0.2)), random_values(3), 2));
  worst = std::max(worst, gradient_error(*grid, LdGDensity(ModelParams(1, -0.3, 0.1, bulk, 0.1)), random_values(3), 3));
  worst = std::max(worst, gradient_error(*grid, GLDensity(0.2), random_values(2), 4));
  worst = std::max(worst, gradient_error(*grid, CSHDensity(0.2), random_values(2), 5));
  return {worst < 1e-6, fmt("32x32 grid, 10 directions x 5 models, max rel err %.2e (<1e-6)", worst)};
}

Verdict shift_check() {
  auto grid = Grid::build(ShapeSpec{Disk{1.0}, {0.0, 0.0}}, 32);
  const BulkSpec bulk = BulkSpec::classic(-1.0, 1.0, 1.0);
  double worst_rel = 0.0, worst_dep = 0.0;
  for (const auto& L : {std::array<double, 3>{1, 0.5, 0.5}, std::array<double, 3>{1, 0.2, 0.6}}) {
    const ModelParams p(L[0], L[1], L[2], bulk, 0.2);
    for (int k : {1, 2}) {
      const BoundaryData bd = make_boundary_data(*grid, p.s(), k);
      double first = 0.0;
      for (std::uint64_t seed : {1, 2, 3}) {
        const Field f = init_field(grid, bd, RandomInit{seed});
        const ShiftCheck c = corollary_shift_check(f, p);
        worst_rel = std::max(worst_rel, c.rel_error);
        if (seed == 1) first = c.shift;
        worst_dep = std::max(worst_dep, std::abs(c.shift - first) / std::abs(first));
      }
    }
  }
  return {worst_rel < 0.03 && worst_dep < 1e-10,
          fmt("64x64 disk, k=1,2: rel err %.2e (<3%%)", worst_rel) + fmt(", field dependence %.2e (<1e-10)", worst_dep)};
}

Verdict theorem_a() {
  std::string detail;
  bool ok = true;
  for (const char* shape : {"disk", "ellipse"}) {
    for (int k : {1, 2, 3}) {
      const std::string text = std::string("[run]\nrecipe = theorem-A\n[domain]\nshape = ") + shape +
                               "\nresolution = 64\n[boundary]\nk = " + std::to_string(k) +
                               "\n[schedule]\neps_max = 0.2\neps_min = 0.03\nrungs = 6\ntol = 1e-7\n"
                               "[checks]\nenabled = defects,well,bulk_bound\nmu = 0.1\nrho = 0.25\n";
      const Outcome o = run_text(text, std::string("theorem_a_") + shape + std::to_string(k));
      const bool pass = o.exit_code == kExitOk;
      ok = ok && pass;
      detail += std::string(" ") + shape + " k=" + std::to_string(k) + ":" +
                (pass ? fmt("ok(bad/eps2 x%.2f)", check_value(o, "bad_area_over_eps2_growth"))
                      : "fail" + failed_checks(o));
    }
  }
  return {ok, "128x128, eps 0.2->0.03;" + detail};
}

Verdict theorem_b() {
  std::string detail;
  bool ok = true;
  for (const auto& L : {std::array<double, 3>{1, 0, 0}, std::array<double, 3>{1, 0.5, 0.5}}) {
    const std::string text = "[run]\nrecipe = theorem-B\n[domain]\nshape = disk\nresolution = 64\n[model]\nL1 = " +
                             fmt("%g", L[0]) + "\nL2 = " + fmt("%g", L[1]) + "\nL3 = " + fmt("%g", L[2]) +
                             "\n[boundary]\nk = 2\n[schedule]\neps_max = 0.2\neps_min = 0.03\nrungs = 6\n"
                             "tol = 1e-7\n[checks]\nenabled = defects,energy_fit,argmin,annulus\n";
    const Outcome o = run_text(text, "theorem_b_L2_" + fmt("%g", L[1]));
    const bool pass = o.exit_code == kExitOk;
    ok = ok && pass;
    detail += fmt(" L2=L3=%g:", L[1]) + fmt(" slope err %.2e (<5%%)", check_value(o, "energy_slope_rel_error")) +
              fmt(", argmin dist %.3g", check_value(o, "defects_to_argmin_W")) +
              fmt(", annulus err %.2e (<2%%)", check_value(o, "annulus_identity")) + (pass ? "" : failed_checks(o));
  }
  return {ok, "k=2 disk;" + detail};
}

Verdict theorem_c() {
  const Outcome o = run_text(
      "[run]\nrecipe = theorem-C\n[domain]\nresolution = 64\n[boundary]\nk = 1\n"
      "[schedule]\neps_max = 0.2\neps_min = 0.025\nrungs = 7\ntol = 1e-7\n",
      "theorem_c");
  const bool ok = o.exit_code == kExitOk;
  return {ok, fmt("CSH k=1: slope %.4f", o.report["energy_fit"]["slope"].get<double>()) +
                  fmt(" vs pi, rel err %.2e (<5%%)", check_value(o, "energy_slope_rel_error")) +
                  fmt(", vortices %g", check_value(o, "defect_count")) + (ok ? "" : failed_checks(o))};
}

Verdict pohozaev() {
  const Outcome o = run_text(
      "[run]\nrecipe = pohozaev\n[domain]\nresolution = 64\n[model]\nL2 = 0.5\nL3 = 0.5\n[boundary]\nk = 2\n"
      "[schedule]\neps_max = 0.2\neps_min = 0.05\nrungs = 4\ntol = 1e-8\n",
      "pohozaev");
  const bool ladder_ok = o.exit_code == kExitOk;

  const double eps = 0.1;
  const ModelParams p(1.0, 0.5, 0.5, BulkSpec::classic(-1.0, 1.0, 1.0), eps);
  std::vector<double> resid;
  for (double res : {32.0, 64.0, 128.0}) {
    auto g = Grid::build(ShapeSpec{Disk{1.0}, {0.0, 0.0}}, res);
    const BoundaryData bd = make_boundary_data(*g, p.s(), 2);
    Field f = init_field(g, bd, ProductAnsatz{{{-0.4, 0.0}, {0.4, 0.0}}, eps});
    SolveSchedule s;
    s.eps = {eps};
    s.tol = 1e-9;
    minimize(f, p, s);
    resid.push_back(std::abs(pohozaev_check(f, p).residual));
  }
  const double o1 = std::log2(resid[0] / resid[1]), o2 = std::log2(resid[1] / resid[2]);
  const bool ok = ladder_ok && std::min(o1, o2) >= 0.8;
  return {ok, std::string("inequality at every rung: ") + (ladder_ok ? "yes" : "no" + failed_checks(o)) +
                  fmt("; residual %.2e", resid[0]) + fmt(" -> %.2e", resid[1]) + fmt(" -> %.2e", resid[2]) +
                  fmt(" on 64/128/256 grids, orders %.2f", o1) + fmt(", %.2f (>=0.8)", o2)};
}

Verdict cell_problem() {
  const Outcome o = run_text(
      "[run]\nrecipe = cell-problem\n[domain]\nresolution = 64\n[model]\nL2 = 0.5\nL3 = 0.5\n"
      "[checks]\nenabled = cell\ntau = 0.4,0.3,0.2,0.14,0.1\n",
      "cell_problem");
  const bool ok = o.exit_code == kExitOk;
  const auto& c = o.report["cell"];
  return {ok, fmt("monotone slack %.1e (<=1e-6)", check_value(o, "cell_monotone_slack")) +
                  fmt(", beta dev %.1e (<0.5%%)", check_value(o, "cell_beta_rel_dev")) +
                  fmt(", gamma %.4f", c["gamma"].get<double>()) + fmt(", fit rms %.2e", c["fit_rms"].get<double>()) +
                  (ok ? "" : failed_checks(o))};
}

Verdict determinism_refinement() {
  const std::string text =
      "[run]\nrecipe = theorem-A\nseed = 5\n[domain]\nshape = ellipse\nresolution = 32\n[boundary]\nk = 2\n"
      "[schedule]\neps_max = 0.2\neps_min = 0.1\nrungs = 3\nperturb = 1e-3\n[init]\nrandom_starts = 1\n";
  set_worker_count(1);
  run_text(text, "determinism_1");
  set_worker_count(3);
  run_text(text, "determinism_2");
  set_worker_count(0);
  bool identical = true;
  for (const char* f : {"report.json", "field.csv", "defects.csv"}) {
    identical = identical && slurp(g_out / "determinism_1" / f) == slurp(g_out / "determinism_2" / f);
  }

  RunConfig cfg = parse_config("[model]\nL2 = 0.5\nL3 = 0.5\n[boundary]\nk = 1\n[schedule]\neps = 0.2\ntol = 1e-9\n");
  cfg.checks.clear();
  cfg.out = g_out / "richardson";
  const Outcome o = sweep(cfg, SweepParam::Resolution, 16, 128, 4);
  const double ratio = o.report["richardson"].back().get<double>();
  const bool ok = identical && std::abs(ratio - 4.0) <= 1.0 && o.exit_code == kExitOk;
  return {ok, std::string("byte-identical reruns (1 vs 3 workers): ") + (identical ? "yes" : "no") +
                  fmt("; Richardson ratio %.3f", o.report["richardson"][0].get<double>()) +
                  fmt(", %.3f (4 +/- 1)", ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ldg_acceptance";
  fs::remove_all(g_out);
  fs::create_directories(g_out);

  struct Criterion {
    const char* name;
    double budget;  // seconds, 0 for none
    std::function<Verdict()> fn;
  };
  const Criterion criteria[] = {
      {"algebraic identities", 1.0, algebraic_identities},
      {"discrete gradient", 10.0, gradient_check},
      {"boundary energy shift", 30.0, shift_check},
      {"defect structure", 0.0, theorem_a},
      {"LdG energy scaling and placement", 0.0, theorem_b},
      {"CSH vortices", 0.0, theorem_c},
      {"Pohozaev identity", 0.0, pohozaev},
      {"cell problem", 0.0, cell_problem},
      {"determinism and refinement", 0.0, determinism_refinement},
  };
  int failures = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0.0 && secs > c.budget) {
      v.passed = false;
      v.detail += fmt("; over time budget %.0f s", c.budget);
    }
    failures += !v.passed;
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.passed ? "PASS" : "FAIL", index, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
