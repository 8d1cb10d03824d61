#include "ldg/harness.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "ldg/defects.hpp"
#include "ldg/diagnostics.hpp"
#include "ldg/error.hpp"
#include "ldg/io.hpp"
#include "ldg/renorm.hpp"
#include "ldg/solver.hpp"

namespace ldg {

using nlohmann::json;
namespace pt = boost::property_tree;

namespace {

constexpr double kPi = std::numbers::pi;

const std::map<std::string, std::string>& recipes() {
  static const std::map<std::string, std::string> table = {
      {"theorem-A",
       "[schedule]\neps_max = 0.2\neps_min = 0.03\nrungs = 6\n"
       "[checks]\nenabled = defects,well,bulk_bound\n"},
      {"theorem-B",
       "[model]\nL1 = 1\nL2 = 0.5\nL3 = 0.5\n"
       "[schedule]\neps_max = 0.2\neps_min = 0.03\nrungs = 6\n"
       "[checks]\nenabled = defects,energy_fit,argmin,annulus\n"},
      {"theorem-C",
       "[model]\nenergy = csh\n"
       "[schedule]\neps_max = 0.2\neps_min = 0.025\nrungs = 7\n"
       "[checks]\nenabled = defects,energy_fit\n"},
      {"pohozaev",
       "[schedule]\neps_max = 0.2\neps_min = 0.05\nrungs = 4\ntol = 1e-8\n"
       "[checks]\nenabled = pohozaev,bulk_bound\n"},
      {"cell-problem",
       "[schedule]\ntol = 1e-8\n"
       "[checks]\nenabled = cell\ntau = 0.4,0.3,0.2,0.14,0.1\n"},
  };
  return table;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.recipe",         "run.seed",          "domain.shape",         "domain.radius",     "domain.a",
      "domain.b",           "domain.width",      "domain.height",        "domain.corner_radius",
      "domain.center_x",    "domain.center_y",   "domain.resolution",    "model.energy",      "model.L1",
      "model.L2",           "model.L3",          "model.a",              "model.b",           "model.c",
      "boundary.k",         "boundary.offset",   "schedule.eps",         "schedule.eps_max",  "schedule.eps_min",
      "schedule.rungs",     "schedule.tol",      "schedule.max_iters",   "schedule.perturb",  "schedule.memory",
      "init.strategy",      "init.random_starts", "init.restart_file",   "checks.enabled",    "checks.mu",
      "checks.rho",         "checks.scan",       "checks.tau",           "checks.beta",       "checks.annulus_rho",
      "output.all_rungs",
  };
  return keys;
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> c = {"defects", "well",  "bulk_bound", "energy_fit", "pohozaev",
                                          "shift",   "argmin", "annulus",   "cell"};
  return c;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) invalid(key + ": not a number: " + v);
    return d;
  } catch (const std::logic_error&) {
    invalid(key + ": not a number: " + v);
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) invalid(key + ": not an integer: " + v);
    return i;
  } catch (const std::logic_error&) {
    invalid(key + ": not an integer: " + v);
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

pt::ptree read_ini_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid(std::string("malformed config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  return tree;
}

const char* energy_name(EnergyKind e) {
  switch (e) {
    case EnergyKind::LdG: return "ldg";
    case EnergyKind::GinzburgLandau: return "gl";
    case EnergyKind::ChernSimonsHiggs: return "csh";
  }
  return "?";
}

const char* init_name(InitKind i) {
  switch (i) {
    case InitKind::Ansatz: return "ansatz";
    case InitKind::Random: return "random";
    case InitKind::Constant: return "constant";
    case InitKind::Restart: return "restart";
  }
  return "?";
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

json config_points(const Configuration& b) {
  json a = json::array();
  for (Vec2 p : b) a.push_back(vec_json(p));
  return a;
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::NotADisk:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ResolutionTooCoarse:
    case ErrorCode::GridTopology:
    case ErrorCode::NotInS0:
    case ErrorCode::Io:
    case ErrorCode::InsufficientSamples:
      return kExitConfigInvalid;
    case ErrorCode::ChargeMismatch:
      return kExitCheckFailed;
    default:
      return kExitSolveFailed;
  }
}

json base_report(const RunConfig& cfg) {
  json r;
  r["schema"] = 1;
  r["version"] = kVersion;
  r["config"] = cfg.to_json();
  r["checks"] = json::array();
  return r;
}

void add_check(json& report, const std::string& name, double value, const std::string& relation, double tolerance,
               bool passed) {
  report["checks"].push_back(
      {{"name", name}, {"value", value}, {"relation", relation}, {"tolerance", tolerance}, {"passed", passed}});
}

bool checks_pass(const json& report) {
  for (const auto& c : report["checks"])
    if (!c["passed"].get<bool>()) return false;
  return true;
}

// Largest distance between matched points after the best relabeling and,
// for rotation-invariant problems, the best rotation about `center`.
double aligned_distance(const std::vector<Vec2>& found, Configuration target, Vec2 center, bool rotate) {
  if (found.size() != target.size()) return std::numeric_limits<double>::infinity();
  std::vector<int> perm(target.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  double best = std::numeric_limits<double>::infinity();
  do {
    double angle = 0.0;
    if (rotate) {
      double sd = 0.0, sc = 0.0;
      for (std::size_t i = 0; i < found.size(); ++i) {
        const Vec2 t = target[perm[i]] - center, f = found[i] - center;
        sd += t.x * f.x + t.y * f.y;
        sc += t.x * f.y - t.y * f.x;
      }
      angle = std::atan2(sc, sd);
    }
    const double c = std::cos(angle), s = std::sin(angle);
    double worst = 0.0;
    for (std::size_t i = 0; i < found.size(); ++i) {
      const Vec2 t = target[perm[i]] - center;
      const Vec2 rt = center + Vec2{c * t.x - s * t.y, s * t.x + c * t.y};
      worst = std::max(worst, norm(found[i] - rt));
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

class Pipeline {
 public:
  Pipeline(const RunConfig& cfg, json& report) : cfg_(cfg), report_(report) {}

  void execute() {
    cfg_.validate();
    std::filesystem::create_directories(cfg_.out);
    grid_ = Grid::build(cfg_.shape, cfg_.resolution);
    s_ = cfg_.well_s();
    data_ = make_boundary_data(*grid_, s_, cfg_.k, cfg_.offset);
    report_["grid"] = {{"nodes", grid_->count(NodeKind::Interior) + grid_->count(NodeKind::Boundary)},
                       {"interior", grid_->count(NodeKind::Interior)},
                       {"boundary", grid_->boundary_size()},
                       {"h", grid_->h()},
                       {"area", grid_->discrete_area()}};
    report_["boundary_degree"] = boundary_degree(data_);
    report_["warnings"] = json::array();
    if (cfg_.eps.back() < 3.0 * grid_->h()) {
      report_["warnings"].push_back("eps_min is below 3h; defect cores span fewer than three cells");
    }

    static const std::vector<std::string> solve_checks = {"defects",  "well",  "bulk_bound", "energy_fit",
                                                          "pohozaev", "shift", "argmin"};
    bool needs_solve = cfg_.checks.empty();
    for (const auto& c : solve_checks) needs_solve = needs_solve || cfg_.has_check(c);
    const bool ansatz = needs_solve && cfg_.init == InitKind::Ansatz && cfg_.k > 0;
    if (cfg_.has_check("argmin") || cfg_.has_check("annulus") || ansatz) find_argmin();
    if (cfg_.has_check("annulus")) annulus();
    if (needs_solve) solve();
    if (cfg_.has_check("cell")) cell();
  }

 private:
  void find_argmin() {
    if (cfg_.k < 1) return;
    laplace_ = std::make_unique<LaplaceSolver>(grid_);
    argmin_ = argmin_W(cfg_.k, data_, *laplace_, cfg_.scan, 8, cfg_.seed);
    report_["argmin"] = {{"config", config_points(argmin_.config)},
                         {"W", argmin_.W},
                         {"scan_cell", argmin_.scan_cell},
                         {"evaluations", argmin_.evaluations},
                         {"certified", argmin_.certified}};
  }

  void annulus() {
    if (cfg_.k < 1) invalid("the annulus check needs k >= 1");
    const AnnulusFit fit = annulus_identity(argmin_.config, data_, *laplace_, cfg_.annulus_rho);
    report_["annulus"] = {{"rho", fit.rho}, {"energy", fit.energy}, {"W_fit", fit.W_fit}, {"W", fit.W},
                          {"rel_error", fit.rel_error}};
    add_check(report_, "annulus_identity", fit.rel_error, "<", 0.02, fit.rel_error < 0.02);
  }

  Field initial(const InitStrategy& strategy) const {
    const int ncomp = cfg_.energy == EnergyKind::LdG ? 3 : 2;
    return init_field(grid_, data_, strategy, ncomp);
  }

  SolveReport minimize_any(Field& f, const SolveSchedule& sch, const RungCallback& cb) const {
    switch (cfg_.energy) {
      case EnergyKind::LdG: return minimize(f, cfg_.params(), sch, cb);
      case EnergyKind::GinzburgLandau: return minimize_planar(f, PlanarEnergy::GinzburgLandau, sch, cb);
      case EnergyKind::ChernSimonsHiggs: return minimize_planar(f, PlanarEnergy::ChernSimonsHiggs, sch, cb);
    }
    return {};
  }

  SolveSchedule schedule(std::vector<double> eps) const {
    SolveSchedule s;
    s.eps = std::move(eps);
    s.tol = cfg_.tol;
    s.max_iters = cfg_.max_iters;
    s.perturb = cfg_.perturb;
    s.seed = cfg_.seed;
    s.memory = cfg_.memory;
    return s;
  }

  void on_rung(const RungReport& r, const Field& f) {
    const DefectSet d = detect_defects(f, s_, 0.5);
    const WellMetrics m = well_metrics(f, d, s_, cfg_.rho, {cfg_.mu});
    json j = {{"eps", r.eps},
              {"energy", r.energy.total()},
              {"elastic", r.energy.elastic},
              {"bulk", r.energy.bulk},
              {"initial_energy", r.initial_energy},
              {"grad_max", r.grad_max},
              {"grad_tol", r.grad_tol},
              {"iterations", r.iterations},
              {"evaluations", r.evaluations},
              {"converged", r.converged},
              {"monotone", r.monotone},
              {"defects", d.defects.size()},
              {"charge", d.total_charge()},
              {"sup_p", m.sup_p},
              {"sup_r", m.sup_r},
              {"bad_area", m.bad_area[0]},
              {"bad_area_over_eps2", m.bad_area[0] / (r.eps * r.eps)}};
    if (cfg_.has_check("pohozaev")) {
      const PohozaevReport p = pohozaev_check(f, cfg_.params().with_eps(r.eps));
      j["pohozaev"] = {{"tangential_p", p.tangential_p}, {"normal_p", p.normal_p},   {"normal_r", p.normal_r},
                       {"mixed", p.mixed},               {"mixed_bound", p.mixed_bound}, {"interior", p.interior},
                       {"residual", p.residual},         {"relative_residual", p.relative_residual},
                       {"data_bound", p.data_bound},     {"inequality_holds", p.inequality_holds},
                       {"mixed_bound_holds", p.mixed_bound_holds}};
    }
    if (cfg_.write_all_rungs) {
      write_field_csv(cfg_.out / ("field_rung" + std::to_string(rungs_.size()) + ".csv"), f);
    }
    rungs_.push_back(r);
    report_["rungs"].push_back(j);
  }

  void solve() {
    std::vector<std::pair<std::string, InitStrategy>> starts;
    switch (cfg_.init) {
      case InitKind::Ansatz:
        if (cfg_.k > 0) {
          starts.emplace_back("ansatz", ProductAnsatz{argmin_.config, cfg_.eps.front()});
        } else {
          starts.emplace_back("constant", ConstantWell{});
        }
        break;
      case InitKind::Random: starts.emplace_back("random", RandomInit{cfg_.seed}); break;
      case InitKind::Constant: starts.emplace_back("constant", ConstantWell{}); break;
      case InitKind::Restart: break;
    }
    for (int i = 0; i < cfg_.random_starts; ++i) {
      starts.emplace_back("random", RandomInit{cfg_.seed + 1 + static_cast<std::uint64_t>(i)});
    }
    auto make = [&](std::size_t i) {
      if (cfg_.init == InitKind::Restart && i == 0) {
        Field f = read_field_csv(cfg_.restart_file, grid_);
        f.apply_boundary(data_);
        return f;
      }
      const std::size_t j = cfg_.init == InitKind::Restart ? i - 1 : i;
      return initial(starts[j].second);
    };
    const std::size_t nstarts = starts.size() + (cfg_.init == InitKind::Restart ? 1 : 0);
    report_["rungs"] = json::array();
    RungCallback cb = [&](const RungReport& r, const Field& f) { on_rung(r, f); };
    Field field;
    if (nstarts == 1) {
      field = make(0);
      minimize_any(field, schedule(cfg_.eps), cb);
    } else {
      // Multi-start on the first rung; the lowest energy continues down the ladder.
      json js = json::array();
      double best = std::numeric_limits<double>::infinity();
      RungReport best_rung;
      for (std::size_t i = 0; i < nstarts; ++i) {
        Field f = make(i);
        const SolveReport rep = minimize_any(f, schedule({cfg_.eps.front()}), {});
        const double e = rep.rungs[0].energy.total();
        const std::string name = cfg_.init == InitKind::Restart ? (i == 0 ? "restart" : starts[i - 1].first)
                                                                : starts[i].first;
        js.push_back({{"strategy", name}, {"energy", e}, {"converged", rep.rungs[0].converged}});
        if (e < best) {
          best = e;
          best_rung = rep.rungs[0];
          field = f;
        }
      }
      report_["starts"] = js;
      on_rung(best_rung, field);
      if (cfg_.eps.size() > 1) {
        minimize_any(field, schedule(std::vector<double>(cfg_.eps.begin() + 1, cfg_.eps.end())), cb);
      }
    }
    write_field_csv(cfg_.out / "field.csv", field);
    write_grid_csv(cfg_.out / "grid.csv", *grid_);
    const DefectSet d = detect_defects(field, s_, 0.5);
    write_defects_csv(cfg_.out / "defects.csv", d);
    write_director_csv(cfg_.out / "director.csv", director_field(field, d, 0.0));
    json jd = json::array();
    for (const Defect& x : d.defects) {
      jd.push_back({{"position", vec_json(x.position)}, {"winding", x.winding}, {"core_radius", x.core_radius}});
    }
    report_["defects"] = jd;
    report_["defect_warnings"] = d.warnings;
    const WellMetrics m = well_metrics(field, d, s_, cfg_.rho, {0.05, 0.1, 0.2});
    report_["well"] = {{"rho", m.rho}, {"sup_p", m.sup_p}, {"sup_r", m.sup_r}, {"mu", m.mu}, {"bad_area", m.bad_area}};

    bool converged = true;
    for (const RungReport& r : rungs_) converged = converged && r.converged;
    report_["converged"] = converged;
    if (!converged) solve_failed_ = true;
    run_checks(field, d);
  }

  void run_checks(const Field& field, const DefectSet& d) {
    const json& rj = report_["rungs"];
    if (cfg_.has_check("defects")) {
      const int expected = std::abs(cfg_.k);
      const int sign = cfg_.k >= 0 ? 1 : -1;
      int wrong = 0;
      for (const Defect& x : d.defects) wrong += x.winding != sign;
      add_check(report_, "defect_count", static_cast<double>(d.defects.size()), "==", expected,
                static_cast<int>(d.defects.size()) == expected);
      add_check(report_, "defect_windings_not_unit", wrong, "==", 0, wrong == 0);
    }
    if (cfg_.has_check("well") && rj.size() > 1) {
      double rise_p = -std::numeric_limits<double>::infinity(), rise_r = rise_p, growth = 0.0;
      const double first = rj[0]["bad_area_over_eps2"].get<double>();
      for (std::size_t i = 0; i + 1 < rj.size(); ++i) {
        rise_p = std::max(rise_p, rj[i + 1]["sup_p"].get<double>() - rj[i]["sup_p"].get<double>());
        rise_r = std::max(rise_r, rj[i + 1]["sup_r"].get<double>() - rj[i]["sup_r"].get<double>());
      }
      for (const auto& r : rj) {
        const double v = r["bad_area_over_eps2"].get<double>();
        growth = std::max(growth, first > 0.0 ? v / first : (v > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
      }
      add_check(report_, "sup_p_max_rise", rise_p, "<", 0.0, rise_p < 0.0);
      if (cfg_.energy == EnergyKind::LdG) add_check(report_, "sup_r_max_rise", rise_r, "<", 0.0, rise_r < 0.0);
      add_check(report_, "bad_area_over_eps2_growth", growth, "<=", 2.0, growth <= 2.0);
    }
    if (cfg_.has_check("bulk_bound")) {
      const auto rows = bulk_bound_monitor(rungs_);
      json jr = json::array();
      int flagged = 0;
      for (const auto& row : rows) {
        jr.push_back({{"eps", row.eps}, {"scaled_bulk", row.scaled_bulk}, {"flagged", row.flagged}});
        flagged += row.flagged;
      }
      report_["bulk_bound"] = jr;
      add_check(report_, "bulk_bound_flags", flagged, "==", 0, flagged == 0);
    }
    if (cfg_.has_check("energy_fit")) {
      std::vector<EnergySample> samples;
      for (const RungReport& r : rungs_) samples.push_back({r.eps, r.energy.total()});
      SlopeTarget target = PlanarSlope{cfg_.k};
      if (cfg_.energy == EnergyKind::LdG) target = LdGSlope{cfg_.k, s_, cfg_.L1, cfg_.L2, cfg_.L3};
      const AsymptoticsFit fit = fit_energy_asymptotics(samples, target);
      report_["energy_fit"] = {{"slope", fit.slope},          {"intercept", fit.intercept},
                               {"target", fit.target},        {"rel_error", fit.rel_error},
                               {"slope_drop_largest", fit.slope_drop_largest}};
      add_check(report_, "energy_slope_rel_error", fit.rel_error, "<", 0.05, fit.rel_error < 0.05);
    }
    if (cfg_.has_check("pohozaev")) {
      int failures = 0;
      for (const auto& r : rj) failures += !r["pohozaev"]["inequality_holds"].get<bool>();
      add_check(report_, "pohozaev_inequality_failures", failures, "==", 0, failures == 0);
    }
    if (cfg_.has_check("shift")) {
      const ShiftCheck c = corollary_shift_check(field, cfg_.params().with_eps(cfg_.eps.back()));
      report_["shift"] = {{"G", c.G}, {"F", c.F}, {"shift", c.shift}, {"expected", c.expected},
                          {"rel_error", c.rel_error}};
      const double tol = c.expected == 0.0 ? 1e-10 : 0.03;
      add_check(report_, "shift_error", c.rel_error, "<", tol, c.rel_error < tol);
    }
    if (cfg_.has_check("argmin") && cfg_.k > 0) {
      std::vector<Vec2> found;
      for (const Defect& x : d.defects) found.push_back(x.position);
      const double dist = aligned_distance(found, argmin_.config, cfg_.shape.center, cfg_.shape.is_disk());
      const double tol = 3.0 * grid_->h() + argmin_.scan_cell;
      report_["argmin"]["pde_distance"] = dist;
      add_check(report_, "defects_to_argmin_W", dist, "<=", tol, dist <= tol);
    }
  }

  void cell() {
    if (cfg_.energy != EnergyKind::LdG) invalid("the cell problem uses the LdG energy");
    const ModelParams p = cfg_.params();
    const CellProblemResult a = cell_problem_L(cfg_.tau, p, cfg_.resolution, 0.0, cfg_.tol, cfg_.max_iters);
    const CellProblemResult b = cell_problem_L(cfg_.tau, p, cfg_.resolution, cfg_.beta, cfg_.tol, cfg_.max_iters);
    write_cell_csv(cfg_.out / "cell.csv", a);
    write_cell_csv(cfg_.out / "cell_beta.csv", b);
    double beta_dev = 0.0;
    for (std::size_t i = 0; i < a.L.size(); ++i) {
      beta_dev = std::max(beta_dev, std::abs(a.L[i] - b.L[i]) / std::abs(a.L[i]));
    }
    bool converged = true;
    for (const auto& r : a.rungs) converged = converged && r.converged;
    for (const auto& r : b.rungs) converged = converged && r.converged;
    if (!converged) solve_failed_ = true;
    report_["cell"] = {{"tau", a.tau},   {"L", a.L},         {"G", a.G},   {"L_beta", b.L},
                       {"gamma", a.gamma}, {"c", a.c},       {"q", a.q},   {"fit_rms", a.fit_rms},
                       {"monotone_slack", a.monotone_slack}, {"beta", cfg_.beta}, {"converged", converged}};
    add_check(report_, "cell_monotone_slack", a.monotone_slack, "<=", 1e-6, a.monotone_slack <= 1e-6);
    add_check(report_, "cell_beta_rel_dev", beta_dev, "<", 0.005, beta_dev < 0.005);
    add_check(report_, "cell_gamma_finite", a.gamma, "finite", 0.0, std::isfinite(a.gamma));
  }

 public:
  bool solve_failed_ = false;

 private:
  const RunConfig& cfg_;
  json& report_;
  std::shared_ptr<const Grid> grid_;
  double s_ = 1.0;
  BoundaryData data_;
  std::unique_ptr<LaplaceSolver> laplace_;
  ArgminResult argmin_;
  std::vector<RungReport> rungs_;
};

}  // namespace

bool RunConfig::has_check(const std::string& name) const {
  return std::find(checks.begin(), checks.end(), name) != checks.end();
}

ModelParams RunConfig::params() const {
  const double e = eps.empty() ? 0.1 : eps.front();
  if (energy == EnergyKind::LdG) return ModelParams(L1, L2, L3, BulkSpec::classic(bulk_a, bulk_b, bulk_c), e);
  // Planar energies: a well at |p| = 1 (s = 2); only eps is used.
  return ModelParams(1.0, 0.0, 0.0, BulkSpec::classic(0.0, 4.0, 1.0), e);
}

double RunConfig::well_s() const { return energy == EnergyKind::LdG ? params().s() : 2.0; }

void RunConfig::validate() const {
  if (recipes().count(recipe) == 0) invalid("unknown recipe " + recipe);
  if (!(resolution > 0.0)) invalid("resolution must be positive");
  if (k < 0) invalid("k must be nonnegative");
  if (eps.empty()) invalid("empty eps ladder");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) invalid("eps must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) invalid("eps ladder must be strictly decreasing");
  }
  if (!(tol > 0.0) || max_iters < 1 || memory < 1 || perturb < 0.0) invalid("bad solver settings");
  if (random_starts < 0) invalid("random_starts must be nonnegative");
  if (init == InitKind::Restart && restart_file.empty()) invalid("restart needs init.restart_file");
  if (!(mu > 0.0) || rho < 0.0) invalid("bad well-metric settings");
  if (scan < 2) invalid("scan must be at least 2");
  for (const auto& c : checks)
    if (known_checks().count(c) == 0) invalid("unknown check " + c);
  try {
    params();
  } catch (const Error& e) {
    invalid(std::string("model: ") + e.what());
  }
  if (has_check("pohozaev")) {
    if (!shape.is_disk()) throw Error(ErrorCode::NotADisk, "the pohozaev check needs a disk domain");
    if (energy != EnergyKind::LdG) invalid("the pohozaev check uses the LdG energy");
  }
  if (has_check("shift") && energy != EnergyKind::LdG) invalid("the shift check uses the LdG energy");
  if (has_check("cell") && tau.size() < 3) invalid("the cell check needs at least three tau values");
  if (has_check("annulus") && annulus_rho.size() < 2) invalid("the annulus check needs two radii");
}

json RunConfig::to_json() const {
  json shape_j;
  if (const auto* d = std::get_if<Disk>(&shape.kind)) {
    shape_j = {{"shape", "disk"}, {"radius", d->radius}};
  } else if (const auto* e = std::get_if<Ellipse>(&shape.kind)) {
    shape_j = {{"shape", "ellipse"}, {"a", e->a}, {"b", e->b}};
  } else {
    const auto& r = std::get<RoundedRect>(shape.kind);
    shape_j = {{"shape", "rounded_rect"}, {"width", r.width}, {"height", r.height}, {"corner_radius", r.corner_radius}};
  }
  shape_j["center"] = vec_json(shape.center);
  shape_j["resolution"] = resolution;
  return {{"recipe", recipe},
          {"seed", seed},
          {"domain", shape_j},
          {"model", {{"energy", energy_name(energy)}, {"L1", L1}, {"L2", L2}, {"L3", L3},
                     {"a", bulk_a}, {"b", bulk_b}, {"c", bulk_c}}},
          {"boundary", {{"k", k}, {"offset", offset}}},
          {"schedule", {{"eps", eps}, {"tol", tol}, {"max_iters", max_iters}, {"perturb", perturb},
                        {"memory", memory}}},
          {"init", {{"strategy", init_name(init)}, {"random_starts", random_starts}, {"restart_file", restart_file}}},
          {"checks", {{"enabled", checks}, {"mu", mu}, {"rho", rho}, {"scan", scan}, {"tau", tau},
                      {"beta", beta}, {"annulus_rho", annulus_rho}}},
          {"output", {{"all_rungs", write_all_rungs}}}};
}

std::vector<std::string> recipe_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : recipes()) out.push_back(name);
  return out;
}

std::string recipe_defaults(const std::string& name) {
  const auto it = recipes().find(name);
  if (it == recipes().end()) invalid("unknown recipe " + name);
  return it->second;
}

RunConfig parse_config(const std::string& text) {
  const pt::ptree file = read_ini_text(text);
  std::map<std::string, std::string> values;
  for (const auto& [section, body] : file) {
    if (body.empty() && !body.data().empty()) invalid("key outside a section: " + section);
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (known_keys().count(full) == 0) invalid("unknown key " + full);
      values[full] = trim(value.data());
    }
  }
  RunConfig cfg;
  if (values.count("run.recipe")) cfg.recipe = values["run.recipe"];
  const pt::ptree defaults = read_ini_text(recipe_defaults(cfg.recipe));
  std::map<std::string, std::string> merged;
  for (const auto& [section, body] : defaults)
    for (const auto& [key, value] : body) merged[section + "." + key] = value.data();
  for (const auto& [k, v] : values) merged[k] = v;

  auto has = [&](const std::string& k) { return merged.count(k) > 0; };
  auto num = [&](const std::string& k, double fallback) { return has(k) ? to_double(k, merged[k]) : fallback; };
  auto integer = [&](const std::string& k, long long fallback) { return has(k) ? to_int(k, merged[k]) : fallback; };

  const long long seed = integer("run.seed", 1);
  if (seed < 0) invalid("run.seed must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  const std::string shape = has("domain.shape") ? merged["domain.shape"] : "disk";
  cfg.shape.center = {num("domain.center_x", 0.0), num("domain.center_y", 0.0)};
  if (shape == "disk") {
    cfg.shape.kind = Disk{num("domain.radius", 1.0)};
  } else if (shape == "ellipse") {
    cfg.shape.kind = Ellipse{num("domain.a", 1.0), num("domain.b", 0.7)};
  } else if (shape == "rounded_rect") {
    cfg.shape.kind = RoundedRect{num("domain.width", 2.0), num("domain.height", 1.6), num("domain.corner_radius", 0.3)};
  } else {
    invalid("domain.shape must be disk, ellipse, or rounded_rect");
  }
  cfg.resolution = num("domain.resolution", cfg.resolution);

  const std::string energy = has("model.energy") ? merged["model.energy"] : "ldg";
  if (energy == "ldg") {
    cfg.energy = EnergyKind::LdG;
  } else if (energy == "gl") {
    cfg.energy = EnergyKind::GinzburgLandau;
  } else if (energy == "csh") {
    cfg.energy = EnergyKind::ChernSimonsHiggs;
  } else {
    invalid("model.energy must be ldg, gl, or csh");
  }
  cfg.L1 = num("model.L1", cfg.L1);
  cfg.L2 = num("model.L2", cfg.L2);
  cfg.L3 = num("model.L3", cfg.L3);
  cfg.bulk_a = num("model.a", cfg.bulk_a);
  cfg.bulk_b = num("model.b", cfg.bulk_b);
  cfg.bulk_c = num("model.c", cfg.bulk_c);

  cfg.k = static_cast<int>(integer("boundary.k", cfg.k));
  cfg.offset = num("boundary.offset", cfg.offset);

  if (values.count("schedule.eps")) {
    cfg.eps = to_list("schedule.eps", merged["schedule.eps"]);
  } else {
    const double hi = num("schedule.eps_max", 0.2), lo = num("schedule.eps_min", 0.05);
    const long long rungs = integer("schedule.rungs", 4);
    if (rungs < 1) invalid("schedule.rungs must be positive");
    if (rungs == 1) {
      cfg.eps = {lo};
    } else {
      if (!(hi > lo && lo > 0.0)) invalid("schedule needs eps_max > eps_min > 0");
      cfg.eps = SolveSchedule::ladder(hi, lo, static_cast<int>(rungs));
    }
  }
  cfg.tol = num("schedule.tol", cfg.tol);
  cfg.max_iters = static_cast<int>(integer("schedule.max_iters", cfg.max_iters));
  cfg.perturb = num("schedule.perturb", cfg.perturb);
  cfg.memory = static_cast<int>(integer("schedule.memory", cfg.memory));

  const std::string init = has("init.strategy") ? merged["init.strategy"] : "ansatz";
  if (init == "ansatz") {
    cfg.init = InitKind::Ansatz;
  } else if (init == "random") {
    cfg.init = InitKind::Random;
  } else if (init == "constant") {
    cfg.init = InitKind::Constant;
  } else if (init == "restart") {
    cfg.init = InitKind::Restart;
  } else {
    invalid("init.strategy must be ansatz, random, constant, or restart");
  }
  cfg.random_starts = static_cast<int>(integer("init.random_starts", 0));
  if (has("init.restart_file")) cfg.restart_file = merged["init.restart_file"];

  if (has("checks.enabled")) cfg.checks = split_list(merged["checks.enabled"]);
  cfg.mu = num("checks.mu", cfg.mu);
  cfg.rho = num("checks.rho", cfg.rho);
  cfg.scan = static_cast<int>(integer("checks.scan", cfg.scan));
  if (has("checks.tau")) cfg.tau = to_list("checks.tau", merged["checks.tau"]);
  cfg.beta = num("checks.beta", cfg.beta);
  cfg.annulus_rho = has("checks.annulus_rho") ? to_list("checks.annulus_rho", merged["checks.annulus_rho"])
                                              : std::vector<double>{0.01, 0.02, 0.04, 0.08};
  if (has("output.all_rungs")) {
    const std::string v = merged["output.all_rungs"];
    if (v != "true" && v != "false") invalid("output.all_rungs must be true or false");
    cfg.write_all_rungs = v == "true";
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void write_report(const std::filesystem::path& dir, const json& report) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "report.json");
  if (!out) throw Error(ErrorCode::Io, "cannot write the report");
  out << report.dump(2) << '\n';
}

Outcome run(const RunConfig& cfg) {
  Outcome o;
  o.report = base_report(cfg);
  bool solve_failed = false;
  try {
    Pipeline p(cfg, o.report);
    p.execute();
    solve_failed = p.solve_failed_;
  } catch (const Error& e) {
    o.report["error"] = e.what();
    o.exit_code = exit_for(e.code());
  }
  if (o.exit_code == kExitOk) {
    if (solve_failed) {
      o.exit_code = kExitSolveFailed;
    } else if (!checks_pass(o.report)) {
      o.exit_code = kExitCheckFailed;
    }
  }
  o.report["exit_code"] = o.exit_code;
  try {
    write_report(cfg.out, o.report);
  } catch (const Error& e) {
    if (o.exit_code == kExitOk) o.exit_code = kExitConfigInvalid;
  }
  return o;
}

namespace {

int combine_exit(int a, int b) {
  for (int code : {kExitConfigInvalid, kExitSolveFailed, kExitCheckFailed})
    if (a == code || b == code) return code;
  return kExitOk;
}

std::vector<double> geometric(double from, double to, int n) {
  if (n < 2) return {from};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = from * std::pow(to / from, static_cast<double>(i) / (n - 1));
    if (std::abs(v[i] - std::round(v[i])) < 1e-9 * v[i]) v[i] = std::round(v[i]);
  }
  v.back() = to;
  return v;
}

}  // namespace

Outcome sweep(const RunConfig& config, SweepParam param, double from, double to, int rungs) {
  Outcome o;
  RunConfig cfg = config;
  try {
    if (param == SweepParam::Eps) {
      if (!(from > to && to > 0.0) || rungs < 4) invalid("eps sweep needs from > to > 0 and at least 4 rungs");
      cfg.eps = SolveSchedule::ladder(from, to, rungs);
      if (!cfg.has_check("energy_fit")) cfg.checks.push_back("energy_fit");
      o = run(cfg);
      std::vector<std::vector<double>> rows;
      if (o.report.contains("rungs")) {
        for (const auto& r : o.report["rungs"]) {
          rows.push_back({r["eps"].get<double>(), r["energy"].get<double>(), r["elastic"].get<double>(),
                          r["bulk"].get<double>(), r["defects"].get<double>(), r["charge"].get<double>()});
        }
      }
      write_table_csv(cfg.out / "sweep.csv", {"eps", "energy", "elastic", "bulk", "defects", "charge"}, rows);
      o.report["sweep"] = {{"param", "eps"}, {"from", from}, {"to", to}, {"rungs", rungs}};
      write_report(cfg.out, o.report);
      return o;
    }
    o.report = base_report(cfg);
    json runs = json::array();
    std::vector<std::vector<double>> rows;
    if (param == SweepParam::K) {
      const int k0 = static_cast<int>(std::lround(from)), k1 = static_cast<int>(std::lround(to));
      if (k0 < 0 || k1 < k0) invalid("k sweep needs 0 <= from <= to");
      for (int k = k0; k <= k1; ++k) {
        RunConfig c = cfg;
        c.k = k;
        c.out = cfg.out / ("k" + std::to_string(k));
        if (!c.has_check("defects")) c.checks.push_back("defects");
        const Outcome sub = run(c);
        o.exit_code = combine_exit(o.exit_code, sub.exit_code);
        const double energy = sub.report.contains("rungs") && !sub.report["rungs"].empty()
                                  ? sub.report["rungs"].back()["energy"].get<double>()
                                  : std::nan("");
        const double count = sub.report.contains("defects") ? static_cast<double>(sub.report["defects"].size()) : -1;
        rows.push_back({static_cast<double>(k), energy, count, static_cast<double>(sub.exit_code)});
        runs.push_back({{"k", k}, {"energy", energy}, {"defects", count}, {"exit_code", sub.exit_code},
                        {"checks", sub.report["checks"]}});
        add_check(o.report, "defect_count_k" + std::to_string(k), count, "==", k, count == k);
      }
      write_table_csv(cfg.out / "sweep.csv", {"k", "energy", "defects", "exit_code"}, rows);
    } else {
      if (!(to > from && from > 0.0) || rungs < 3) invalid("resolution sweep needs 0 < from < to and 3 values");
      std::vector<double> energies;
      for (double res : geometric(from, to, rungs)) {
        RunConfig c = cfg;
        c.resolution = res;
        c.eps = {cfg.eps.back()};
        c.tol = std::min(cfg.tol, 1e-9);
        c.checks.clear();
        c.out = cfg.out / ("res" + std::to_string(static_cast<long long>(std::lround(res))));
        const Outcome sub = run(c);
        o.exit_code = combine_exit(o.exit_code, sub.exit_code);
        const double energy = sub.report.contains("rungs") && !sub.report["rungs"].empty()
                                  ? sub.report["rungs"].back()["energy"].get<double>()
                                  : std::nan("");
        energies.push_back(energy);
        rows.push_back({res, 1.0 / res, energy});
        runs.push_back({{"resolution", res}, {"energy", energy}, {"exit_code", sub.exit_code}});
      }
      json ratios = json::array();
      for (std::size_t i = 0; i + 2 < energies.size(); ++i) {
        ratios.push_back((energies[i] - energies[i + 1]) / (energies[i + 1] - energies[i + 2]));
      }
      o.report["richardson"] = ratios;
      const double last = ratios.back().get<double>();
      add_check(o.report, "richardson_ratio_minus_4", std::abs(last - 4.0), "<=", 1.0, std::abs(last - 4.0) <= 1.0);
      write_table_csv(cfg.out / "sweep.csv", {"resolution", "h", "energy"}, rows);
    }
    o.report["runs"] = runs;
    o.report["sweep"] = {{"param", param == SweepParam::K ? "k" : "resolution"}, {"from", from}, {"to", to},
                         {"rungs", rungs}};
    if (o.exit_code == kExitOk && !checks_pass(o.report)) o.exit_code = kExitCheckFailed;
  } catch (const Error& e) {
    o.report["error"] = e.what();
    o.exit_code = exit_for(e.code());
  }
  o.report["exit_code"] = o.exit_code;
  write_report(cfg.out, o.report);
  return o;
}

Outcome wmap(const RunConfig& config, int k, int scan) {
  Outcome o;
  RunConfig cfg = config;
  cfg.k = k;
  cfg.scan = scan;
  o.report = base_report(cfg);
  try {
    cfg.validate();
    if (k < 1) invalid("wmap needs k >= 1");
    auto grid = Grid::build(cfg.shape, cfg.resolution);
    const BoundaryData data = make_boundary_data(*grid, 2.0, k, cfg.offset);
    LaplaceSolver laplace(grid);
    if (k <= 2) write_landscape_csv(cfg.out / "wmap.csv", W_landscape(k, data, laplace, scan));
    const ArgminResult r = argmin_W(k, data, laplace, scan, 8, cfg.seed);
    o.report["argmin"] = {{"config", config_points(r.config)}, {"W", r.W}, {"scan_cell", r.scan_cell},
                          {"evaluations", r.evaluations}, {"certified", r.certified}};
  } catch (const Error& e) {
    o.report["error"] = e.what();
    o.exit_code = exit_for(e.code());
  }
  o.report["exit_code"] = o.exit_code;
  write_report(cfg.out, o.report);
  return o;
}

}  // namespace ldg
