#include "mvbif/cli.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "mvbif/bifurcation.hpp"
#include "mvbif/errors.hpp"
#include "mvbif/model_io.hpp"
#include "mvbif/particles.hpp"
#include "mvbif/report_io.hpp"

namespace mvbif {

namespace {

using json = nlohmann::json;

const char* command_name(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Scan: return "scan";
    case Command::Bifurcate: return "bifurcate";
    case Command::AuditDawson: return "audit-dawson";
    case Command::Simulate: return "simulate";
    case Command::Det2Scan: return "det2-scan";
  }
  return "?";
}

std::pair<double, double> parse_bracket(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--bracket", "expected lo:hi, got '" + s + "'");
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string a = s.substr(0, colon), b = s.substr(colon + 1);
    double lo = std::stod(a, &u1), hi = std::stod(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(s);
    if (!(lo < hi)) throw CLI::ValidationError("--bracket", "need lo < hi");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--bracket", "expected lo:hi, got '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

ModelSpec resolve_model(const RunConfig& cfg) {
  ModelSpec m = cfg.model_file.empty() ? catalog_lookup(cfg.model, cfg.beta)
                                       : load_model_file(cfg.model_file);
  if (!std::isnan(cfg.domain_L)) m.domain_L = cfg.domain_L;
  return m;
}

GridModel resolve_grid(const RunConfig& cfg, const ModelSpec& m) {
  if (cfg.grid_panels < 1) throw std::invalid_argument("--grid-panels must be >= 1");
  auto q = std::make_shared<const Quadrature>(build_grid(m.domain_L, 20, cfg.grid_panels));
  validate(m, *q);
  return discretize(m, q);
}

double resolve_alpha(const RunConfig& cfg, const ModelSpec& m) {
  if (cfg.alpha && cfg.sigma) throw std::invalid_argument("give --alpha or --sigma, not both");
  if (cfg.alpha) return *cfg.alpha;
  if (cfg.sigma) return m.alpha_for_sigma(*cfg.sigma);
  throw std::invalid_argument("this command needs --alpha or --sigma");
}

std::pair<double, double> need_bracket(const RunConfig& cfg) {
  if (!cfg.bracket) throw std::invalid_argument("this command needs --bracket lo:hi");
  return *cfg.bracket;
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return o;
}

MeanField uniform_start(const GridModel& gm, double v) {
  return {Eigen::VectorXd::Constant(gm.l(), v), Eigen::VectorXd::Constant(gm.m(), v)};
}

void check_format(const RunConfig& cfg, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed)
    if (cfg.format == f) return;
  std::string list;
  for (const char* f : allowed) list += std::string(list.empty() ? "" : ", ") + f;
  throw std::invalid_argument(std::string(command_name(cfg.command)) + " supports --format " + list);
}

std::string text_summary(const BifurcationReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "model            " << r.model << "\n"
     << "alpha0           " << r.alpha0 << "  (sigma0 " << r.sigma0 << ")\n"
     << "G(alpha0)\n" << r.G_alpha0 << "\n"
     << "M_K(alpha0)\n" << r.M_K << "\n"
     << "block\n" << r.block << "\n"
     << "multiplicity     " << r.multiplicity << (r.multiplicity_odd ? " (odd)" : " (even)") << "\n"
     << "rank block/core  " << r.rank_block << " / " << r.rank_core << "\n";
  if (r.scalar_check_used) os << "1 + M0           " << r.one_plus_M0 << "\n";
  os << "rank condition   " << (r.rank_condition_holds ? "holds" : "fails") << "\n"
     << "V2 margin        " << r.v2_margin << "\n"
     << "det2 at -/+0.1   " << r.det2_below << " / " << r.det2_above << "\n"
     << "verdict          " << (r.verdict ? "bifurcation point" : "not certified") << "\n";
  return os.str();
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (cfg.command == Command::AuditDawson) {
    check_format(cfg, {"json"});
    out << dump_json(to_json(dawson_audit(std::isnan(cfg.beta) ? 1.0 : cfg.beta))) << "\n";
    return 0;
  }

  const ModelSpec model = resolve_model(cfg);

  if (cfg.command == Command::Simulate) {
    check_format(cfg, {"json", "csv"});
    SimConfig sc;
    sc.model = model;
    sc.N = cfg.particles;
    sc.dt = cfg.dt;
    sc.T = cfg.horizon;
    sc.seed = cfg.seed;
    sc.x0 = cfg.x0;
    if (cfg.sigma) sc.sigma = *cfg.sigma;
    else if (cfg.alpha) sc.sigma = model.sigma_for_alpha(*cfg.alpha);
    else throw std::invalid_argument("simulate needs --sigma or --alpha");
    sc.thin = cfg.format == "csv" && cfg.thin == 0 ? 100 : cfg.thin;
    const SimReport rep = simulate(sc);
    if (cfg.format == "csv") write_trajectory_csv(out, rep);
    else out << dump_json(to_json(rep)) << "\n";
    return 0;
  }

  const GridModel gm = resolve_grid(cfg, model);
  const SolverOptions opt = solver_options(cfg);

  switch (cfg.command) {
    case Command::Solve: {
      check_format(cfg, {"json", "csv"});
      const double alpha = resolve_alpha(cfg, model);
      if (!model.is_finite_rank()) {
        FixedPointResult r = solve_density_fixed_point(gm, alpha, opt);
        if (cfg.format == "csv") write_density_csv(out, r.measure);
        else out << dump_json(to_json(r)) << "\n";
        return r.converged ? 0 : 2;
      }
      if (!cfg.starts.empty()) {
        if (cfg.format != "json") throw std::invalid_argument("solve --starts supports --format json");
        std::vector<MeanField> starts;
        for (double s : parse_list(cfg.starts)) starts.push_back(uniform_start(gm, s));
        MultiStartResult r = multi_start_solve(gm, alpha, starts, opt);
        out << dump_json(to_json(r)) << "\n";
        return r.non_converged == 0 ? 0 : 2;
      }
      FixedPointResult r = solve_fixed_point(gm, alpha, uniform_start(gm, cfg.start), opt);
      if (cfg.format == "csv") write_density_csv(out, r.measure);
      else out << dump_json(to_json(r)) << "\n";
      return r.converged ? 0 : 2;
    }
    case Command::Scan: {
      check_format(cfg, {"json", "csv"});
      auto [lo, hi] = need_bracket(cfg);
      if (cfg.steps < 2) throw std::invalid_argument("--steps must be >= 2");
      if (!model.is_finite_rank()) throw std::invalid_argument("scan needs a finite-rank model");
      json rows = json::array();
      std::ostringstream csv;
      csv << "alpha,converged,residual";
      for (Eigen::Index i = 0; i < gm.l(); ++i) csv << ",r_v" << i;
      for (Eigen::Index i = 0; i < gm.m(); ++i) csv << ",r_k" << i;
      csv << "\n" << std::setprecision(17);
      bool all = true;
      MeanField start = uniform_start(gm, cfg.start);
      for (int i = 0; i < cfg.steps; ++i) {
        const double alpha = lo + (hi - lo) * i / (cfg.steps - 1);
        FixedPointResult r = solve_fixed_point(gm, alpha, start, opt);
        if (r.converged) start = r.meanfield;
        all = all && r.converged;
        rows.push_back(to_json(r));
        csv << alpha << ',' << r.converged << ',' << r.residual_inf;
        for (Eigen::Index k = 0; k < r.meanfield.r_v.size(); ++k) csv << ',' << r.meanfield.r_v[k];
        for (Eigen::Index k = 0; k < r.meanfield.r_k.size(); ++k) csv << ',' << r.meanfield.r_k[k];
        csv << '\n';
      }
      if (cfg.format == "csv") out << csv.str();
      else out << dump_json(rows) << "\n";
      return all ? 0 : 2;
    }
    case Command::Bifurcate: {
      check_format(cfg, {"json", "text"});
      auto [lo, hi] = need_bracket(cfg);
      ReportOptions ro;
      ro.solver.max_iter = cfg.max_iter;
      const BifurcationReport r = full_report(gm, lo, hi, ro);
      if (cfg.format == "text") out << text_summary(r);
      else out << dump_json(to_json(r)) << "\n";
      return 0;
    }
    case Command::Det2Scan: {
      check_format(cfg, {"json", "csv"});
      auto [lo, hi] = need_bracket(cfg);
      const CrossingScan s = crossing_scan(gm, lo, hi, cfg.steps, opt);
      if (cfg.format == "csv") write_scan_csv(out, s);
      else out << dump_json(to_json(s)) << "\n";
      bool all = true;
      for (const auto& x : s.samples) all = all && x.valid;
      return all ? 0 : 2;
    }
    default:
      return 1;
  }
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string tag = command_name(cfg.command);
  try {
    if (cfg.output.empty()) return dispatch(cfg, out);
    std::ostringstream buf;
    const int code = dispatch(cfg, buf);
    std::ofstream f(cfg.output);
    if (!f) throw std::runtime_error("cannot write '" + cfg.output + "'");
    f << buf.str();
    return code;
  } catch (const StageError& e) {
    err << "error [" << tag << "] " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << "error [" << tag << "] " << e.what();
    if (!e.pointer().empty()) err << " at " << e.pointer();
    err << "\n";
  } catch (const std::exception& e) {
    err << "error [" << tag << "] " << e.what() << "\n";
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"McKean-Vlasov self-consistency and bifurcation toolkit", "mvbif"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string bracket;

  auto common = [&](CLI::App* sub, bool solver) {
    sub->add_option("--model", cfg.model, "catalog model name")->capture_default_str();
    sub->add_option("--model-file", cfg.model_file, "JSON model document");
    sub->add_option("--beta", cfg.beta, "interaction strength for dawson / vfp-dawson");
    sub->add_option("--output", cfg.output, "write results here instead of stdout");
    sub->add_option("--format", cfg.format, "json, csv or text (per command)")->capture_default_str();
    if (!solver) return;
    sub->add_option("--tol", cfg.tol, "solver tolerance")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "solver iteration cap")->capture_default_str();
    sub->add_option("--grid-panels", cfg.grid_panels, "Gauss-Legendre panels on [-L, L]")
        ->capture_default_str();
    sub->add_option("--domain-L", cfg.domain_L, "override the model's half width L");
  };
  auto alpha_opts = [&](CLI::App* sub) {
    sub->add_option("--alpha", cfg.alpha, "inverse temperature alpha");
    sub->add_option("--sigma", cfg.sigma, "noise level; alpha = sigma_scale / sigma^2");
  };
  auto bracket_opt = [&](CLI::App* sub) {
    sub->add_option("--bracket", bracket, "alpha range lo:hi")->required();
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the self-consistency equation at one alpha");
  common(solve, true);
  alpha_opts(solve);
  solve->add_option("--start", cfg.start, "initial value of every mean-field component")
      ->capture_default_str();
  solve->add_option("--starts", cfg.starts, "comma list of start values for a multi-start solve");

  CLI::App* scan = app.add_subcommand("scan", "solve along an alpha grid with warm starts");
  common(scan, true);
  bracket_opt(scan);
  scan->add_option("--steps", cfg.steps, "grid points")->capture_default_str();
  scan->add_option("--start", cfg.start, "initial value of every mean-field component")
      ->capture_default_str();

  CLI::App* bif = app.add_subcommand("bifurcate", "locate and certify a bifurcation point");
  common(bif, true);
  bracket_opt(bif);

  CLI::App* audit = app.add_subcommand("audit-dawson", "closed-form checks for the Dawson model");
  audit->add_option("--beta", cfg.beta, "interaction strength (default 1)");
  audit->add_option("--output", cfg.output, "write results here instead of stdout");
  audit->add_option("--format", cfg.format, "json")->capture_default_str();

  CLI::App* sim = app.add_subcommand("simulate", "Euler-Maruyama particle system");
  common(sim, false);
  sim->add_option("--domain-L", cfg.domain_L, "override the model's half width L");
  alpha_opts(sim);
  sim->add_option("--N", cfg.particles, "particle count")->capture_default_str();
  sim->add_option("--dt", cfg.dt, "time step")->capture_default_str();
  sim->add_option("--T", cfg.horizon, "time horizon")->capture_default_str();
  sim->add_option("--x0", cfg.x0, "initial position of every particle")->capture_default_str();
  sim->add_option("--thin", cfg.thin, "trajectory row every THIN steps (csv)");
  sim->add_option("--seed", cfg.seed, "PRNG seed")->capture_default_str();

  CLI::App* d2 = app.add_subcommand("det2-scan", "det2 of the linearized map along an alpha grid");
  common(d2, true);
  bracket_opt(d2);
  d2->add_option("--steps", cfg.steps, "grid points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error [cli] " << e.what() << "\n";
    return 1;
  }

  if (solve->parsed()) cfg.command = Command::Solve;
  else if (scan->parsed()) cfg.command = Command::Scan;
  else if (bif->parsed()) cfg.command = Command::Bifurcate;
  else if (audit->parsed()) cfg.command = Command::AuditDawson;
  else if (sim->parsed()) cfg.command = Command::Simulate;
  else cfg.command = Command::Det2Scan;

  if (!bracket.empty()) {
    try {
      cfg.bracket = parse_bracket(bracket);
    } catch (const CLI::ValidationError& e) {
      err << "error [cli] " << e.what() << "\n";
      return 1;
    }
  }
  return execute(cfg, out, err);
}

}  // namespace mvbif
