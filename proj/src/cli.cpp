#include "mixedwave/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixedwave/config.hpp"
#include "mixedwave/functionals.hpp"
#include "mixedwave/iteration.hpp"
#include "mixedwave/lifespan.hpp"
#include "mixedwave/model.hpp"
#include "mixedwave/solver.hpp"
#include "mixedwave/specfun.hpp"

namespace mixedwave {

namespace {

constexpr int kDigits = 9;
constexpr double kLightConeTolerance = 1e-10;
constexpr double kIdentityTolerance = 0.02;

struct Flags {
  std::optional<int> n;
  std::optional<double> p, q, eps, tmax, dr, threshold;
  std::optional<std::string> config, out, case_name;
  std::optional<int> jmax;
};

// Failure that maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--n", f.n, "spatial dimension");
  cmd->add_option("--p", f.p, "exponent p");
  cmd->add_option("--q", f.q, "exponent q");
  cmd->add_option("--eps", f.eps, "data amplitude epsilon");
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--jmax", f.jmax, "largest sequence index");
  cmd->add_option("--case", f.case_name, "critical case: theta1, theta2 or double");
  cmd->add_option("--tmax", f.tmax, "time horizon");
  cmd->add_option("--dr", f.dr, "radial step");
  cmd->add_option("--threshold", f.threshold, "blow-up threshold");
}

RunConfig load(const Flags& f) {
  RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
  ProblemSpec& ps = cfg.problem;
  if (f.n) ps.n = *f.n;
  if (f.p || f.q) ps.pq = ExponentPair(f.p.value_or(ps.pq.p()), f.q.value_or(ps.pq.q()));
  if (f.eps) ps.eps = *f.eps;
  if (f.tmax) ps.grid.t_max = *f.tmax;
  if (f.dr) ps.grid.dr = *f.dr;
  if (f.threshold) ps.grid.blowup_threshold = *f.threshold;
  return cfg;
}

void validate(const ProblemSpec& ps) {
  try {
    ps.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Writes to --out when given, otherwise to `out`.
void emit(const Flags& f, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (!f.out) {
    body(out);
    return;
  }
  std::ofstream file(*f.out);
  if (!file) throw UsageError("cannot open output file '" + *f.out + "'");
  file << std::setprecision(kDigits);
  body(file);
  if (!file) throw std::runtime_error("failed writing '" + *f.out + "'");
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc) {
  std::ofstream file(path);
  if (!file) throw UsageError("cannot open output file '" + path + "'");
  file << doc.dump(2) << '\n';
}

KernelParameters kernel_parameters(const RunConfig& cfg) {
  KernelParameters kp = default_kernel_parameters(cfg.problem.n, cfg.problem.pq, cfg.kernels.offset);
  if (cfg.kernels.r1) kp.r1 = *cfg.kernels.r1;
  if (cfg.kernels.r2) kp.r2 = *cfg.kernels.r2;
  return kp;
}

ExtractOptions extract_options(const RunConfig& cfg, bool kernels) {
  ExtractOptions o;
  o.lambda0 = cfg.kernels.lambda0;
  o.quad_nodes = cfg.kernels.quad_nodes;
  o.kernels = kernels;
  return o;
}

int cmd_curve(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load(f);
  const int n = cfg.problem.n;
  const CriticalData d = classify(n, cfg.problem.pq);
  const LifespanPrediction pred = lifespan_prediction(n, cfg.problem.pq);
  out << "theta1=" << d.theta1 << '\n'
      << "theta2=" << d.theta2 << '\n'
      << "region=" << to_string(d.region) << '\n'
      << "lifespan=" << to_string(pred.kind) << '\n';
  if (pred.kind != LifespanKind::None) out << "lifespan_exponent=" << pred.exponent << '\n';
  return kExitOk;
}

int cmd_cusp(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load(f);
  const int n = cfg.problem.n;
  const CuspPoint c = cusp_exponents(n);
  const CuspResiduals r = cusp_residuals(n);
  const bool ok = c.ordered() && std::abs(r.cubic) < 1e-10 && std::abs(r.theta1) < 1e-10 && std::abs(r.theta2) < 1e-10;
  out << "q_mix=" << c.q_mix << '\n'
      << "p_mix=" << c.p_mix << '\n'
      << "p_glassey=" << c.p_glassey << '\n'
      << "p_strauss=" << c.p_strauss << '\n'
      << "residual_cubic=" << r.cubic << '\n'
      << "residual_theta1=" << r.theta1 << '\n'
      << "residual_theta2=" << r.theta2 << '\n'
      << "ordering " << (c.ordered() ? "OK" : "FAILED") << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_sequences(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load(f);
  const int n = cfg.problem.n;
  const int jmax = f.jmax.value_or(20);
  std::vector<SequenceTable> tables;
  if (f.case_name) {
    CriticalCase c;
    try {
      c = critical_case_from_string(*f.case_name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    ExponentPair pq = cfg.problem.pq;
    if (c == CriticalCase::Double) {
      pq = cusp_exponents(n).pair();
    } else if (!f.p) {
      pq = ExponentPair(critical_curve_p(c, n, pq.q()), pq.q());
    }
    try {
      tables.push_back(critical_sequences(c, n, pq, jmax, cfg.problem.eps));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    const SubcriticalTables t = subcritical_sequences(n, cfg.problem.pq, jmax, cfg.problem.eps);
    tables.push_back(t.C);
    tables.push_back(t.K);
  }
  double gap = 0.0;
  for (const auto& t : tables) gap = std::max(gap, t.max_relative_gap());
  emit(f, out, [&](std::ostream& s) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (tables.size() > 1) s << (i ? "\n" : "") << "# " << to_string(tables[i].family) << '\n';
      write_csv(s, tables[i]);
    }
  });
  if (f.out) out << "max_relative_gap=" << gap << '\n';
  return gap <= 1e-12 ? kExitOk : kExitCheckFailed;
}

int cmd_specfn(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load(f);
  const int n = cfg.problem.n;
  require_dimension(n, 2);
  const KernelParameters kp = r_parameters(CriticalCase::Double, n, cusp_exponents(n).pair());
  const double t_max = f.tmax.value_or(50.0);
  bool ok = true;
  std::ostringstream body;
  body << std::setprecision(kDigits);
  body << "r,bound,min_ratio,max_ratio,drift,stable,pass\n";
  for (double r : {kp.r1, kp.r2}) {
    KernelConfig kc;
    kc.r = r;
    kc.lambda0 = cfg.kernels.lambda0;
    kc.R = cfg.problem.R;
    kc.quad_nodes = cfg.kernels.quad_nodes;
    for (const auto& rep : verify_kernel_bounds(kc, n, t_max)) {
      ok = ok && rep.passed;
      body << r << ',' << to_string(rep.bound_id) << ',' << rep.min_ratio << ',' << rep.max_ratio << ','
           << rep.drift << ',' << rep.stable << ',' << rep.passed << '\n';
    }
  }
  const PhiBand band = phi_asymptotic_band(n, 100.0, 401);
  ok = ok && band.lower > 0.0 && std::isfinite(band.upper);
  emit(f, out, [&](std::ostream& s) { s << body.str(); });
  out << "phi_band_lower=" << band.lower << '\n' << "phi_band_upper=" << band.upper << '\n';
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_solve(const Flags& f, std::ostream& out) {
  RunConfig cfg = load(f);
  validate(cfg.problem);
  const ProblemSpec& ps = cfg.problem;
  const SolutionRecord rec = run(ps);
  const FunctionalSeries s = extract(rec, ps, 0.0, 0.0, extract_options(cfg, false));
  std::vector<BoundCheck> checks;
  if (rec.status != RunStatus::NumericalFailure) {
    checks = check_floor_bounds(s, data_integrals(ps), ps.eps);
    const auto env = check_nonlinearity_bounds(rec, ps);
    checks.insert(checks.end(), env.begin(), env.end());
  }
  const double cone = light_cone_check(rec, ps.R);
  const bool ok = rec.status != RunStatus::NumericalFailure && all_passed(checks) && cone < kLightConeTolerance;

  emit(f, out, [&](std::ostream& o) {
    o << "t,maxu,maxut,maxv,U,V,Uprime,Vprime\n";
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      auto sup = [](const std::vector<double>& w) {
        double m = 0.0;
        for (double x : w) m = std::max(m, std::abs(x));
        return m;
      };
      o << rec.times[k] << ',' << sup(rec.u[k]) << ',' << sup(rec.ut[k]) << ',' << sup(rec.v[k]) << ',' << s.U[k]
        << ',' << s.V[k] << ',' << s.Uprime[k] << ',' << s.Vprime[k] << '\n';
    }
  });
  if (f.out) {
    nlohmann::ordered_json side;
    side["status"] = std::string(to_string(rec.status));
    side["blew_up"] = rec.blew_up();
    side["t_blowup"] = rec.t_blowup ? nlohmann::ordered_json(*rec.t_blowup) : nlohmann::ordered_json(nullptr);
    side["t_final"] = rec.t_final;
    side["dt_final"] = rec.dt_final;
    side["refinements"] = rec.refinements;
    side["threshold"] = rec.threshold;
    side["light_cone"] = cone;
    std::ostringstream checks_json;
    write_checks_json(checks_json, checks);
    side["checks"] = nlohmann::ordered_json::parse(checks_json.str());
    write_json_file(*f.out + ".json", side);
    out << "status=" << to_string(rec.status) << '\n';
    if (rec.t_blowup) out << "t_blowup=" << *rec.t_blowup << '\n';
    out << "light_cone=" << cone << '\n';
    for (const auto& c : checks) out << to_string(c.bound_id) << (c.pass ? " PASS" : " FAIL") << '\n';
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_identity(const Flags& f, std::ostream& out) {
  RunConfig cfg = load(f);
  cfg.problem.grid.t_max = f.tmax.value_or(2.0);
  validate(cfg.problem);
  if (!cfg.problem.b1.is_zero() || !cfg.problem.b2.is_zero()) {
    throw UsageError("the identity check needs zero damping");
  }
  const KernelParameters kp = kernel_parameters(cfg);
  const SolutionRecord rec = run(cfg.problem);
  const IdentityResiduals res = check_fundamental_identity(rec, cfg.problem, kp.r1, kp.r2, 8, extract_options(cfg, true));
  const bool ok = res.curlyU < kIdentityTolerance && res.curlyV < kIdentityTolerance;
  out << "r1=" << kp.r1 << '\n'
      << "r2=" << kp.r2 << '\n'
      << "residual_curlyU=" << res.curlyU << '\n'
      << "residual_curlyV=" << res.curlyV << '\n'
      << "identity " << (ok ? "PASS" : "FAIL") << '\n';
  if (f.out) {
    ExtractOptions o = extract_options(cfg, true);
    const FunctionalSeries s = extract(rec, cfg.problem, kp.r1, kp.r2, o);
    emit(f, out, [&](std::ostream& file) { write_series_csv(file, s); });
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load(f);
  SweepConfig sc;
  sc.base = cfg.problem;
  sc.eps_values = cfg.sweep.eps_values;
  sc.repeats = cfg.sweep.repeats;
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const LifespanTable table = sweep(sc);
  std::optional<ScalingVerdict> verdict;
  int blown = 0;
  for (const auto& r : table.rows) blown += r.blew_up ? 1 : 0;
  const bool power = table.prediction.kind == LifespanKind::PowerLaw;
  if (blown >= 3 && table.prediction.kind != LifespanKind::None) {
    verdict = fit_scaling(table, table.prediction.exponent);
  }
  const double stride = sc.base.grid.t_max / sc.base.grid.output_samples;
  const bool monotone = lifespan_monotone(table, stride);
  const double change = max_grid_change(table);

  emit(f, out, [&](std::ostream& s) { write_csv(s, table); });
  if (f.out) {
    std::ofstream file(*f.out + ".json");
    if (!file) throw UsageError("cannot open output file '" + *f.out + ".json'");
    write_summary_json(file, table, verdict);
  }
  out << "region=" << to_string(table.region) << '\n' << "blown_up_rows=" << blown << '\n';
  if (verdict) {
    out << "slope=" << verdict->slope << '\n'
        << "ci_halfwidth=" << verdict->ci_halfwidth << '\n'
        << "model_exponent=" << verdict->model_exponent << '\n'
        << "consistent=" << verdict->consistent << '\n'
        << "within_band=" << verdict->within_band << '\n';
  }
  out << "monotone=" << monotone << '\n' << "max_grid_change=" << change << '\n';
  if (!power) return kExitOk;  // critical sweeps are reported only
  const bool ok = verdict && verdict->consistent && monotone && change < kGridChangeTolerance;
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify(std::ostream& out) {
  bool all = true;
  auto report = [&](const std::string& name, bool pass, const std::string& detail) {
    all = all && pass;
    out << (pass ? "PASS " : "FAIL ") << name << ' ' << detail << '\n';
  };
  auto fmt = [](double x) {
    std::ostringstream s;
    s << std::setprecision(kDigits) << x;
    return s.str();
  };

  {
    double worst = 0.0;
    bool ordered = true;
    for (int n = 2; n <= 10; ++n) {
      const CuspResiduals r = cusp_residuals(n);
      worst = std::max({worst, std::abs(r.cubic), std::abs(r.theta1), std::abs(r.theta2)});
      ordered = ordered && cusp_exponents(n).ordered();
    }
    report("model.cusp", worst < 1e-10 && ordered, "max_residual=" + fmt(worst));
  }
  {
    double gap = 0.0;
    for (int n = 2; n <= 5; ++n) {
      for (double p : {1.5, 2.0, 3.0}) {
        const auto t = subcritical_sequences(n, ExponentPair(p, 2.0), kMaxIterations);
        gap = std::max({gap, t.C.max_relative_gap(), t.K.max_relative_gap()});
      }
      for (CriticalCase c : {CriticalCase::Theta1, CriticalCase::Double}) {
        const double q = c == CriticalCase::Double ? 0.0 : 2.0;
        const ExponentPair pq =
            c == CriticalCase::Double ? cusp_exponents(n).pair() : ExponentPair(critical_curve_p(c, n, q), q);
        gap = std::max(gap, critical_sequences(c, n, pq, kMaxIterations).max_relative_gap());
      }
      const double q2 = 0.5 * (1.0 + cusp_exponents(n).q_mix);
      const ExponentPair pq2(critical_curve_p(CriticalCase::Theta2, n, q2), q2);
      gap = std::max(gap, critical_sequences(CriticalCase::Theta2, n, pq2, kMaxIterations).max_relative_gap());
    }
    report("iteration.closed_forms", gap <= 1e-12, "max_gap=" + fmt(gap));
  }
  {
    double worst = 0.0;
    for (int n = 2; n <= 4; ++n) {
      for (double eps : {0.1, 0.5}) {
        const ExponentPair pq(2.0, 2.0);
        const IterationConstants consts = derive_constants(n, pq);
        if (classify(n, pq).region == Region::Supercritical) continue;
        const ThresholdTime tt = threshold_time(n, pq, eps, consts);
        const double driver = divergence_driver(tt.formula_id, n, pq, eps, tt.log_T, consts);
        worst = std::max(worst, std::abs(driver - 1.0));
      }
      const ExponentPair cusp = cusp_exponents(n).pair();
      const IterationConstants cc = derive_constants(n, cusp);
      const ThresholdTime tt = threshold_time(n, cusp, 0.5, cc);
      worst = std::max(worst, std::abs(divergence_driver(tt.formula_id, n, cusp, 0.5, tt.log_T, cc) - 1.0));
    }
    report("iteration.threshold", worst < 1e-9, "max_driver_gap=" + fmt(worst));
  }
  {
    const int n = 3;
    const KernelParameters kp = r_parameters(CriticalCase::Double, n, cusp_exponents(n).pair());
    bool ok = true;
    for (double r : {kp.r1, kp.r2}) {
      KernelConfig kc;
      kc.r = r;
      for (const auto& rep : verify_kernel_bounds(kc, n)) ok = ok && rep.passed;
    }
    report("specfun.kernel_bounds", ok, "n=3");
  }
  {
    const ManufacturedResult m = manufactured_convergence(3, 0.0, 0.05);
    const double order = m.orders.back();
    report("solver.convergence", order >= 1.8 && order <= 2.2, "order=" + fmt(order));
  }
  {
    ProblemSpec ps;
    ps.grid.t_max = 2.0;
    ps.grid.output_samples = 400;
    const SolutionRecord rec = run(ps);
    const KernelParameters kp = default_kernel_parameters(ps.n, ps.pq);
    const IdentityResiduals res = check_fundamental_identity(rec, ps, kp.r1, kp.r2);
    const double worst = std::max(res.curlyU, res.curlyV);
    report("functionals.identity", worst < kIdentityTolerance, "max_residual=" + fmt(worst));
    report("solver.light_cone", light_cone_check(rec, ps.R) < kLightConeTolerance,
           "leak=" + fmt(light_cone_check(rec, ps.R)));
  }
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blow-up lab for weakly coupled damped wave systems", "mixedwave"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> verbs{
      {"curve", "lifespan exponents and region of (n,p,q)"},
      {"cusp", "cusp point of the critical curve"},
      {"sequences", "iteration sequences and closed forms as CSV"},
      {"specfn", "kernel bound ratios and the asymptotic band of Phi"},
      {"solve", "run the radial solver"},
      {"identity", "check the integral identities on a short undamped run"},
      {"sweep", "epsilon sweep of the numerical lifespan"},
      {"verify", "run the property suite"}};
  std::map<std::string, CLI::App*> cmds;
  for (const auto& [name, help] : verbs) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_flags(cmd, flags);
    cmds[name] = cmd;
  }

  if (!args.empty() && !args[0].empty() && args[0][0] != '-' && !cmds.count(args[0])) {
    err << "error: unknown verb '" << args[0] << "'\n" << app.help();
    return kExitConfigError;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitConfigError;
  }

  const auto flags_state = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(kDigits);
  int code = kExitOk;
  try {
    if (cmds["curve"]->parsed()) code = cmd_curve(flags, out);
    else if (cmds["cusp"]->parsed()) code = cmd_cusp(flags, out);
    else if (cmds["sequences"]->parsed()) code = cmd_sequences(flags, out);
    else if (cmds["specfn"]->parsed()) code = cmd_specfn(flags, out);
    else if (cmds["solve"]->parsed()) code = cmd_solve(flags, out);
    else if (cmds["identity"]->parsed()) code = cmd_identity(flags, out);
    else if (cmds["sweep"]->parsed()) code = cmd_sweep(flags, out);
    else if (cmds["verify"]->parsed()) code = cmd_verify(out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    code = kExitConfigError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    code = kExitConfigError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    code = kExitCheckFailed;
  }
  out.flags(flags_state);
  out.precision(precision);
  return code;
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_and_dispatch(args, out, err);
}

}  // namespace mixedwave
