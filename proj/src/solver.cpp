#include "mixedwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/Eigenvalues>

namespace mixedwave {

namespace {

double abs_pow(double x, double e) {
  x = std::abs(x);
  if (x == 0.0) return 0.0;
  if (e == 2.0) return x * x;
  return std::pow(x, e);
}

double max_abs(const std::vector<double>& w, std::size_t last) {
  double m = 0.0;
  for (std::size_t i = 0; i < last; ++i) m = std::max(m, std::abs(w[i]));
  return m;
}

bool all_finite(const std::vector<double>& w, std::size_t last) {
  for (std::size_t i = 0; i < last; ++i) {
    if (!std::isfinite(w[i])) return false;
  }
  return true;
}

// ½|w_next - w|²_m / dt² + ½ Σ r_{i+1/2}^{n-1} (D w_next)(D w) / dr
double staggered_energy(const RadialLaplacian& op, double dr, double dt, const std::vector<double>& w,
                        const std::vector<double>& w_next, std::size_t last) {
  const auto& m = op.volumes();
  const auto& f = op.face_weights();
  double kinetic = 0.0, potential = 0.0;
  for (std::size_t i = 0; i < last; ++i) {
    const double d = (w_next[i] - w[i]) / dt;
    kinetic += m[i] * d * d;
    potential += f[i] * (w_next[i + 1] - w_next[i]) * (w[i + 1] - w[i]) / dr;
  }
  return 0.5 * (kinetic + potential);
}

double compute_cfl_limit(int n) {
  // Symmetrized operator m^{-1/2} A m^{-1/2} at dr = 1 with a Dirichlet wall far
  // from the axis; leapfrog needs dt² λ_max < 4.
  constexpr int count = 1000;
  const RadialLaplacian op(n, 1.0, count + 1);
  const auto& m = op.volumes();
  const auto& f = op.face_weights();
  Eigen::VectorXd diag(count), sub(count - 1);
  for (int i = 0; i < count; ++i) {
    diag(i) = (f[i] + (i > 0 ? f[i - 1] : 0.0)) / m[i];
    if (i + 1 < count) sub(i) = -f[i] / std::sqrt(m[i] * m[i + 1]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("CFL limit eigenvalue solve failed");
  return 2.0 / std::sqrt(solver.eigenvalues().maxCoeff());
}

}  // namespace

double stable_cfl_limit(int n) {
  require_dimension(n);
  static std::mutex lock;
  static std::map<int, double> cache;
  const std::lock_guard<std::mutex> guard(lock);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::min(1.0, compute_cfl_limit(n))).first;
  return it->second;
}

double ProblemSpec::cfl() const {
  return grid.cfl == 0.0 ? kAutoCflFraction * stable_cfl_limit(n) : grid.cfl;
}

double InitialDataFamily::bump(double rho, double R) const {
  const double s = 1.0 - (rho * rho) / (R * R);
  if (s <= 0.0) return 0.0;
  return std::pow(s, k);
}

void ProblemSpec::validate() const {
  require_dimension(n);
  b1.validate();
  b2.validate();
  if (!(R > 0.0)) throw std::invalid_argument("support radius R must be positive");
  if (enforce_hypotheses ? !(eps > 0.0) : !(eps >= 0.0)) throw std::invalid_argument("eps must be positive");
  if (data.k < 2) throw std::invalid_argument("bump smoothness k must be >= 2");
  if (enforce_hypotheses) {
    if (data.a_u0 < 0.0 || data.a_u1 < 0.0 || data.a_v0 < 0.0 || data.a_v1 < 0.0) {
      throw std::invalid_argument("initial data must be nonnegative");
    }
    if (!(data.a_u1 > 0.0) || !(data.a_v0 > 0.0)) {
      throw std::invalid_argument("blow-up hypotheses need u1 and v0 not identically zero");
    }
  }
  if (!(grid.dr > 0.0)) throw std::invalid_argument("dr must be positive");
  if (grid.dr > R / 50.0 * (1.0 + 1e-12)) throw std::invalid_argument("dr must resolve the data (dr <= R/50)");
  if (!(grid.cfl >= 0.0) || !(grid.cfl < 1.0)) throw std::invalid_argument("CFL number must lie in (0, 1), or 0 for auto");
  if (grid.cfl >= stable_cfl_limit(n)) {
    throw std::invalid_argument("CFL number " + std::to_string(grid.cfl) + " violates the stability limit " +
                                std::to_string(stable_cfl_limit(n)) + " for n=" + std::to_string(n));
  }
  if (!(grid.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (grid.r_max != 0.0 && grid.r_max < R + grid.t_max) {
    throw std::invalid_argument("r_max must contain the light cone (r_max >= R + t_max)");
  }
  if (!(grid.blowup_threshold > 0.0)) throw std::invalid_argument("blow-up threshold must be positive");
  if (grid.output_samples < 1) throw std::invalid_argument("output_samples must be >= 1");
  if (!(grid.growth_limit > 1.0)) throw std::invalid_argument("growth limit must exceed 1");
  if (grid.max_refinements < 0) throw std::invalid_argument("max_refinements must be >= 0");
}

double ProblemSpec::r_max() const {
  return grid.r_max != 0.0 ? grid.r_max : R + grid.t_max + 4.0 * grid.dr;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "completed";
    case RunStatus::BlewUp: return "blew_up";
    case RunStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

double SupNorms::max() const { return std::max({u, ut, v}); }

RadialLaplacian::RadialLaplacian(int n, double dr, std::size_t count) : dr_(dr) {
  require_dimension(n);
  if (!(dr > 0.0)) throw std::invalid_argument("dr must be positive");
  if (count < 3) throw std::invalid_argument("radial grid needs at least 3 nodes");
  volume_.resize(count);
  face_.resize(count);
  plus_.resize(count);
  minus_.resize(count);
  const double h = 0.5 * dr;
  volume_[0] = std::pow(h, n) / n;
  for (std::size_t i = 1; i < count; ++i) {
    const double r = i * dr;
    volume_[i] = (std::pow(r + h, n) - std::pow(r - h, n)) / n;
  }
  for (std::size_t i = 0; i < count; ++i) face_[i] = std::pow((i + 0.5) * dr, n - 1);
  for (std::size_t i = 0; i < count; ++i) {
    plus_[i] = face_[i] / (dr * volume_[i]);
    minus_[i] = i == 0 ? 0.0 : face_[i - 1] / (dr * volume_[i]);
  }
}

void RadialLaplacian::apply(const std::vector<double>& w, std::vector<double>& out) const {
  out.resize(size());
  apply(w, out, size() - 1);
  out[size() - 1] = 0.0;
}

void RadialLaplacian::apply(const std::vector<double>& w, std::vector<double>& out, std::size_t last) const {
  if (w.size() != size() || out.size() != size()) throw std::invalid_argument("laplacian size mismatch");
  last = std::min(last, size() - 1);
  if (last == 0) return;
  out[0] = plus_[0] * (w[1] - w[0]);
  for (std::size_t i = 1; i < last; ++i) {
    out[i] = plus_[i] * (w[i + 1] - w[i]) - minus_[i] * (w[i] - w[i - 1]);
  }
}

void radial_laplacian(int n, double dr, const std::vector<double>& w, std::vector<double>& out) {
  RadialLaplacian(n, dr, w.size()).apply(w, out);
}

void leapfrog_step(const std::vector<double>& w_prev, const std::vector<double>& w,
                   const std::vector<double>& lap, const std::vector<double>& forcing, double b,
                   double dt, double boundary_value, std::vector<double>& w_next) {
  const std::size_t count = w.size();
  if (w_prev.size() != count || lap.size() != count || forcing.size() != count) {
    throw std::invalid_argument("leapfrog_step size mismatch");
  }
  w_next.resize(count);
  const double lo = 1.0 - 0.5 * b * dt;
  const double inv_hi = 1.0 / (1.0 + 0.5 * b * dt);
  const double dt2 = dt * dt;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    w_next[i] = (2.0 * w[i] - lo * w_prev[i] + dt2 * (lap[i] + forcing[i])) * inv_hi;
  }
  w_next[count - 1] = boundary_value;
}

double trapezoid_energy(int n, double dr, const std::vector<double>& w, const std::vector<double>& wt) {
  const std::size_t count = w.size();
  if (wt.size() != count || count < 3) throw std::invalid_argument("trapezoid_energy size mismatch");
  std::vector<double> radii(count), density(count);
  for (std::size_t i = 0; i < count; ++i) {
    radii[i] = i * dr;
    double wr = 0.0;
    if (i == 0) wr = 0.0;  // symmetry
    else if (i + 1 == count) wr = (w[i] - w[i - 1]) / dr;
    else wr = (w[i + 1] - w[i - 1]) / (2.0 * dr);
    density[i] = 0.5 * (wt[i] * wt[i] + wr * wr) * std::pow(radii[i], n - 1);
  }
  return trapezoid(radii, density);
}

SolutionRecord run(const ProblemSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const double dr = spec.grid.dr;
  const std::size_t count = static_cast<std::size_t>(std::ceil(spec.r_max() / dr - 1e-9)) + 1;
  const RadialLaplacian op(n, dr, count);
  const double p = spec.pq.p();
  const double q = spec.pq.q();

  SolutionRecord rec;
  rec.n = n;
  rec.dr = dr;
  rec.R = spec.R;
  rec.threshold = spec.grid.blowup_threshold;
  rec.radii.resize(count);
  for (std::size_t i = 0; i < count; ++i) rec.radii[i] = i * dr;

  std::vector<double> u(count, 0.0), v(count, 0.0), ut0(count, 0.0), vt0(count, 0.0);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const double f = spec.data.bump(rec.radii[i], spec.R);
    u[i] = spec.eps * spec.data.a_u0 * f;
    ut0[i] = spec.eps * spec.data.a_u1 * f;
    v[i] = spec.eps * spec.data.a_v0 * f;
    vt0[i] = spec.eps * spec.data.a_v1 * f;
  }

  double dt = spec.dt();
  long stride = std::max(1L, static_cast<long>(std::floor(spec.grid.t_max / (spec.grid.output_samples * dt))));
  // Nodes at index >= active are exactly zero: the stencil spreads one node per step.
  std::size_t active = std::min(count - 1, static_cast<std::size_t>(std::ceil(spec.R / dr)) + 2);

  std::vector<double> u_prev2(count, 0.0), u_prev(count, 0.0), v_prev2(count, 0.0), v_prev(count, 0.0);
  std::vector<double> u_next(count, 0.0), v_next(count, 0.0), lap(count, 0.0), force(count, 0.0);
  std::vector<double> ut(count, 0.0), vt(count, 0.0);

  auto sample = [&](double t, const std::vector<double>& uu, const std::vector<double>& uut,
                    const std::vector<double>& vv, const std::vector<double>& vvt, std::size_t last) {
    rec.times.push_back(t);
    const double cutoff = t + spec.R + 2.0 * dr;
    for (std::size_t i = 0; i < last; ++i) {
      if (rec.radii[i] <= cutoff) continue;
      rec.outside_cone = std::max({rec.outside_cone, std::abs(uu[i]), std::abs(uut[i]), std::abs(vv[i]), std::abs(vvt[i])});
    }
    rec.energy_u.push_back(staggered_energy(op, dr, dt, uu, u_next, last));
    rec.energy_v.push_back(staggered_energy(op, dr, dt, vv, v_next, last));
    if (spec.grid.store_profiles) {
      rec.u.push_back(uu);
      rec.ut.push_back(uut);
      rec.v.push_back(vv);
      rec.vt.push_back(vvt);
    }
  };
  auto push_norm = [&](double t, const SupNorms& s) {
    if (!rec.norm_times.empty() && rec.norm_times.back() == t) return;
    rec.norm_times.push_back(t);
    rec.sup_norms.push_back(s);
  };

  // First step by Taylor expansion with the exact initial velocities.
  {
    op.apply(u, lap, active);
    for (std::size_t i = 0; i < active; ++i) force[i] = spec.nonlinear ? abs_pow(v[i], q) : 0.0;
    const double b = spec.b1.b(0.0);
    for (std::size_t i = 0; i < active; ++i) {
      u_next[i] = u[i] + dt * ut0[i] + 0.5 * dt * dt * (lap[i] - b * ut0[i] + force[i]);
    }
    op.apply(v, lap, active);
    for (std::size_t i = 0; i < active; ++i) force[i] = spec.nonlinear ? abs_pow(ut0[i], p) : 0.0;
    const double b2 = spec.b2.b(0.0);
    for (std::size_t i = 0; i < active; ++i) {
      v_next[i] = v[i] + dt * vt0[i] + 0.5 * dt * dt * (lap[i] - b2 * vt0[i] + force[i]);
    }
  }
  const SupNorms initial{max_abs(u, active), max_abs(ut0, active), max_abs(v, active)};
  sample(0.0, u, ut0, v, vt0, active);
  push_norm(0.0, initial);
  if (initial.max() >= spec.grid.blowup_threshold) {
    throw std::invalid_argument("blow-up threshold must exceed the initial sup norms");
  }

  u_prev.swap(u);
  u.swap(u_next);
  v_prev.swap(v);
  v.swap(v_next);
  u_prev2 = u_prev;
  v_prev2 = v_prev;
  active = std::min(count - 1, active + 1);

  double t = dt;
  long level = 1;
  long since_sample = 1;
  SupNorms last_norms = initial;
  double last_time = 0.0;

  while (true) {
    const std::size_t next_active = std::min(count - 1, active + 1);
    // u^{n+1} with source |v^n|^q
    op.apply(u, lap, next_active);
    for (std::size_t i = 0; i < next_active; ++i) force[i] = spec.nonlinear ? abs_pow(v[i], q) : 0.0;
    leapfrog_step(u_prev, u, lap, force, spec.b1.b(t), dt, 0.0, u_next);
    for (std::size_t i = 0; i < next_active; ++i) ut[i] = (u_next[i] - u_prev[i]) / (2.0 * dt);
    // v^{n+1} with source |u_t^n|^p
    op.apply(v, lap, next_active);
    for (std::size_t i = 0; i < next_active; ++i) force[i] = spec.nonlinear ? abs_pow(ut[i], p) : 0.0;
    leapfrog_step(v_prev, v, lap, force, spec.b2.b(t), dt, 0.0, v_next);
    for (std::size_t i = 0; i < next_active; ++i) vt[i] = (v_next[i] - v_prev[i]) / (2.0 * dt);

    if (!all_finite(u_next, next_active) || !all_finite(v_next, next_active)) {
      rec.status = RunStatus::NumericalFailure;
      break;
    }

    const double now = std::max(max_abs(u, next_active), max_abs(v, next_active));
    const double ahead = std::max(max_abs(u_next, next_active), max_abs(v_next, next_active));
    if (level >= 2 && rec.refinements < spec.grid.max_refinements && ahead > 1.0 &&
        ahead > spec.grid.growth_limit * now) {
      // Halve dt: rebuild the level at t - dt/2 by quadratic interpolation.
      for (std::size_t i = 0; i < next_active; ++i) {
        const double um = (3.0 * u[i] + 6.0 * u_prev[i] - u_prev2[i]) / 8.0;
        const double vm = (3.0 * v[i] + 6.0 * v_prev[i] - v_prev2[i]) / 8.0;
        u_prev2[i] = u_prev[i];
        v_prev2[i] = v_prev[i];
        u_prev[i] = um;
        v_prev[i] = vm;
      }
      dt *= 0.5;
      stride *= 2;
      since_sample *= 2;
      ++rec.refinements;
      continue;
    }

    const SupNorms norms{max_abs(u, next_active), max_abs(ut, next_active), max_abs(v, next_active)};
    const bool crossed = norms.max() >= spec.grid.blowup_threshold;
    const bool done = t >= spec.grid.t_max - 1e-9 * dt;
    // The level before a crossing is kept so the crossing can be interpolated.
    if (crossed) push_norm(last_time, last_norms);
    if (since_sample >= stride || crossed || done) {
      sample(t, u, ut, v, vt, next_active);
      push_norm(t, norms);
      since_sample = 0;
    }
    if (crossed) {
      rec.status = RunStatus::BlewUp;
      rec.t_blowup = detect_blowup(rec.norm_times, rec.sup_norms, spec.grid.blowup_threshold).t_blowup;
      break;
    }
    if (done) break;

    last_norms = norms;
    last_time = t;
    u_prev2.swap(u_prev);
    u_prev.swap(u);
    u.swap(u_next);
    v_prev2.swap(v_prev);
    v_prev.swap(v);
    v.swap(v_next);
    active = next_active;
    t += dt;
    ++level;
    ++since_sample;
  }

  rec.t_final = t;
  rec.dt_final = dt;
  return rec;
}

BlowupDetection detect_blowup(const std::vector<double>& times, const std::vector<SupNorms>& norms,
                              double threshold) {
  if (times.size() != norms.size()) throw std::invalid_argument("detect_blowup size mismatch");
  BlowupDetection out;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const double m1 = norms[i].max();
    if (!(m1 >= threshold)) continue;
    out.flag = true;
    if (i == 0) {
      out.t_blowup = times[0];
      return out;
    }
    const double m0 = norms[i - 1].max();
    if (!(m0 > 0.0) || !(m1 > m0)) {
      out.t_blowup = times[i];
      return out;
    }
    const double s = (std::log(threshold) - std::log(m0)) / (std::log(m1) - std::log(m0));
    out.t_blowup = times[i - 1] + std::clamp(s, 0.0, 1.0) * (times[i] - times[i - 1]);
    return out;
  }
  return out;
}

double light_cone_check(const SolutionRecord& record, double R) {
  if (record.u.size() != record.times.size()) {
    if (R == record.R) return record.outside_cone;
    throw std::invalid_argument("light-cone check for a different radius needs stored profiles");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < record.times.size(); ++k) {
    const double cutoff = record.times[k] + R + 2.0 * record.dr;
    for (std::size_t i = 0; i < record.radii.size(); ++i) {
      if (record.radii[i] <= cutoff) continue;
      worst = std::max({worst, std::abs(record.u[k][i]), std::abs(record.ut[k][i]),
                        std::abs(record.v[k][i]), std::abs(record.vt[k][i])});
    }
  }
  return worst;
}

ManufacturedResult manufactured_convergence(int n, double b, double dr, double t_end, double length,
                                            double cfl) {
  require_dimension(n);
  if (!(dr > 0.0) || !(t_end > 0.0) || !(length > 4.0 * dr)) {
    throw std::invalid_argument("manufactured problem needs dr > 0, t_end > 0 and a long enough domain");
  }
  auto forcing = [n, b](double t, double r) {
    const double sinc = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
    return std::exp(-t) * (2.0 * std::cos(r) + (n - 1) * sinc) - b * std::exp(-t) * std::cos(r);
  };

  if (cfl == 0.0) cfl = kAutoCflFraction * stable_cfl_limit(n);
  if (!(cfl > 0.0) || cfl >= stable_cfl_limit(n)) throw std::invalid_argument("CFL number violates the stability limit");

  ManufacturedResult result;
  result.dr = dr;
  for (int level = 0; level < 3; ++level) {
    const double h = dr / std::pow(2.0, level);
    const std::size_t count = static_cast<std::size_t>(std::llround(length / h)) + 1;
    const double top = (count - 1) * h;
    const long steps = static_cast<long>(std::ceil(t_end / (cfl * h)));
    const double dt = t_end / steps;
    const RadialLaplacian op(n, h, count);

    std::vector<double> w_prev(count), w(count), w_next(count), lap(count), f(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double r = i * h;
      w_prev[i] = std::cos(r);
      f[i] = forcing(0.0, r);
    }
    op.apply(w_prev, lap);
    for (std::size_t i = 0; i < count; ++i) {
      const double wt0 = -std::cos(i * h);
      w[i] = w_prev[i] + dt * wt0 + 0.5 * dt * dt * (lap[i] - b * wt0 + f[i]);
    }
    w[count - 1] = std::exp(-dt) * std::cos(top);

    for (long s = 1; s < steps; ++s) {
      const double t = s * dt;
      for (std::size_t i = 0; i < count; ++i) f[i] = forcing(t, i * h);
      op.apply(w, lap);
      leapfrog_step(w_prev, w, lap, f, b, dt, std::exp(-(t + dt)) * std::cos(top), w_next);
      w_prev.swap(w);
      w.swap(w_next);
    }
    double err = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      err = std::max(err, std::abs(w[i] - std::exp(-t_end) * std::cos(i * h)));
    }
    result.errors.push_back(err);
  }
  for (std::size_t i = 1; i < result.errors.size(); ++i) {
    result.orders.push_back(std::log2(result.errors[i - 1] / result.errors[i]));
  }
  return result;
}

}  // namespace mixedwave
