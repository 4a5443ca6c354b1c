#include "mixedwave/lifespan.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

namespace mixedwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RunStatus status_from_string(const std::string& s) {
  if (s == "completed") return RunStatus::Completed;
  if (s == "blew_up") return RunStatus::BlewUp;
  if (s == "numerical_failure") return RunStatus::NumericalFailure;
  throw std::invalid_argument("unknown run status '" + s + "'");
}

double parse_number(const std::string& s) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("malformed number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::ordered_json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void SweepConfig::validate() const {
  base.validate();
  if (eps_values.empty()) throw std::invalid_argument("sweep needs at least one eps value");
  for (std::size_t i = 0; i < eps_values.size(); ++i) {
    if (!(eps_values[i] > 0.0)) throw std::invalid_argument("eps values must be positive");
    if (i > 0 && !(eps_values[i] < eps_values[i - 1])) {
      throw std::invalid_argument("eps values must be strictly decreasing");
    }
  }
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
}

LifespanTable sweep(const SweepConfig& cfg) {
  cfg.validate();
  LifespanTable table;
  table.n = cfg.base.n;
  table.p = cfg.base.pq.p();
  table.q = cfg.base.pq.q();
  table.region = classify(cfg.base.n, cfg.base.pq).region;
  table.prediction = lifespan_prediction(cfg.base.n, cfg.base.pq);

  for (double eps : cfg.eps_values) {
    LifespanRow row;
    row.eps = eps;
    row.T_predicted_shape = table.prediction.kind == LifespanKind::None
                                ? kNaN
                                : std::pow(eps, table.prediction.exponent);
    std::vector<double> times;
    for (int r = 0; r < cfg.repeats; ++r) {
      ProblemSpec spec = cfg.base;
      spec.eps = eps;
      spec.grid.dr = cfg.base.grid.dr / std::pow(2.0, r);
      spec.grid.store_profiles = false;
      try {
        const SolutionRecord rec = run(spec);
        row.status = rec.status;
        row.light_cone = std::max(row.light_cone, rec.outside_cone);
        times.push_back(rec.t_blowup ? *rec.t_blowup : kNaN);
      } catch (const std::exception&) {
        row.status = RunStatus::NumericalFailure;
        times.push_back(kNaN);
      }
    }
    row.T_numeric = times.back();
    row.blew_up = row.status == RunStatus::BlewUp && std::isfinite(row.T_numeric);
    row.grid_change = times.size() >= 2
                          ? std::abs(times[times.size() - 2] - times.back()) / std::abs(times.back())
                          : kNaN;
    table.rows.push_back(row);
  }

  std::vector<double> x, y;
  for (const auto& row : table.rows) {
    if (!row.blew_up) continue;
    x.push_back(std::log(row.eps));
    y.push_back(std::log(row.T_numeric));
  }
  if (x.size() >= 2) table.fit = least_squares(x, y);
  return table;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least squares needs >= 2 points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("least squares needs distinct abscissae");
  LinearFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    sse += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) {
    const double dof = m - 2.0;
    const boost::math::students_t dist(dof);
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_halfwidth = tq * std::sqrt(sse / dof / sxx);
  }
  return fit;
}

ScalingVerdict fit_scaling(const LifespanTable& table, double model_exponent) {
  std::vector<double> x, y;
  for (const auto& row : table.rows) {
    if (!row.blew_up) continue;
    x.push_back(std::log(row.eps));
    y.push_back(std::log(row.T_numeric));
  }
  if (x.size() < 3) throw std::invalid_argument("fit_scaling needs at least 3 blown-up rows");
  const LinearFit fit = least_squares(x, y);
  ScalingVerdict v;
  v.slope = fit.slope;
  v.ci_halfwidth = fit.ci_halfwidth;
  v.model_exponent = model_exponent;
  const double scale = std::abs(model_exponent);
  v.consistent = fit.slope < 0.0 && std::abs(fit.slope) <= (1.0 + kSlopeBand) * scale;
  v.within_band = std::abs(fit.slope - model_exponent) <= kSlopeBand * scale;
  return v;
}

bool lifespan_monotone(const LifespanTable& table, double tolerance) {
  // Larger data dies sooner: walking towards smaller ε, T must not drop.
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : table.rows) {
    if (row.blew_up) pts.emplace_back(row.eps, row.T_numeric);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].second < pts[i - 1].second - tolerance) return false;
  }
  return true;
}

double max_grid_change(const LifespanTable& table) {
  double worst = 0.0;
  for (const auto& row : table.rows) {
    if (row.blew_up && std::isfinite(row.grid_change)) worst = std::max(worst, row.grid_change);
  }
  return worst;
}

void write_csv(std::ostream& out, const LifespanTable& table) {
  std::vector<LifespanRow> rows = table.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "eps,T_numeric,blew_up,T_predicted_shape,grid_change,status\n";
  auto num = [&buf](double x) {
    if (std::isnan(x)) buf << "nan";
    else buf << x;
  };
  for (const auto& r : rows) {
    num(r.eps);
    buf << ',';
    num(r.T_numeric);
    buf << ',' << (r.blew_up ? 1 : 0) << ',';
    num(r.T_predicted_shape);
    buf << ',';
    num(r.grid_change);
    buf << ',' << to_string(r.status) << '\n';
  }
  out << buf.str();
  if (!out) throw std::runtime_error("failed to write lifespan table");
}

LifespanTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "eps,T_numeric,blew_up,T_predicted_shape,grid_change,status") {
    throw std::invalid_argument("lifespan csv: unexpected header");
  }
  LifespanTable table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 6) {
      throw std::invalid_argument("lifespan csv: line " + std::to_string(lineno) + " has " +
                                  std::to_string(cells.size()) + " fields");
    }
    LifespanRow r;
    r.eps = parse_number(cells[0]);
    r.T_numeric = parse_number(cells[1]);
    r.blew_up = cells[2] == "1";
    r.T_predicted_shape = parse_number(cells[3]);
    r.grid_change = parse_number(cells[4]);
    r.status = status_from_string(cells[5]);
    table.rows.push_back(r);
  }
  return table;
}

void write_summary_json(std::ostream& out, const LifespanTable& table,
                        const std::optional<ScalingVerdict>& verdict) {
  nlohmann::ordered_json doc;
  doc["n"] = table.n;
  doc["p"] = table.p;
  doc["q"] = table.q;
  doc["region"] = std::string(to_string(table.region));
  doc["prediction"] = {{"kind", std::string(to_string(table.prediction.kind))},
                       {"exponent", table.prediction.exponent}};
  int blown = 0;
  for (const auto& r : table.rows) blown += r.blew_up ? 1 : 0;
  doc["rows"] = table.rows.size();
  doc["blown_up_rows"] = blown;
  if (table.fit) {
    doc["fit"] = {{"slope", table.fit->slope},
                  {"intercept", table.fit->intercept},
                  {"r_squared", table.fit->r_squared},
                  {"ci_halfwidth", table.fit->ci_halfwidth},
                  {"points", table.fit->points}};
  } else {
    doc["fit"] = nullptr;
  }
  if (verdict) {
    doc["verdict"] = {{"slope", verdict->slope},
                      {"ci_halfwidth", verdict->ci_halfwidth},
                      {"model_exponent", verdict->model_exponent},
                      {"consistent", verdict->consistent},
                      {"within_band", verdict->within_band}};
  } else {
    doc["verdict"] = nullptr;
  }
  doc["max_grid_change"] = number_or_null(max_grid_change(table));
  if (table.prediction.kind != LifespanKind::PowerLaw) {
    doc["note"] = "critical lifespans grow like exp(C eps^exponent); the sweep is reported without pass/fail";
  }
  doc["caveat"] =
      "the lifespan bound is asymptotic for eps <= eps0 with eps0 unspecified; the sweep cannot certify "
      "that its eps values lie in that regime";
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed to write lifespan summary");
}

}  // namespace mixedwave
