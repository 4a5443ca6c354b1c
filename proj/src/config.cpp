#include "mixedwave/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mixedwave {

namespace {

using nlohmann::json;

std::string position_suffix(int line, int column) {
  if (line == 0) return "";
  return " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
}

void locate(std::string_view text, std::size_t byte, int& line, int& column) {
  line = 1;
  column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
}

const json* section(const json& doc, const char* name, const std::set<std::string>& keys) {
  if (!doc.contains(name)) return nullptr;
  const json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  for (const auto& item : s.items()) {
    if (!keys.count(item.key())) {
      throw ConfigError(std::string("unknown key '") + item.key() + "' in section '" + name + "'");
    }
  }
  return &s;
}

template <class T>
void read(const json* s, const char* key, T& target) {
  if (s == nullptr || !s->contains(key)) return;
  try {
    target = s->at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

void read_damping(const json* s, DampingSpec& d) {
  if (s == nullptr) return;
  std::string family(to_string(d.family));
  read(s, "family", family);
  try {
    d.family = damping_family_from_string(family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  read(s, "mu", d.mu);
  read(s, "beta", d.beta);
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(message + position_suffix(line, column)), line_(line), column_(column) {}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    int line = 0, column = 0;
    locate(text, e.byte == 0 ? 0 : e.byte - 1, line, column);
    throw ConfigError("malformed JSON", line, column);
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> sections{"problem", "grid", "damping1", "damping2", "data", "kernels", "sweep"};
  for (const auto& item : doc.items()) {
    if (!sections.count(item.key())) throw ConfigError("unknown section '" + item.key() + "'");
  }

  RunConfig cfg;
  ProblemSpec& ps = cfg.problem;

  const json* problem = section(doc, "problem", {"n", "p", "q", "R", "eps", "nonlinear", "enforce_hypotheses"});
  read(problem, "n", ps.n);
  double p = ps.pq.p(), q = ps.pq.q();
  read(problem, "p", p);
  read(problem, "q", q);
  try {
    ps.pq = ExponentPair(p, q);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  read(problem, "R", ps.R);
  read(problem, "eps", ps.eps);
  read(problem, "nonlinear", ps.nonlinear);
  read(problem, "enforce_hypotheses", ps.enforce_hypotheses);

  const json* grid = section(doc, "grid", {"dr", "r_max", "cfl", "t_max", "blowup_threshold", "output_samples",
                                           "growth_limit", "max_refinements"});
  read(grid, "dr", ps.grid.dr);
  read(grid, "r_max", ps.grid.r_max);
  read(grid, "cfl", ps.grid.cfl);
  read(grid, "t_max", ps.grid.t_max);
  read(grid, "blowup_threshold", ps.grid.blowup_threshold);
  read(grid, "output_samples", ps.grid.output_samples);
  read(grid, "growth_limit", ps.grid.growth_limit);
  read(grid, "max_refinements", ps.grid.max_refinements);

  read_damping(section(doc, "damping1", {"family", "mu", "beta"}), ps.b1);
  read_damping(section(doc, "damping2", {"family", "mu", "beta"}), ps.b2);

  const json* data = section(doc, "data", {"k", "a_u0", "a_u1", "a_v0", "a_v1"});
  read(data, "k", ps.data.k);
  read(data, "a_u0", ps.data.a_u0);
  read(data, "a_u1", ps.data.a_u1);
  read(data, "a_v0", ps.data.a_v0);
  read(data, "a_v1", ps.data.a_v1);

  const json* kernels = section(doc, "kernels", {"lambda0", "quad_nodes", "offset", "r1", "r2"});
  read(kernels, "lambda0", cfg.kernels.lambda0);
  read(kernels, "quad_nodes", cfg.kernels.quad_nodes);
  read(kernels, "offset", cfg.kernels.offset);
  if (kernels != nullptr) {
    for (const char* key : {"r1", "r2"}) {
      if (!kernels->contains(key) || kernels->at(key).is_null()) continue;
      double value = 0.0;
      read(kernels, key, value);
      (key[1] == '1' ? cfg.kernels.r1 : cfg.kernels.r2) = value;
    }
  }

  const json* sweep = section(doc, "sweep", {"eps", "repeats"});
  read(sweep, "eps", cfg.sweep.eps_values);
  read(sweep, "repeats", cfg.sweep.repeats);

  try {
    ps.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void write_config_json(std::ostream& out, const RunConfig& cfg) {
  const ProblemSpec& ps = cfg.problem;
  nlohmann::ordered_json doc;
  doc["problem"] = {{"n", ps.n},     {"p", ps.pq.p()},         {"q", ps.pq.q()},
                    {"R", ps.R},     {"eps", ps.eps},          {"nonlinear", ps.nonlinear},
                    {"enforce_hypotheses", ps.enforce_hypotheses}};
  doc["grid"] = {{"dr", ps.grid.dr},
                 {"r_max", ps.grid.r_max},
                 {"cfl", ps.grid.cfl},
                 {"t_max", ps.grid.t_max},
                 {"blowup_threshold", ps.grid.blowup_threshold},
                 {"output_samples", ps.grid.output_samples},
                 {"growth_limit", ps.grid.growth_limit},
                 {"max_refinements", ps.grid.max_refinements}};
  auto damping = [](const DampingSpec& d) {
    return nlohmann::ordered_json{{"family", std::string(to_string(d.family))}, {"mu", d.mu}, {"beta", d.beta}};
  };
  doc["damping1"] = damping(ps.b1);
  doc["damping2"] = damping(ps.b2);
  doc["data"] = {{"k", ps.data.k},
                 {"a_u0", ps.data.a_u0},
                 {"a_u1", ps.data.a_u1},
                 {"a_v0", ps.data.a_v0},
                 {"a_v1", ps.data.a_v1}};
  nlohmann::ordered_json kernels{{"lambda0", cfg.kernels.lambda0},
                                 {"quad_nodes", cfg.kernels.quad_nodes},
                                 {"offset", cfg.kernels.offset}};
  kernels["r1"] = cfg.kernels.r1 ? nlohmann::ordered_json(*cfg.kernels.r1) : nlohmann::ordered_json(nullptr);
  kernels["r2"] = cfg.kernels.r2 ? nlohmann::ordered_json(*cfg.kernels.r2) : nlohmann::ordered_json(nullptr);
  doc["kernels"] = kernels;
  doc["sweep"] = {{"eps", cfg.sweep.eps_values}, {"repeats", cfg.sweep.repeats}};
  out << doc.dump(2) << '\n';
}

}  // namespace mixedwave
