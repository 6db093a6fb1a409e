#include "scfo/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scfo {

using nlohmann::json;

namespace {

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_matrix(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw DimensionError("config: ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

BoolMatrix to_bool_matrix(const json& j) {
  const auto rows = j.get<std::vector<std::vector<bool>>>();
  if (rows.empty()) return BoolMatrix();
  BoolMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw DimensionError("config: ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

json from_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <typename M>
json from_matrix(const M& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(static_cast<typename M::Scalar>(m(r, c)));
    out.push_back(row);
  }
  return out;
}

Polynomial to_polynomial(const json& terms, int n_vars) {
  std::vector<Monomial> out;
  for (const auto& t : terms) {
    const auto row = t.get<std::vector<double>>();
    if (static_cast<int>(row.size()) != n_vars + 1) throw DimensionError("config: monomial arity");
    Monomial m;
    m.coef = row[0];
    for (int i = 0; i < n_vars; ++i) {
      const double p = row[static_cast<std::size_t>(i) + 1];
      if (p < 0 || p != static_cast<int>(p)) throw std::invalid_argument("config: powers must be natural numbers");
      m.powers.push_back(static_cast<int>(p));
    }
    out.push_back(std::move(m));
  }
  return Polynomial(n_vars, std::move(out));
}

json from_polynomial(const Polynomial& p) {
  json out = json::array();
  for (const auto& m : p.terms()) {
    json row = json::array({m.coef});
    for (int e : m.powers) row.push_back(e);
    out.push_back(row);
  }
  return out;
}

ProblemDefinition definition_from(const json& j) {
  ProblemDefinition d;
  d.name = j.value("name", std::string("custom"));
  d.box.lo = to_vector(j.at("box").at("lo"));
  d.box.hi = to_vector(j.at("box").at("hi"));
  d.n_u = static_cast<int>(d.box.lo.size());
  d.u0 = to_vector(j.at("u0"));
  d.k_f = j.value("k_f", 100);
  const json& cost = j.at("cost");
  auto add_phase = [&](const json& c) {
    d.cost_phases.push_back({c.value("start", 0), to_polynomial(c.at("terms"), d.n_u)});
  };
  if (cost.is_array()) {
    for (const auto& c : cost) add_phase(c);
  } else {
    add_phase(cost);
  }
  for (const auto& c : j.value("constraints", json::array())) {
    d.constraints.push_back(to_polynomial(c.at("terms"), d.n_u));
    d.known_constraint.push_back(c.value("known", false));
  }
  d.known_cost = j.value("known_cost", false);
  if (j.contains("cost_kappa")) d.cost_kappa = to_vector(j.at("cost_kappa"));
  if (j.contains("q_bound")) d.q_bound = to_matrix(j.at("q_bound"));
  if (j.contains("lipschitz")) {
    const json& l = j.at("lipschitz");
    if (l.contains("kappa_hi")) d.kappa_hi = to_matrix(l.at("kappa_hi"));
    if (l.contains("kappa_lo")) d.kappa_lo = to_matrix(l.at("kappa_lo"));
    if (l.contains("kappa")) d.kappa_hi = to_matrix(l.at("kappa"));
    if (l.contains("concave_in")) d.concave_in = to_bool_matrix(l.at("concave_in"));
    d.directional_kappa = l.value("directional", false);
  }
  return d;
}

ExperimentCell cell_from(const json& j) {
  ExperimentCell c;
  if (j.contains("problem")) {
    const json& p = j.at("problem");
    if (p.is_string()) {
      c.problem = p.get<std::string>();
    } else {
      c.definition = definition_from(p);
      c.problem = c.definition->name;
      c.config.k_f = c.definition->k_f;
    }
  }
  CampaignConfig& cfg = c.config;
  if (!c.definition && (c.problem == "B" || c.problem == "B-changing")) cfg.k_f = 100;
  if (!c.definition && c.problem == "A") cfg.k_f = 1000;
  cfg.algorithm.kind = parse_algorithm(j.value("algorithm", std::string("IT")));
  cfg.impl = parse_implementation(j.value("impl", std::string("I")));
  cfg.sigma = j.value("sigma", 0.0);
  cfg.sigma_g = j.value("sigma_g", 0.0);
  cfg.k_f = j.value("k_f", cfg.k_f);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.adaptive_q = j.value("adaptive_q", false);
  cfg.truncate_constraint_noise = j.value("truncate_noise", false);
  cfg.real_plant_mode = j.value("real_plant", false);
  if (j.contains("q_bound")) cfg.q_bound = to_matrix(j.at("q_bound"));
  cfg.supervisor.reuse_history = j.value("reuse_history", false);
  if (j.contains("policy")) cfg.supervisor.policy = parse_policy(j.at("policy").get<std::string>());
  cfg.algorithm.step_length = j.value("step_length", cfg.algorithm.step_length);
  cfg.algorithm.random_scale = j.value("random_scale", cfg.algorithm.random_scale);
  cfg.algorithm.fit_window = j.value("fit_window", cfg.algorithm.fit_window);
  if (j.contains("model_curvature")) cfg.algorithm.model_curvature = to_vector(j.at("model_curvature"));
  c.slack_l = j.value("slack_l", 0.0);
  c.known = j.value("known", std::vector<std::string>{});
  for (const auto& pr : j.value("concave", json::array())) {
    const auto v = pr.get<std::vector<int>>();
    if (v.size() != 2) throw std::invalid_argument("config: concave entries are [constraint, input] pairs");
    c.concave.push_back({v[0] - 1, v[1] - 1});
  }
  c.label = j.value("label", c.problem + "-" + to_string(cfg.algorithm.kind) + "-" + to_string(cfg.impl));
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemDefinition parse_problem_definition(const std::string& json_text) {
  const json j = parse_json(json_text);
  return guarded([&] { return definition_from(j); });
}

ProblemDefinition load_problem_definition(const std::string& path) {
  return parse_problem_definition(read_text_file(path));
}

std::string problem_definition_to_json(const ProblemDefinition& def) {
  json j;
  j["name"] = def.name;
  j["box"] = {{"lo", from_vector(def.box.lo)}, {"hi", from_vector(def.box.hi)}};
  j["u0"] = from_vector(def.u0);
  j["k_f"] = def.k_f;
  json cost = json::array();
  for (const auto& ph : def.cost_phases) cost.push_back({{"start", ph.start_iteration}, {"terms", from_polynomial(ph.cost)}});
  j["cost"] = cost;
  json cons = json::array();
  for (std::size_t i = 0; i < def.constraints.size(); ++i) {
    const bool known = i < def.known_constraint.size() && def.known_constraint[i];
    cons.push_back({{"terms", from_polynomial(def.constraints[i])}, {"known", known}});
  }
  j["constraints"] = cons;
  j["known_cost"] = def.known_cost;
  if (def.cost_kappa) j["cost_kappa"] = from_vector(*def.cost_kappa);
  if (def.q_bound) j["q_bound"] = from_matrix(*def.q_bound);
  json lip = json::object();
  if (def.kappa_hi) lip["kappa_hi"] = from_matrix(*def.kappa_hi);
  if (def.kappa_lo) lip["kappa_lo"] = from_matrix(*def.kappa_lo);
  if (def.concave_in.size() > 0) lip["concave_in"] = from_matrix(def.concave_in);
  if (def.directional_kappa) lip["directional"] = true;
  if (!lip.empty()) j["lipschitz"] = lip;
  return j.dump(2);
}

ExperimentCell parse_cell(const std::string& json_text) {
  const json j = parse_json(json_text);
  return guarded([&] { return cell_from(j); });
}

GridSpec parse_grid(const std::string& json_text) {
  const json j = parse_json(json_text);
  return guarded([&] {
    GridSpec g;
    g.replicates = j.value("replicates", 1);
    g.seed_base = j.value("seed_base", std::uint64_t{1});
    if (j.contains("preset")) g.cells = preset_grid(j.at("preset").get<std::string>());
    for (const auto& c : j.value("cells", json::array())) g.cells.push_back(cell_from(c));
    if (g.cells.empty()) throw std::invalid_argument("config: grid has no cells");
    if (g.replicates < 1) throw std::invalid_argument("config: replicates must be positive");
    return g;
  });
}

GridSpec load_grid(const std::string& path) { return parse_grid(read_text_file(path)); }

}  // namespace scfo
