#include "pdiv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pdiv/errors.hpp"

namespace pdiv {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + (where.empty() ? std::string("/") : where) + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(where + "/" + key, "unknown key");
  }
}

double number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(where + "/" + key, "expected a number");
  return v.get<double>();
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& where,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(where + "/" + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(where + "/" + key + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

PhaseTypeLaw parse_law(const json& j, const std::string& where) {
  check_keys(j, where, {"alpha", "T"});
  if (!j.contains("alpha") || !j.contains("T")) fail(where, "needs both alpha and T");
  const auto alpha = number_list(j, "alpha", where, {});
  const auto& rows = j.at("T");
  if (!rows.is_array() || rows.size() != alpha.size()) {
    fail(where + "/T", "expected a square matrix matching alpha");
  }
  PhaseTypeLaw law;
  const auto m = static_cast<Eigen::Index>(alpha.size());
  law.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  law.T.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows[i];
    const std::string rw = where + "/T/" + std::to_string(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) fail(rw, "bad row length");
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!row[k].is_number()) fail(rw + "/" + std::to_string(k), "expected a number");
      law.T(i, k) = row[k].get<double>();
    }
  }
  try {
    validate(law);
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  return law;
}

json law_to_json(const PhaseTypeLaw& law) {
  json T = json::array();
  for (Eigen::Index i = 0; i < law.T.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < law.T.cols(); ++k) row.push_back(law.T(i, k));
    T.push_back(row);
  }
  return json{{"alpha", std::vector<double>(law.alpha.data(), law.alpha.data() + law.alpha.size())},
              {"T", T}};
}

}  // namespace

PhaseTypeLevyModel ExperimentConfig::build_model() const {
  return PhaseTypeLevyModel(model.c, model.sigma, model.kappa,
                            model.law ? *model.law : folded_normal_phase_fit());
}

json ExperimentConfig::to_json() const {
  json j;
  j["model"] = {{"c", model.c}, {"sigma", model.sigma}, {"kappa", model.kappa}};
  j["model"]["jumps"] = model.law ? law_to_json(*model.law) : json("builtin_folded_normal");
  j["problem"] = {{"kind", to_string(problem.kind)}, {"q", problem.q}, {"r", problem.r}};
  if (problem.kind == ProblemKind::dividends) {
    j["problem"]["rho"] = problem.rho;
  } else {
    j["problem"]["beta"] = problem.beta;
  }
  j["grid"] = {{"x_max", grid.x_max}, {"n_points", grid.n_points}};
  j["mc"] = {{"paths", mc.paths},           {"seed", mc.seed},
             {"horizon_eps", mc.horizon_eps}, {"dt_max", mc.dt_max},
             {"antithetic", mc.antithetic},   {"x_list", mc_x_list}};
  j["sweep"] = {{"over", sweep.over},
                {"r_list", sweep.r_list},
                {"rho_list", sweep.rho_list},
                {"b_list", sweep.b_list}};
  j["reference_x"] = reference_x;
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  check_keys(doc, "", {"model", "problem", "grid", "mc", "sweep", "reference_x"});

  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    check_keys(m, "/model", {"c", "sigma", "kappa", "jumps"});
    cfg.model.c = number(m, "c", "/model", cfg.model.c);
    cfg.model.sigma = number(m, "sigma", "/model", cfg.model.sigma);
    cfg.model.kappa = number(m, "kappa", "/model", cfg.model.kappa);
    if (m.contains("jumps")) {
      const auto& jumps = m.at("jumps");
      if (jumps.is_string()) {
        if (jumps.get<std::string>() != "builtin_folded_normal") {
          fail("/model/jumps", "unknown builtin law '" + jumps.get<std::string>() + "'");
        }
      } else {
        cfg.model.law = parse_law(jumps, "/model/jumps");
      }
    }
  }

  if (doc.contains("problem")) {
    const auto& p = doc.at("problem");
    check_keys(p, "/problem", {"kind", "q", "r", "rho", "beta"});
    if (p.contains("kind")) {
      if (!p.at("kind").is_string()) fail("/problem/kind", "expected a string");
      const auto kind = p.at("kind").get<std::string>();
      if (kind == "dividends") {
        cfg.problem.kind = ProblemKind::dividends;
      } else if (kind == "bailout") {
        cfg.problem.kind = ProblemKind::bailout;
      } else {
        fail("/problem/kind", "must be 'dividends' or 'bailout'");
      }
    }
    if (cfg.problem.kind == ProblemKind::dividends && p.contains("beta")) {
      fail("/problem/beta", "only valid for kind 'bailout'");
    }
    if (cfg.problem.kind == ProblemKind::bailout && p.contains("rho")) {
      fail("/problem/rho", "only valid for kind 'dividends'");
    }
    cfg.problem.q = number(p, "q", "/problem", cfg.problem.q);
    cfg.problem.r = number(p, "r", "/problem", cfg.problem.r);
    cfg.problem.rho = number(p, "rho", "/problem", cfg.problem.rho);
    cfg.problem.beta = number(p, "beta", "/problem", cfg.problem.beta);
  }

  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    check_keys(g, "/grid", {"x_max", "n_points"});
    cfg.grid.x_max = number(g, "x_max", "/grid", cfg.grid.x_max);
    const double n = number(g, "n_points", "/grid", cfg.grid.n_points);
    if (n != std::floor(n) || n < 2 || n > 1e7) fail("/grid/n_points", "must be an integer >= 2");
    cfg.grid.n_points = static_cast<int>(n);
    if (cfg.grid.x_max < 0.0) fail("/grid/x_max", "must be >= 0");
  }

  if (doc.contains("mc")) {
    const auto& m = doc.at("mc");
    check_keys(m, "/mc", {"paths", "seed", "horizon_eps", "dt_max", "antithetic", "x_list"});
    if (m.contains("paths")) {
      if (!m.at("paths").is_number_unsigned()) fail("/mc/paths", "expected a positive integer");
      cfg.mc.paths = m.at("paths").get<std::size_t>();
    }
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned()) fail("/mc/seed", "expected an unsigned integer");
      cfg.mc.seed = m.at("seed").get<std::uint64_t>();
    }
    cfg.mc.horizon_eps = number(m, "horizon_eps", "/mc", cfg.mc.horizon_eps);
    cfg.mc.dt_max = number(m, "dt_max", "/mc", cfg.mc.dt_max);
    if (m.contains("antithetic")) {
      if (!m.at("antithetic").is_boolean()) fail("/mc/antithetic", "expected a boolean");
      cfg.mc.antithetic = m.at("antithetic").get<bool>();
    }
    cfg.mc_x_list = number_list(m, "x_list", "/mc", cfg.mc_x_list);
    for (const double x : cfg.mc_x_list) {
      if (!(x >= 0.0)) fail("/mc/x_list", "starting points must be >= 0");
    }
    try {
      cfg.mc.validate();
    } catch (const DomainError& e) {
      fail("/mc", e.what());
    }
  }

  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    check_keys(s, "/sweep", {"over", "r_list", "rho_list", "b_list"});
    if (s.contains("over")) {
      if (!s.at("over").is_string()) fail("/sweep/over", "expected a string");
      cfg.sweep.over = s.at("over").get<std::string>();
      if (cfg.sweep.over != "r" && cfg.sweep.over != "rho") {
        fail("/sweep/over", "must be 'r' or 'rho'");
      }
    }
    cfg.sweep.r_list = number_list(s, "r_list", "/sweep", cfg.sweep.r_list);
    cfg.sweep.rho_list = number_list(s, "rho_list", "/sweep", cfg.sweep.rho_list);
    cfg.sweep.b_list = number_list(s, "b_list", "/sweep", cfg.sweep.b_list);
    for (const double r : cfg.sweep.r_list) {
      if (!(r > 0.0)) fail("/sweep/r_list", "rates must be > 0");
    }
    for (const double b : cfg.sweep.b_list) {
      if (!(b >= 0.0)) fail("/sweep/b_list", "barriers must be >= 0");
    }
  }

  cfg.reference_x = number(doc, "reference_x", "", cfg.reference_x);
  if (!(cfg.reference_x >= 0.0)) fail("/reference_x", "must be >= 0");

  try {
    cfg.problem.validate();
  } catch (const DomainError& e) {
    fail("/problem", e.what());
  }
  try {
    (void)cfg.build_model();
  } catch (const DomainError& e) {
    fail("/model", e.what());
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column pair.
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "config syntax error at line " << line << ", column " << column << ": " << e.what();
    throw ConfigError(os.str());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pdiv
