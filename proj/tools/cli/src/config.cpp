#include "mdest_cli/config.hpp"

#include <fstream>
#include <set>

#include "mdest/error.hpp"

namespace mdest::cli {

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  require(obj.is_object(), ErrorKind::config, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key)) continue;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail(ErrorKind::config, where + ": unknown key '" + key + "' (allowed: " + list + ")");
  }
}

double get_number(const json& v, const std::string& where) {
  require(v.is_number(), ErrorKind::config, where + " must be a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const json& v, const std::string& where) {
  require(v.is_array(), ErrorKind::config, where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, where));
  return out;
}

std::size_t get_count(const json& v, const std::string& where) {
  require(v.is_number_integer() && v.get<long long>() >= 0, ErrorKind::config, where + " must be a non-negative integer");
  return v.get<std::size_t>();
}

bool get_bool(const json& v, const std::string& where) {
  require(v.is_boolean(), ErrorKind::config, where + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& where) {
  require(v.is_string(), ErrorKind::config, where + " must be a string");
  return v.get<std::string>();
}

sim::FiniteLaw parse_law(const json& v, const std::string& where) {
  if (v.is_number()) return sim::FiniteLaw::constant(v.get<double>());
  check_keys(v, {"values", "probs"}, where);
  require(v.contains("values"), ErrorKind::config, where + ".values is required");
  sim::FiniteLaw law;
  law.values = get_numbers(v["values"], where + ".values");
  if (v.contains("probs")) {
    law.probs = get_numbers(v["probs"], where + ".probs");
  } else {
    law.probs.assign(law.values.size(), law.values.empty() ? 0.0 : 1.0 / static_cast<double>(law.values.size()));
  }
  return law;
}

json law_to_json(const sim::FiniteLaw& law) { return {{"values", law.values}, {"probs", law.probs}}; }

GmmWeights::Kind parse_gmm_kind(const json& v, const std::string& where) {
  const std::string s = get_string(v, where);
  if (s == "identity") return GmmWeights::Kind::identity;
  if (s == "pooled_ols") return GmmWeights::Kind::pooled_ols;
  fail(ErrorKind::config, where + " must be 'identity' or 'pooled_ols'");
}

std::string gmm_kind_name(GmmWeights::Kind k) {
  switch (k) {
    case GmmWeights::Kind::identity: return "identity";
    case GmmWeights::Kind::pooled_ols: return "pooled_ols";
    case GmmWeights::Kind::custom: return "custom";
  }
  return "identity";
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::md: return "md";
    case Method::md_alt: return "md_alt";
    case Method::gmm: return "gmm";
    case Method::tsls: return "tsls";
  }
  return "md";
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::parse, path.string() + ": cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir, bool method_required) {
  check_keys(doc, {"method", "data", "design", "gmm_weights", "rank_tol", "per_group"}, "config");
  RunConfig c;
  if (doc.contains("method")) {
    const std::string m = get_string(doc["method"], "method");
    if (m == "md") c.method = Method::md;
    else if (m == "md_alt") c.method = Method::md_alt;
    else if (m == "gmm") c.method = Method::gmm;
    else if (m == "tsls") c.method = Method::tsls;
    else fail(ErrorKind::config, "method must be one of md, md_alt, gmm, tsls");
  }
  require(c.method || !method_required, ErrorKind::config, "method is required (md, md_alt, gmm, tsls)");

  require(doc.contains("data"), ErrorKind::config, "data block is required");
  const json& data = doc["data"];
  check_keys(data, {"units", "policies", "auxiliary"}, "data");
  require(data.contains("units") && data.contains("policies"), ErrorKind::config,
          "data.units and data.policies are required");
  auto resolve = [&](const json& v, const std::string& where) {
    std::filesystem::path p = get_string(v, where);
    return p.is_absolute() ? p : base_dir / p;
  };
  c.units = resolve(data["units"], "data.units");
  c.policies = resolve(data["policies"], "data.policies");
  if (data.contains("auxiliary")) c.auxiliary = resolve(data["auxiliary"], "data.auxiliary");

  if (doc.contains("design")) {
    const json& d = doc["design"];
    check_keys(d, {"gamma", "b0", "weights"}, "design");
    if (d.contains("gamma")) c.gamma = d["gamma"];
    if (d.contains("b0")) c.b0 = d["b0"];
    if (d.contains("weights")) {
      const std::string w = get_string(d["weights"], "design.weights");
      require(w == "unit" || w == "group_size", ErrorKind::config, "design.weights must be 'unit' or 'group_size'");
      c.weight_by_size = w == "group_size";
    }
  }
  if (doc.contains("gmm_weights")) c.gmm_weights = parse_gmm_kind(doc["gmm_weights"], "gmm_weights");
  if (doc.contains("rank_tol")) {
    c.rank_tol = get_number(doc["rank_tol"], "rank_tol");
    require(c.rank_tol >= 0.0, ErrorKind::config, "rank_tol must be >= 0");
  }
  if (doc.contains("per_group")) c.per_group = get_bool(doc["per_group"], "per_group");
  if (c.method == Method::md_alt)
    require(c.auxiliary.has_value(), ErrorKind::config, "method md_alt needs data.auxiliary");
  return c;
}

json RunConfig::echo() const {
  json j;
  j["method"] = method ? json(to_string(*method)) : json(nullptr);
  j["data"] = {{"units", units.string()}, {"policies", policies.string()}};
  if (auxiliary) j["data"]["auxiliary"] = auxiliary->string();
  j["design"] = {{"gamma", gamma}, {"b0", b0}, {"weights", weight_by_size ? "group_size" : "unit"}};
  j["gmm_weights"] = gmm_kind_name(gmm_weights);
  j["rank_tol"] = rank_tol;
  j["per_group"] = per_group;
  return j;
}

OracleSpec resolve_design(const RunConfig& cfg, Eigen::Index k, Eigen::Index p, std::vector<double> group_weights) {
  Eigen::MatrixXd gamma;
  const json& g = cfg.gamma;
  if (g.is_string()) {
    const std::string s = g.get<std::string>();
    if (s == "none") gamma = presets::gamma_none(k);
    else if (s == "ones") gamma = presets::gamma_ones(k);
    else if (s == "first") gamma = presets::gamma_unit(k, 0);
    else fail(ErrorKind::config, "design.gamma must be none, ones, first, {\"unit\": j} or a k x q matrix");
  } else if (g.is_object()) {
    check_keys(g, {"unit"}, "design.gamma");
    const std::size_t j = get_count(g["unit"], "design.gamma.unit");
    require(j >= 1 && static_cast<Eigen::Index>(j) <= k, ErrorKind::config, "design.gamma.unit out of range (1-based)");
    gamma = presets::gamma_unit(k, static_cast<Eigen::Index>(j) - 1);
  } else {
    require(g.is_array() && static_cast<Eigen::Index>(g.size()) == k, ErrorKind::config,
            "explicit design.gamma needs k rows");
    const std::size_t q = g[0].is_array() ? g[0].size() : 0;
    gamma.resize(k, static_cast<Eigen::Index>(q));
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto row = get_numbers(g[static_cast<std::size_t>(i)], "design.gamma row");
      require(row.size() == q, ErrorKind::config, "design.gamma rows must have equal length");
      for (std::size_t j = 0; j < q; ++j) gamma(i, static_cast<Eigen::Index>(j)) = row[j];
    }
  }

  std::vector<Eigen::MatrixXd> basis;
  const json& b = cfg.b0;
  if (b.is_string()) {
    const std::string s = b.get<std::string>();
    if (s == "full") basis = presets::basis_full(k, p);
    else if (s == "effect") basis = presets::basis_rows(k, p, {k - 1});
    else if (s == "scalar" || s == "diagonal") {
      require(p == k, ErrorKind::config, "design.b0 '" + s + "' needs as many policy columns as moments");
      basis = s == "scalar" ? presets::basis_scalar(k) : presets::basis_diagonal(k);
    } else {
      fail(ErrorKind::config, "design.b0 must be full, effect, scalar, diagonal, {\"rows\": [...]} or a list of k x p matrices");
    }
  } else if (b.is_object()) {
    check_keys(b, {"rows"}, "design.b0");
    std::vector<Eigen::Index> rows;
    for (double r : get_numbers(b["rows"], "design.b0.rows")) {
      require(r >= 1 && r <= static_cast<double>(k) && r == static_cast<double>(static_cast<Eigen::Index>(r)),
              ErrorKind::config, "design.b0.rows entries must be 1-based row indices");
      rows.push_back(static_cast<Eigen::Index>(r) - 1);
    }
    basis = presets::basis_rows(k, p, rows);
  } else {
    require(b.is_array(), ErrorKind::config, "design.b0 has an unsupported form");
    for (const auto& mat : b) {
      require(mat.is_array() && static_cast<Eigen::Index>(mat.size()) == k, ErrorKind::config,
              "each explicit design.b0 matrix needs k rows");
      Eigen::MatrixXd m(k, p);
      for (Eigen::Index i = 0; i < k; ++i) {
        const auto row = get_numbers(mat[static_cast<std::size_t>(i)], "design.b0 row");
        require(static_cast<Eigen::Index>(row.size()) == p, ErrorKind::config, "design.b0 rows need p entries");
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
      }
      basis.push_back(std::move(m));
    }
  }
  return OracleSpec(k, p, std::move(gamma), std::move(basis), std::move(group_weights));
}

sim::ScenarioConfig parse_scenario(const json& spec) {
  if (spec.is_string()) return sim::scenario_preset(spec.get<std::string>());
  check_keys(spec,
             {"preset", "name", "design", "groups", "group_size", "policy", "alpha", "delta", "beta", "link", "trait",
              "trait_effect", "noise", "seed", "gmm_weights", "policy_columns", "rank_tol"},
             "scenario");
  sim::ScenarioConfig c;
  if (spec.contains("preset")) c = sim::scenario_preset(get_string(spec["preset"], "scenario.preset"));
  if (spec.contains("name")) c.name = get_string(spec["name"], "scenario.name");
  if (spec.contains("design")) {
    const std::string d = get_string(spec["design"], "scenario.design");
    if (d == "did") c.design = sim::Design::did;
    else if (d == "iv") c.design = sim::Design::iv;
    else if (d == "composition") c.design = sim::Design::composition;
    else fail(ErrorKind::config, "scenario.design must be did, iv or composition");
  }
  if (spec.contains("groups")) c.groups = get_count(spec["groups"], "scenario.groups");
  if (spec.contains("group_size")) c.group_size = parse_law(spec["group_size"], "scenario.group_size");
  if (spec.contains("policy")) {
    const json& p = spec["policy"];
    check_keys(p, {"kind", "rho", "values", "probs"}, "scenario.policy");
    const std::string kind = get_string(p.value("kind", json("bernoulli")), "scenario.policy.kind");
    sim::PolicyLaw law;
    if (kind == "bernoulli") {
      law.kind = sim::PolicyLaw::Kind::bernoulli;
      if (p.contains("rho")) law.rho = get_number(p["rho"], "scenario.policy.rho");
    } else if (kind == "grid") {
      law.kind = sim::PolicyLaw::Kind::grid;
      require(p.contains("values"), ErrorKind::config, "scenario.policy.values is required for a grid");
      law.grid = get_numbers(p["values"], "scenario.policy.values");
    } else if (kind == "pair") {
      law.kind = sim::PolicyLaw::Kind::pair;
      require(p.contains("probs"), ErrorKind::config, "scenario.policy.probs is required for a pair");
      const auto probs = get_numbers(p["probs"], "scenario.policy.probs");
      require(probs.size() == 4, ErrorKind::config, "scenario.policy.probs needs P(00), P(01), P(10), P(11)");
      std::copy(probs.begin(), probs.end(), law.pair_probs.begin());
    } else {
      fail(ErrorKind::config, "scenario.policy.kind must be bernoulli, grid or pair");
    }
    c.policy = law;
  }
  if (spec.contains("alpha")) c.alpha = parse_law(spec["alpha"], "scenario.alpha");
  if (spec.contains("delta")) c.delta = parse_law(spec["delta"], "scenario.delta");
  if (spec.contains("beta")) c.beta = get_numbers(spec["beta"], "scenario.beta");
  if (spec.contains("link")) {
    const json& l = spec["link"];
    check_keys(l, {"kind", "a0", "a_alpha", "a_trait", "a_w", "pi"}, "scenario.link");
    sim::SelectionLink link;
    const std::string kind = get_string(l.value("kind", json("logistic")), "scenario.link.kind");
    if (kind == "constant") {
      link.kind = sim::SelectionLink::Kind::constant;
      require(l.contains("pi"), ErrorKind::config, "scenario.link.pi is required for a constant link");
      link.pi = get_number(l["pi"], "scenario.link.pi");
    } else if (kind == "logistic") {
      if (l.contains("a0")) link.a0 = get_number(l["a0"], "scenario.link.a0");
      if (l.contains("a_alpha")) link.a_alpha = get_number(l["a_alpha"], "scenario.link.a_alpha");
      if (l.contains("a_trait")) link.a_trait = get_number(l["a_trait"], "scenario.link.a_trait");
      if (l.contains("a_w")) link.a_w = get_numbers(l["a_w"], "scenario.link.a_w");
    } else {
      fail(ErrorKind::config, "scenario.link.kind must be logistic or constant");
    }
    c.link = link;
  }
  if (spec.contains("trait")) c.trait = parse_law(spec["trait"], "scenario.trait");
  if (spec.contains("trait_effect")) c.trait_effect = get_number(spec["trait_effect"], "scenario.trait_effect");
  if (spec.contains("noise")) {
    const json& n = spec["noise"];
    check_keys(n, {"sigma", "mix_prob", "mix_sigma"}, "scenario.noise");
    if (n.contains("sigma")) c.noise.sigma = get_number(n["sigma"], "scenario.noise.sigma");
    if (n.contains("mix_prob")) c.noise.mix_prob = get_number(n["mix_prob"], "scenario.noise.mix_prob");
    if (n.contains("mix_sigma")) c.noise.mix_sigma = get_number(n["mix_sigma"], "scenario.noise.mix_sigma");
  }
  if (spec.contains("seed")) {
    require(spec["seed"].is_number_unsigned() || (spec["seed"].is_number_integer() && spec["seed"].get<long long>() >= 0),
            ErrorKind::config, "scenario.seed must be a non-negative integer");
    c.seed = spec["seed"].get<std::uint64_t>();
  }
  if (spec.contains("gmm_weights")) c.gmm_weights = parse_gmm_kind(spec["gmm_weights"], "scenario.gmm_weights");
  if (spec.contains("policy_columns")) {
    c.policy_columns.clear();
    for (double v : get_numbers(spec["policy_columns"], "scenario.policy_columns")) {
      require(v >= 1 && v == static_cast<double>(static_cast<long long>(v)), ErrorKind::config,
              "scenario.policy_columns entries are 1-based column numbers");
      c.policy_columns.push_back(static_cast<Eigen::Index>(v) - 1);
    }
  }
  if (spec.contains("rank_tol")) c.rank_tol = get_number(spec["rank_tol"], "scenario.rank_tol");
  c.validate();
  return c;
}

json scenario_to_json(const sim::ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["design"] = std::string(sim::to_string(c.design));
  j["groups"] = c.groups;
  j["group_size"] = law_to_json(c.group_size);
  switch (c.policy.kind) {
    case sim::PolicyLaw::Kind::bernoulli: j["policy"] = {{"kind", "bernoulli"}, {"rho", c.policy.rho}}; break;
    case sim::PolicyLaw::Kind::grid: j["policy"] = {{"kind", "grid"}, {"values", c.policy.grid}}; break;
    case sim::PolicyLaw::Kind::pair:
      j["policy"] = {{"kind", "pair"}, {"probs", std::vector<double>(c.policy.pair_probs.begin(), c.policy.pair_probs.end())}};
      break;
  }
  j["alpha"] = law_to_json(c.alpha);
  j["delta"] = law_to_json(c.delta);
  j["beta"] = c.beta;
  if (c.link.kind == sim::SelectionLink::Kind::constant)
    j["link"] = {{"kind", "constant"}, {"pi", c.link.pi}};
  else
    j["link"] = {{"kind", "logistic"}, {"a0", c.link.a0}, {"a_alpha", c.link.a_alpha}, {"a_trait", c.link.a_trait},
                 {"a_w", c.link.a_w}};
  if (c.design == sim::Design::composition) {
    j["trait"] = law_to_json(c.trait);
    j["trait_effect"] = c.trait_effect;
  }
  j["noise"] = {{"sigma", c.noise.sigma}, {"mix_prob", c.noise.mix_prob}, {"mix_sigma", c.noise.mix_sigma}};
  j["seed"] = c.seed;
  j["gmm_weights"] = gmm_kind_name(c.gmm_kind());
  std::vector<long long> cols;
  for (auto col : c.used_columns()) cols.push_back(static_cast<long long>(col) + 1);
  j["policy_columns"] = cols;
  j["rank_tol"] = c.rank_tol;
  return j;
}

SimulateConfig parse_simulate_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  check_keys(doc, {"scenario", "estimators", "replications", "seed", "threads", "plim"}, "config");
  require(doc.contains("scenario"), ErrorKind::config, "scenario is required (preset name or object)");
  SimulateConfig c;
  c.scenario = parse_scenario(doc["scenario"]);
  require(doc.contains("estimators"), ErrorKind::config, "estimators is required");
  require(doc["estimators"].is_array() && !doc["estimators"].empty(), ErrorKind::config,
          "estimators must be a non-empty array");
  for (const auto& e : doc["estimators"]) c.estimators.push_back(sim::parse_estimator(get_string(e, "estimators[]")));
  require(doc.contains("replications"), ErrorKind::config, "replications is required");
  c.replications = get_count(doc["replications"], "replications");
  require(c.replications >= 1, ErrorKind::config, "replications must be >= 1");
  if (doc.contains("seed")) {
    require(doc["seed"].is_number_integer() && (doc["seed"].is_number_unsigned() || doc["seed"].get<long long>() >= 0),
            ErrorKind::config, "seed must be a non-negative integer");
    c.scenario.seed = doc["seed"].get<std::uint64_t>();
  }
  if (seed_override) c.scenario.seed = *seed_override;
  if (doc.contains("threads")) c.threads = static_cast<unsigned>(get_count(doc["threads"], "threads"));
  if (doc.contains("plim")) c.plim = get_bool(doc["plim"], "plim");
  sim::check_estimators(c.scenario, c.estimators);
  return c;
}

json SimulateConfig::echo() const {
  std::vector<std::string> tags;
  for (auto e : estimators) tags.emplace_back(sim::to_string(e));
  return {{"scenario", scenario_to_json(scenario)},
          {"estimators", tags},
          {"replications", replications},
          {"threads", threads},
          {"plim", plim}};
}

}  // namespace mdest::cli
