#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdest/error.hpp"
#include "mdest/simlab/rng.hpp"
#include "mdest/simlab/scenario.hpp"

namespace mdest::sim {

std::string_view to_string(Design d) noexcept {
  switch (d) {
    case Design::did: return "did";
    case Design::iv: return "iv";
    case Design::composition: return "composition";
  }
  return "unknown";
}

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t replication, Stream stream) {
  const auto s = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
                    static_cast<std::uint32_t>(s), 0x6d646573u};
  return std::mt19937_64(seq);
}

void FiniteLaw::validate(std::string_view name) const {
  const std::string n(name);
  require(!values.empty() && values.size() == probs.size(), ErrorKind::config,
          n + ": values and probs must be non-empty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), ErrorKind::config, n + ": values must be finite");
    require(std::isfinite(probs[i]) && probs[i] >= 0.0, ErrorKind::config, n + ": probs must be >= 0");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorKind::config, n + ": probs must sum to 1");
}

double FiniteLaw::draw(std::mt19937_64& eng) const {
  if (values.size() == 1) return values[0];
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(eng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    acc += probs[i];
    if (u < acc) return values[i];
  }
  return values.back();
}

double FiniteLaw::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
  return m;
}

std::vector<std::pair<Eigen::VectorXd, double>> PolicyLaw::support() const {
  std::vector<std::pair<Eigen::VectorXd, double>> out;
  auto scalar = [](double v) { return Eigen::VectorXd::Constant(1, v); };
  switch (kind) {
    case Kind::bernoulli:
      out.emplace_back(scalar(0.0), 1.0 - rho);
      out.emplace_back(scalar(1.0), rho);
      break;
    case Kind::grid:
      for (double v : grid) out.emplace_back(scalar(v), 1.0 / static_cast<double>(grid.size()));
      break;
    case Kind::pair:
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd w(2);
        w << static_cast<double>(i / 2), static_cast<double>(i % 2);
        out.emplace_back(w, pair_probs[static_cast<std::size_t>(i)]);
      }
      break;
  }
  return out;
}

void PolicyLaw::validate() const {
  switch (kind) {
    case Kind::bernoulli:
      require(rho > 0.0 && rho < 1.0, ErrorKind::config, "policy.rho must lie in (0, 1)");
      break;
    case Kind::grid: {
      require(grid.size() >= 2, ErrorKind::config, "policy.grid needs at least two values");
      for (double v : grid) require(std::isfinite(v), ErrorKind::config, "policy.grid values must be finite");
      std::vector<double> sorted = grid;
      std::sort(sorted.begin(), sorted.end());
      require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::config,
              "policy.grid values must be distinct");
      break;
    }
    case Kind::pair: {
      double total = 0.0;
      for (double p : pair_probs) {
        require(std::isfinite(p) && p >= 0.0, ErrorKind::config, "policy.pair_probs must be >= 0");
        total += p;
      }
      require(std::abs(total - 1.0) <= 1e-9, ErrorKind::config, "policy.pair_probs must sum to 1");
      break;
    }
  }
}

double SelectionLink::eval(double alpha, double trait, const Eigen::VectorXd& w) const {
  if (kind == Kind::constant) return pi;
  double x = a0 + a_alpha * alpha + a_trait * trait;
  for (std::size_t j = 0; j < a_w.size(); ++j) x += a_w[j] * w(static_cast<Eigen::Index>(j));
  return 1.0 / (1.0 + std::exp(-x));
}

std::vector<Eigen::Index> ScenarioConfig::used_columns() const {
  if (!policy_columns.empty()) return policy_columns;
  std::vector<Eigen::Index> all;
  for (Eigen::Index j = 0; j < p(); ++j) all.push_back(j);
  return all;
}

GmmWeights::Kind ScenarioConfig::gmm_kind() const {
  if (gmm_weights) return *gmm_weights;
  return design == Design::iv ? GmmWeights::Kind::identity : GmmWeights::Kind::pooled_ols;
}

OracleSpec ScenarioConfig::second_stage() const {
  return presets::effect_row_design(static_cast<Eigen::Index>(used_columns().size()));
}

void ScenarioConfig::validate() const {
  require(groups >= 1, ErrorKind::config, "groups must be >= 1");
  group_size.validate("group_size");
  for (double n : group_size.values)
    require(n >= 1.0 && n == std::floor(n) && n <= 1e9, ErrorKind::config, "group_size values must be positive integers");
  policy.validate();
  alpha.validate("alpha");
  delta.validate("delta");
  require(beta.size() == static_cast<std::size_t>(p()), ErrorKind::config,
          "beta needs one entry per policy column");
  for (double b : beta) require(std::isfinite(b), ErrorKind::config, "beta entries must be finite");
  require(std::isfinite(noise.sigma) && noise.sigma >= 0.0, ErrorKind::config, "noise.sigma must be >= 0");
  require(std::isfinite(noise.mix_prob) && noise.mix_prob >= 0.0 && noise.mix_prob <= 1.0, ErrorKind::config,
          "noise.mix_prob must lie in [0, 1]");
  require(std::isfinite(noise.mix_sigma) && noise.mix_sigma >= 0.0, ErrorKind::config, "noise.mix_sigma must be >= 0");
  require(std::isfinite(rank_tol) && rank_tol >= 0.0, ErrorKind::config, "rank_tol must be >= 0");

  if (link.kind == SelectionLink::Kind::constant) {
    require(std::isfinite(link.pi) && link.pi >= 0.0 && link.pi <= 1.0, ErrorKind::config,
            "link.pi must lie in [0, 1]");
  } else {
    require(std::isfinite(link.a0) && std::isfinite(link.a_alpha) && std::isfinite(link.a_trait), ErrorKind::config,
            "link coefficients must be finite");
    require(link.a_w.empty() || link.a_w.size() == static_cast<std::size_t>(p()), ErrorKind::config,
            "link.a_w needs one entry per policy column");
    for (double a : link.a_w) require(std::isfinite(a), ErrorKind::config, "link coefficients must be finite");
  }

  if (design == Design::composition) {
    require(policy.kind == PolicyLaw::Kind::pair, ErrorKind::config,
            "composition scenarios need a two-dimensional pair policy");
    require(link.a_alpha == 0.0, ErrorKind::config, "composition selection may not depend on alpha");
    require(link.a_w.size() < 2 || link.a_w[1] == 0.0, ErrorKind::config,
            "composition selection may depend on the first policy column only");
    trait.validate("trait");
    require(std::isfinite(trait_effect), ErrorKind::config, "trait_effect must be finite");
  } else {
    require(link.a_trait == 0.0 && trait_effect == 0.0, ErrorKind::config,
            "trait parameters apply to composition scenarios only");
  }

  std::vector<Eigen::Index> cols = used_columns();
  require(!cols.empty(), ErrorKind::config, "policy_columns must not be empty");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    require(cols[i] >= 0 && cols[i] < p(), ErrorKind::config, "policy_columns entry out of range");
    for (std::size_t j = 0; j < i; ++j) require(cols[i] != cols[j], ErrorKind::config, "policy_columns repeats a column");
  }
  if (gmm_kind() == GmmWeights::Kind::custom)
    fail(ErrorKind::config, "custom GMM weights are not available in simulations");
  if (design == Design::iv && gmm_kind() == GmmWeights::Kind::pooled_ols)
    fail(ErrorKind::config, "pooled_ols weighting needs symmetric moments; use identity for IV scenarios");
}

namespace {

ScenarioConfig base(std::string name, Design d) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.design = d;
  c.alpha = FiniteLaw::two_point(-1.0, 1.0);
  c.delta = FiniteLaw::two_point(0.0, 1.0);
  c.beta = {1.0};
  c.noise.sigma = 1.0;
  return c;
}

ScenarioConfig logistic_did(std::string name, double a0, double a_alpha, double a_w, std::size_t groups, double n) {
  ScenarioConfig c = base(std::move(name), Design::did);
  c.groups = groups;
  c.group_size = FiniteLaw::constant(n);
  c.link.a0 = a0;
  c.link.a_alpha = a_alpha;
  c.link.a_w = {a_w};
  return c;
}

}  // namespace

std::vector<std::string> scenario_presets() {
  return {"gmm_bias_demo",      "selection_demo",      "asymptotic_demo",       "iv_compliance_demo",
          "composition_demo",   "selection_small_n",   "selection_grid",        "selection_iv",
          "selection_mixed_size", "selection_composition"};
}

ScenarioConfig scenario_preset(std::string_view name) {
  ScenarioConfig c;
  if (name == "gmm_bias_demo") {
    c = logistic_did("gmm_bias_demo", -1.0, 1.0, 1.5, 2000, 200);
    c.seed = 20240501;
  } else if (name == "selection_demo") {
    c = logistic_did("selection_demo", -2.0, 1.0, 1.5, 5000, 5);
    c.seed = 20240502;
  } else if (name == "asymptotic_demo") {
    c = logistic_did("asymptotic_demo", 0.0, 0.4, 0.2, 300, 2000);
    c.noise.sigma = 0.2;
    c.seed = 20240503;
  } else if (name == "iv_compliance_demo") {
    c = base("iv_compliance_demo", Design::iv);
    c.groups = 1000;
    c.group_size = FiniteLaw::constant(400);
    c.link.a0 = 0.0;
    c.link.a_alpha = 1.0;
    c.link.a_w = {1.0};
    c.seed = 20240504;
  } else if (name == "composition_demo") {
    c = base("composition_demo", Design::composition);
    c.groups = 2000;
    c.group_size = FiniteLaw::constant(200);
    c.policy.kind = PolicyLaw::Kind::pair;
    c.policy.pair_probs = {0.35, 0.15, 0.15, 0.35};
    c.beta = {0.0, 1.0};
    c.trait_effect = 2.0;
    c.link.a0 = -0.5;
    c.link.a_trait = 1.5;
    c.link.a_w = {1.0, 0.0};
    c.seed = 20240505;
  } else if (name == "selection_small_n") {
    c = logistic_did("selection_small_n", -1.5, 1.0, 1.0, 400, 3);
    c.seed = 20240506;
  } else if (name == "selection_grid") {
    c = logistic_did("selection_grid", -3.0, 0.5, 1.0, 400, 8);
    c.policy.kind = PolicyLaw::Kind::grid;
    c.policy.grid = {0.0, 1.0, 2.0};
    c.seed = 20240507;
  } else if (name == "selection_iv") {
    c = base("selection_iv", Design::iv);
    c.groups = 400;
    c.group_size = FiniteLaw::constant(6);
    c.link.a0 = -1.0;
    c.link.a_alpha = 1.0;
    c.link.a_w = {1.0};
    c.seed = 20240508;
  } else if (name == "selection_mixed_size") {
    c = logistic_did("selection_mixed_size", -2.0, 1.0, 1.5, 400, 3);
    c.group_size = FiniteLaw{{3.0, 12.0}, {0.5, 0.5}};
    c.seed = 20240509;
  } else if (name == "selection_composition") {
    c = base("selection_composition", Design::composition);
    c.groups = 400;
    c.group_size = FiniteLaw::constant(4);
    c.policy.kind = PolicyLaw::Kind::pair;
    c.policy.pair_probs = {0.35, 0.15, 0.15, 0.35};
    c.beta = {0.0, 1.0};
    c.trait_effect = 2.0;
    c.link.a0 = -1.0;
    c.link.a_trait = 1.0;
    c.link.a_w = {1.0, 0.0};
    c.seed = 20240510;
  } else {
    std::ostringstream msg;
    msg << "unknown scenario '" << name << "'; available presets:";
    for (const auto& n : scenario_presets()) msg << ' ' << n;
    fail(ErrorKind::config, msg.str());
  }
  c.validate();
  return c;
}

}  // namespace mdest::sim
