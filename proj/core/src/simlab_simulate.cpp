#include <cmath>

#include "mdest/error.hpp"
#include "mdest/simlab/rng.hpp"
#include "mdest/simlab/simulate.hpp"

namespace mdest::sim {

MomentAverages SimDataset::averages(std::size_t g) const {
  const auto& s = groups.at(g);
  return design == Design::iv ? iv_averages(s.delta_y, s.e, s.z) : did_averages(s.delta_y, s.e);
}

GroupSample SimDataset::sample(std::size_t g) const {
  const auto& s = groups.at(g);
  std::vector<UnitMoment> units;
  units.reserve(s.delta_y.size());
  for (std::size_t i = 0; i < s.delta_y.size(); ++i)
    units.push_back(design == Design::iv ? build_iv_unit(s.delta_y[i], s.e[i], s.z[i])
                                         : build_did_unit(s.delta_y[i], s.e[i]));
  return GroupSample(s.id, std::move(units));
}

Eigen::MatrixXd SimDataset::population_h2(std::size_t g) const {
  const double pi = groups.at(g).pi;
  Eigen::MatrixXd h(2, 2);
  if (design == Design::iv)
    h << 1.0, pi / 2.0, 0.5, pi / 2.0;
  else
    h << 1.0, pi, pi, pi;
  return h;
}

std::vector<Eigen::VectorXd> SimDataset::policies(const std::vector<Eigen::Index>& columns) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(groups.size());
  for (const auto& s : groups) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) w(static_cast<Eigen::Index>(j)) = s.policy(columns[j]);
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Eigen::VectorXd> SimDataset::thetas() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(groups.size());
  for (const auto& s : groups) out.push_back(s.theta);
  return out;
}

CompositionCell composition_cell(const ScenarioConfig& cfg, const Eigen::VectorXd& w) {
  CompositionCell c;
  double num = 0.0;
  for (std::size_t t = 0; t < cfg.trait.values.size(); ++t) {
    const double pe = cfg.trait.probs[t] * cfg.link.eval(0.0, cfg.trait.values[t], w);
    c.treated_share += pe;
    num += pe * cfg.trait.values[t];
  }
  c.trait_mean_treated = c.treated_share > 0.0 ? num / c.treated_share : 0.0;
  return c;
}

double true_tau(const ScenarioConfig& cfg, double alpha, const Eigen::VectorXd& w) {
  double tau = alpha;
  for (std::size_t j = 0; j < cfg.beta.size(); ++j) tau += cfg.beta[j] * w(static_cast<Eigen::Index>(j));
  if (cfg.design == Design::composition) tau += cfg.trait_effect * composition_cell(cfg, w).trait_mean_treated;
  return tau;
}

Eigen::VectorXd scenario_truth(const ScenarioConfig& cfg) {
  Eigen::VectorXd full = Eigen::Map<const Eigen::VectorXd>(cfg.beta.data(), static_cast<Eigen::Index>(cfg.beta.size()));
  if (cfg.design == Design::composition) {
    // Selection moves with W1 only, so the compositional shift is linear in W1 on {0, 1}.
    const double s0 = composition_cell(cfg, Eigen::Vector2d(0.0, 0.0)).trait_mean_treated;
    const double s1 = composition_cell(cfg, Eigen::Vector2d(1.0, 0.0)).trait_mean_treated;
    full(0) += cfg.trait_effect * (s1 - s0);
  }
  const auto cols = cfg.used_columns();
  Eigen::VectorXd out(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Eigen::Index>(j)) = full(cols[j]);
  return out;
}

namespace {

class NoiseSampler {
 public:
  explicit NoiseSampler(const NoiseLaw& law) : law_(law) {}
  double operator()(std::mt19937_64& eng) {
    if (law_.mix_prob > 0.0 && unif_(eng) < law_.mix_prob) return law_.mix_sigma * normal_(eng);
    if (law_.sigma == 0.0) return 0.0;
    return law_.sigma * normal_(eng);
  }

 private:
  NoiseLaw law_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

SimGroup draw_group(const ScenarioConfig& cfg, std::size_t g, std::mt19937_64& eng) {
  SimGroup s;
  s.id = "g" + std::to_string(g + 1);
  const auto n = static_cast<std::size_t>(cfg.group_size.draw(eng));
  const auto support = cfg.policy.support();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(eng);
  double acc = 0.0;
  s.policy = support.back().first;
  for (std::size_t i = 0; i + 1 < support.size(); ++i) {
    acc += support[i].second;
    if (u < acc) {
      s.policy = support[i].first;
      break;
    }
  }
  s.alpha = cfg.alpha.draw(eng);
  s.delta = cfg.delta.draw(eng);
  s.theta = Eigen::Vector2d(s.delta, true_tau(cfg, s.alpha, s.policy));
  s.pi = cfg.design == Design::composition ? composition_cell(cfg, s.policy).treated_share
                                           : cfg.link.eval(s.alpha, 0.0, s.policy);
  require(s.pi >= 0.0 && s.pi <= 1.0 && std::isfinite(s.pi), ErrorKind::config,
          "selection link produced a probability outside [0, 1]");
  s.delta_y.resize(n);
  s.e.resize(n);
  return s;
}

SimDataset simulate_impl(const ScenarioConfig& cfg, std::size_t replication, Design expected) {
  require(cfg.design == expected, ErrorKind::config,
          "scenario design is " + std::string(to_string(cfg.design)) + ", not " + std::string(to_string(expected)));
  cfg.validate();
  auto geng = stream_engine(cfg.seed, replication, Stream::groups);
  auto ueng = stream_engine(cfg.seed, replication, Stream::units);
  NoiseSampler noise(cfg.noise);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimDataset d;
  d.design = cfg.design;
  d.groups.reserve(cfg.groups);
  for (std::size_t g = 0; g < cfg.groups; ++g) {
    SimGroup s = draw_group(cfg, g, geng);
    const std::size_t n = s.delta_y.size();
    const double tau = s.theta(1);
    switch (cfg.design) {
      case Design::did:
        for (std::size_t i = 0; i < n; ++i) {
          const double e = unif(ueng) < s.pi ? 1.0 : 0.0;
          s.e[i] = e;
          s.delta_y[i] = s.delta + tau * e + noise(ueng);
        }
        break;
      case Design::iv:
        s.z.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double z = unif(ueng) < 0.5 ? 1.0 : 0.0;
          const double c = unif(ueng) < s.pi ? 1.0 : 0.0;
          const double e = z * c;
          s.z[i] = z;
          s.e[i] = e;
          s.delta_y[i] = s.delta + tau * e + noise(ueng);
        }
        break;
      case Design::composition: {
        double direct = s.alpha;
        for (std::size_t j = 0; j < cfg.beta.size(); ++j) direct += cfg.beta[j] * s.policy(static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < n; ++i) {
          const double t = cfg.trait.draw(ueng);
          const double e = unif(ueng) < cfg.link.eval(0.0, t, s.policy) ? 1.0 : 0.0;
          s.e[i] = e;
          s.delta_y[i] = s.delta + (direct + cfg.trait_effect * t) * e + noise(ueng);
        }
        break;
      }
    }
    d.groups.push_back(std::move(s));
  }
  return d;
}

}  // namespace

SimDataset simulate_did(const ScenarioConfig& cfg, std::size_t replication) {
  return simulate_impl(cfg, replication, Design::did);
}

SimDataset simulate_iv(const ScenarioConfig& cfg, std::size_t replication) {
  return simulate_impl(cfg, replication, Design::iv);
}

SimDataset simulate_composition(const ScenarioConfig& cfg, std::size_t replication) {
  return simulate_impl(cfg, replication, Design::composition);
}

SimDataset simulate(const ScenarioConfig& cfg, std::size_t replication) {
  return simulate_impl(cfg, replication, cfg.design);
}

}  // namespace mdest::sim
