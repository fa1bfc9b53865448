#include "mdest/simlab/monte_carlo.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "mdest/error.hpp"
#include "mdest/first_stage.hpp"
#include "mdest/gmm_estimator.hpp"
#include "mdest/md_estimator.hpp"
#include "mdest/simlab/tsls.hpp"

namespace mdest::sim {

namespace {
constexpr double z975 = 1.959963984540054;
}

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::md: return "md";
    case Estimator::md_alt: return "md_alt";
    case Estimator::gmm: return "gmm";
    case Estimator::tsls_pooled: return "tsls_pooled";
    case Estimator::oracle: return "oracle";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view tag) {
  for (Estimator e : {Estimator::md, Estimator::md_alt, Estimator::gmm, Estimator::tsls_pooled, Estimator::oracle})
    if (tag == to_string(e)) return e;
  fail(ErrorKind::config, "unknown estimator '" + std::string(tag) + "' (md, md_alt, gmm, tsls_pooled, oracle)");
}

void check_estimators(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators) {
  require(!estimators.empty(), ErrorKind::config, "at least one estimator is required");
  for (Estimator e : estimators) {
    if (e == Estimator::tsls_pooled)
      require(cfg.design == Design::iv, ErrorKind::config, "tsls_pooled needs an IV scenario");
  }
}

ReplicationRecord run_estimators(const ScenarioConfig& cfg, const SimDataset& data,
                                 const std::vector<Estimator>& estimators, std::size_t index) {
  ReplicationRecord rec;
  rec.index = index;
  const OracleSpec spec = cfg.second_stage();
  const auto policies = data.policies(cfg.used_columns());
  const std::size_t n_groups = data.size();
  std::vector<MomentAverages> avgs;
  avgs.reserve(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) avgs.push_back(data.averages(g));

  for (Estimator est : estimators) {
    EstimatorDraw d;
    try {
      FitResult fit;
      switch (est) {
        case Estimator::md:
        case Estimator::md_alt: {
          std::vector<GroupEstimate> ge;
          ge.reserve(n_groups);
          for (std::size_t g = 0; g < n_groups; ++g) {
            const auto& grp = data.groups[g];
            if (est == Estimator::md)
              ge.push_back(estimate_group(grp.id, grp.delta_y.size(), avgs[g], cfg.rank_tol));
            else
              ge.push_back(estimate_group_alt(grp.id, grp.delta_y.size(), avgs[g],
                                              AuxiliaryDesign(data.population_h2(g), cfg.rank_tol)));
          }
          fit = fit_md(ge, policies, spec);
          break;
        }
        case Estimator::gmm: {
          const auto kind = cfg.gmm_kind();
          const GmmWeights w = kind == GmmWeights::Kind::pooled_ols ? GmmWeights::pooled_ols() : GmmWeights::identity();
          fit = fit_gmm_pooled(avgs, policies, spec, w);
          break;
        }
        case Estimator::tsls_pooled: {
          std::vector<std::size_t> sizes;
          for (const auto& grp : data.groups) sizes.push_back(grp.delta_y.size());
          fit = tsls_pooled(avgs, sizes, policies, spec);
          break;
        }
        case Estimator::oracle: {
          const std::vector<int> ones(n_groups, 1);
          fit = fit_md(data.thetas(), ones, policies, spec);
          break;
        }
      }
      d.ok = true;
      d.coef = fit.basis_coef;
      d.se = fit.se_basis();
      d.dropped_share = static_cast<double>(fit.n_dropped) / static_cast<double>(n_groups);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::config || err.kind() == ErrorKind::internal) throw;
      d.ok = false;
      d.error = err.what();
    }
    rec.draws.push_back(std::move(d));
  }
  return rec;
}

std::vector<ReplicationRecord> run_replications(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators,
                                                std::size_t replications, unsigned threads) {
  require(replications >= 1, ErrorKind::config, "replications must be >= 1");
  cfg.validate();
  check_estimators(cfg, estimators);
  std::vector<ReplicationRecord> out(replications);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replications));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t r = next.fetch_add(1);
      if (r >= replications) return;
      try {
        const SimDataset data = simulate(cfg, r + 1);
        out[r] = run_estimators(cfg, data, estimators, r + 1);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::vector<McSummary> summarize(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators,
                                 const std::vector<ReplicationRecord>& records) {
  const Eigen::VectorXd truth = scenario_truth(cfg);
  const Eigen::Index m = truth.size();
  std::vector<McSummary> out;
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    McSummary s;
    s.estimator = estimators[e];
    s.tag = std::string(to_string(estimators[e]));
    s.truth = truth;
    s.mean = Eigen::VectorXd::Zero(m);
    s.sd = Eigen::VectorXd::Zero(m);
    s.coverage = Eigen::VectorXd::Zero(m);
    double dropped = 0.0;
    for (const auto& rec : records) {
      const auto& d = rec.draws.at(e);
      if (!d.ok) {
        ++s.failures;
        continue;
      }
      ++s.replications;
      s.mean += d.coef;
      dropped += d.dropped_share;
      for (Eigen::Index j = 0; j < m; ++j)
        if (std::abs(d.coef(j) - truth(j)) <= z975 * d.se(j)) s.coverage(j) += 1.0;
    }
    if (s.replications > 0) {
      const double r = static_cast<double>(s.replications);
      s.mean /= r;
      s.coverage /= r;
      s.mean_dropped_share = dropped / r;
      if (s.replications > 1) {
        for (const auto& rec : records) {
          const auto& d = rec.draws.at(e);
          if (d.ok) s.sd += (d.coef - s.mean).cwiseAbs2();
        }
        s.sd = (s.sd / (r - 1.0)).cwiseSqrt();
      }
      s.mc_se = s.sd / std::sqrt(r);
    } else {
      s.mean.setConstant(std::nan(""));
      s.mc_se = Eigen::VectorXd::Zero(m);
    }
    s.bias = s.mean - truth;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<McSummary> run_monte_carlo(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators,
                                       std::size_t replications, unsigned threads) {
  return summarize(cfg, estimators, run_replications(cfg, estimators, replications, threads));
}

BoundCheck selection_bound_check(const ScenarioConfig& cfg, std::size_t replication) {
  const SimDataset data = simulate(cfg, replication);
  const OracleSpec spec = cfg.second_stage();
  const auto policies = data.policies(cfg.used_columns());
  const auto thetas = data.thetas();
  const std::size_t n_groups = data.size();
  std::vector<int> omega(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) omega[g] = solve_theta(data.averages(g), cfg.rank_tol) ? 1 : 0;
  const std::vector<int> ones(n_groups, 1);

  const FitResult all = fit_md(thetas, ones, policies, spec);
  const FitResult sel = fit_md(thetas, omega, policies, spec);
  BoundCheck out;
  out.realized = std::sqrt((sel.alpha_hat - all.alpha_hat).squaredNorm() + (sel.B_hat - all.B_hat).squaredNorm());
  out.bound = md_bias_bound(policies, omega, all.residuals, spec, ResidualSource::oracle);
  return out;
}

}  // namespace mdest::sim
