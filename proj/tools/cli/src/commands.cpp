#include "mdest_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mdest/diagnostics.hpp"
#include "mdest/error.hpp"
#include "mdest/first_stage.hpp"
#include "mdest/gmm_estimator.hpp"
#include "mdest/md_estimator.hpp"
#include "mdest/simlab/monte_carlo.hpp"
#include "mdest/simlab/plim.hpp"
#include "mdest/simlab/simulate.hpp"
#include "mdest/simlab/tsls.hpp"
#include "mdest_cli/config.hpp"
#include "mdest_cli/ingest.hpp"
#include "mdest_cli/table.hpp"

namespace mdest::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

std::string index_name(const char* stem, Eigen::Index i) { return std::string(stem) + "[" + std::to_string(i + 1) + "]"; }

json coefficients_json(const FitResult& fit) {
  json a = json::array();
  const Eigen::Index na = fit.alpha_coords.size();
  for (Eigen::Index i = 0; i < na; ++i)
    a.push_back({{"name", index_name("alpha", i)},
                 {"estimate", num(fit.alpha_coords(i))},
                 {"se", num(std::sqrt(std::max(fit.vcov(i, i), 0.0)))}});
  const Eigen::VectorXd se = fit.se_basis();
  for (Eigen::Index j = 0; j < fit.basis_coef.size(); ++j)
    a.push_back({{"name", index_name("b", j)}, {"estimate", num(fit.basis_coef(j))}, {"se", num(se(j))}});
  return a;
}

json selection_json(const SelectionReport& s) {
  return {{"total", s.total},
          {"dropped", s.dropped},
          {"share", s.share},
          {"heuristic_threshold", s.heuristic_threshold},
          {"flag", s.flag}};
}

json bound_json(const BoundReport& b) {
  return {{"value", num(b.bound_value)},
          {"kappa", num(b.kappa)},
          {"lambda_min_m", num(b.lambda_min_m)},
          {"max_policy_norm", num(b.max_policy_norm)},
          {"max_residual_norm", num(b.max_residual_norm)},
          {"dropped_share", num(b.dropped_share)},
          {"residuals", std::string(to_string(b.source))}};
}

json conditioning_json(const ConditioningSummary& c) {
  return {{"selected", c.selected}, {"min_singular", num(c.min_singular)}, {"median_singular", num(c.median_singular)}};
}

std::vector<GroupEstimate> first_stage(const RunConfig& cfg, const IngestedData& d, bool alt) {
  if (!alt) return estimate_groups(d.samples, cfg.rank_tol);
  const auto aux = ingest_auxiliary(*cfg.auxiliary, 2);
  std::vector<GroupEstimate> out;
  out.reserve(d.samples.size());
  for (const auto& s : d.samples) {
    const auto it = aux.find(s.group_id());
    require(it != aux.end(), ErrorKind::parse,
            cfg.auxiliary->string() + ": no auxiliary row for group '" + s.group_id() + "'");
    out.push_back(estimate_group_alt(s, AuxiliaryDesign(it->second, cfg.rank_tol)));
  }
  return out;
}

/// Everything estimate and diagnose share: data, design, first stage.
struct Prepared {
  RunConfig cfg;
  IngestedData data;
  std::optional<OracleSpec> spec;
  std::vector<GroupEstimate> estimates;
  std::vector<int> omega;
};

Prepared prepare(const json& config, const std::filesystem::path& base_dir, bool method_required) {
  Prepared p;
  p.cfg = parse_run_config(config, base_dir, method_required);
  p.data = ingest_units(p.cfg.units, p.cfg.policies);
  std::vector<double> weights;
  if (p.cfg.weight_by_size)
    for (const auto& s : p.data.samples) weights.push_back(static_cast<double>(s.n()));
  p.spec = resolve_design(p.cfg, 2, p.data.policy_dim, std::move(weights));
  p.estimates = first_stage(p.cfg, p.data, p.cfg.method == Method::md_alt);
  for (const auto& e : p.estimates) p.omega.push_back(e.omega());
  return p;
}

/// Proxy residuals: fitted residuals for the groups in the fit, zero elsewhere.
std::vector<Eigen::VectorXd> residuals_by_group(const FitResult& fit, std::size_t n_groups) {
  std::vector<Eigen::VectorXd> out(n_groups, Eigen::VectorXd::Zero(2));
  for (std::size_t i = 0; i < fit.used.size(); ++i) out[fit.used[i]] = fit.residuals[i];
  return out;
}

json groups_json(const Prepared& p, const FitResult* md_fit) {
  std::vector<std::optional<Eigen::VectorXd>> res(p.estimates.size());
  if (md_fit)
    for (std::size_t i = 0; i < md_fit->used.size(); ++i) res[md_fit->used[i]] = md_fit->residuals[i];
  json a = json::array();
  for (std::size_t g = 0; g < p.estimates.size(); ++g) {
    const auto& e = p.estimates[g];
    a.push_back({{"group_id", e.group_id},
                 {"n", e.n_g},
                 {"omega", e.omega()},
                 {"theta", e.theta_hat ? vec_json(*e.theta_hat) : json(nullptr)},
                 {"residual", res[g] ? vec_json(*res[g]) : json(nullptr)}});
  }
  return a;
}

json design_json(const OracleSpec& s) {
  return {{"k", s.k()}, {"p", s.p()}, {"q", s.q()}, {"m", s.m()}, {"kappa", num(s.kappa())}};
}

std::string selection_lines(const SelectionReport& s, const std::optional<BoundReport>& b) {
  std::ostringstream os;
  os << "selection: " << s.dropped << " of " << s.total << " groups dropped (share " << fmt(s.share, 4)
     << ", heuristic 1/sqrt(G) = " << fmt(s.heuristic_threshold, 4) << ")" << (s.flag ? "  WARNING: above heuristic" : "")
     << '\n';
  if (b)
    os << "bias bound (" << to_string(b->source) << " residuals): " << fmt(b->bound_value) << '\n';
  else
    os << "bias bound: unavailable\n";
  return os.str();
}

json plim_entry(const sim::ScenarioConfig& s, sim::Estimator e) {
  try {
    const Eigen::VectorXd truth = sim::scenario_truth(s);
    Eigen::VectorXd coef;
    if (e == sim::Estimator::tsls_pooled) {
      coef = truth;
      coef(0) += sim::tsls_weighted_cov_bias(sim::induced_tsls_states(s));
    } else {
      sim::PlimTarget target = sim::PlimTarget::oracle;
      if (e == sim::Estimator::md) target = sim::PlimTarget::md;
      if (e == sim::Estimator::md_alt) target = sim::PlimTarget::md_alt;
      if (e == sim::Estimator::gmm) target = sim::PlimTarget::gmm;
      const DiscreteScenario scn = sim::induced_scenario(s, target);
      coef = scn.design().coordinates(gmm_plim(scn).b_lim);
    }
    return {{"coef", vec_json(coef)}, {"bias", vec_json(coef - truth)}};
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::internal) throw;
    return {{"coef", nullptr}, {"bias", nullptr}, {"note", err.what()}};
  }
}

void write_export(const SimulateConfig& c, const std::filesystem::path& dir) {
  const sim::SimDataset data = sim::simulate(c.scenario, 1);
  export_dataset(data, c.scenario.used_columns(), dir);
  json est = {{"method", "md"},
              {"data", {{"units", "units.csv"}, {"policies", "policies.csv"}, {"auxiliary", "auxiliary.csv"}}},
              {"design", {{"gamma", "first"}, {"b0", "effect"}, {"weights", "unit"}}},
              {"rank_tol", c.scenario.rank_tol}};
  std::ofstream out(dir / "estimate.json");
  out << est.dump(2) << '\n';
  require(static_cast<bool>(out), ErrorKind::invalid_input, "cannot write " + (dir / "estimate.json").string());
}

}  // namespace

CommandResult cmd_estimate(const json& config, const std::filesystem::path& base_dir, const CommandOptions&) {
  const auto t0 = Clock::now();
  Prepared p = prepare(config, base_dir, true);
  const OracleSpec& spec = *p.spec;
  const Method method = *p.cfg.method;
  const auto& pol = p.data.policies;

  FitResult fit;
  std::optional<FitResult> md_fit;
  switch (method) {
    case Method::md:
    case Method::md_alt:
      fit = fit_md(p.estimates, pol, spec);
      md_fit = fit;
      break;
    case Method::gmm: {
      require(!(p.data.iv && p.cfg.gmm_weights == GmmWeights::Kind::pooled_ols), ErrorKind::config,
              "gmm_weights 'pooled_ols' needs a symmetric Jacobian; IV data (z column) needs 'identity'");
      const GmmWeights w =
          p.cfg.gmm_weights == GmmWeights::Kind::pooled_ols ? GmmWeights::pooled_ols() : GmmWeights::identity();
      fit = fit_gmm_pooled(p.data.samples, pol, spec, w);
      break;
    }
    case Method::tsls:
      require(p.data.iv, ErrorKind::config, "method tsls needs a z column in the units file");
      fit = sim::tsls_pooled(p.data.samples, pol, spec);
      break;
  }
  if (!md_fit) {
    try {
      md_fit = fit_md(p.estimates, pol, spec);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::internal) throw;
    }
  }

  const SelectionReport sel = selection_report(p.estimates);
  std::optional<BoundReport> bound;
  if (md_fit)
    bound = md_bias_bound(pol, p.omega, residuals_by_group(*md_fit, p.estimates.size()), spec, ResidualSource::proxy);
  const ConditioningSummary cond = conditioning_summary(p.estimates);

  json r;
  r["version"] = report_version;
  r["command"] = "estimate";
  r["config"] = p.cfg.echo();
  r["design"] = design_json(spec);
  r["coefficients"] = coefficients_json(fit);
  r["alpha"] = vec_json(fit.alpha_hat);
  r["B"] = mat_json(fit.B_hat);
  r["vcov"] = mat_json(fit.vcov);
  r["fit"] = {{"n_used", fit.n_used},
              {"n_dropped", fit.n_dropped},
              {"n_weak_lambda", fit.n_weak_lambda},
              {"objective", num(fit.objective)}};
  r["selection"] = selection_json(sel);
  r["bias_bound"] = bound ? bound_json(*bound) : json(nullptr);
  r["conditioning"] = conditioning_json(cond);
  if (p.cfg.per_group) r["groups"] = groups_json(p, md_fit ? &*md_fit : nullptr);
  r["timing"] = {{"seconds", seconds_since(t0)}};

  std::ostringstream os;
  os << "mdest estimate  method=" << to_string(method) << "  groups=" << p.estimates.size() << "  used=" << fit.n_used
     << "  dropped=" << fit.n_dropped << "\n\n";
  TextTable t({"coefficient", "estimate", "std.err"});
  for (const auto& c : r["coefficients"])
    t.add({c["name"].get<std::string>(), c["estimate"].is_null() ? "nan" : fmt(c["estimate"].get<double>()),
           c["se"].is_null() ? "nan" : fmt(c["se"].get<double>())});
  os << t.str() << '\n' << selection_lines(sel, bound);
  return {std::move(r), os.str()};
}

CommandResult cmd_diagnose(const json& config, const std::filesystem::path& base_dir, const CommandOptions&) {
  const auto t0 = Clock::now();
  Prepared p = prepare(config, base_dir, false);
  const OracleSpec& spec = *p.spec;
  const auto& pol = p.data.policies;

  const SelectionReport sel = selection_report(p.estimates);
  const ConditioningSummary cond = conditioning_summary(p.estimates);
  const FitResult prelim = fit_md(p.estimates, pol, spec);
  const BoundReport bound =
      md_bias_bound(pol, p.omega, residuals_by_group(prelim, p.estimates.size()), spec, ResidualSource::proxy);

  json r;
  r["version"] = report_version;
  r["command"] = "diagnose";
  r["config"] = p.cfg.echo();
  r["design"] = design_json(spec);
  r["selection"] = selection_json(sel);
  r["bias_bound"] = bound_json(bound);
  r["conditioning"] = conditioning_json(cond);
  if (p.cfg.per_group) r["groups"] = groups_json(p, &prelim);
  r["timing"] = {{"seconds", seconds_since(t0)}};

  std::ostringstream os;
  os << "mdest diagnose  groups=" << p.estimates.size() << "\n\n" << selection_lines(sel, bound);
  os << "conditioning: " << cond.selected << " selected, smallest singular value of H2 min " << fmt(cond.min_singular)
     << " median " << fmt(cond.median_singular) << '\n';
  return {std::move(r), os.str()};
}

CommandResult cmd_simulate(const json& config, const CommandOptions& opts) {
  const auto t0 = Clock::now();
  const SimulateConfig c = parse_simulate_config(config, opts.seed);
  const auto records = sim::run_replications(c.scenario, c.estimators, c.replications, c.threads);
  const auto sums = sim::summarize(c.scenario, c.estimators, records);

  json r;
  r["version"] = report_version;
  r["command"] = "simulate";
  r["config"] = c.echo();
  json summaries = json::array();
  for (const auto& s : sums)
    summaries.push_back({{"estimator", s.tag},
                         {"replications", s.replications},
                         {"failures", s.failures},
                         {"truth", vec_json(s.truth)},
                         {"mean", vec_json(s.mean)},
                         {"sd", vec_json(s.sd)},
                         {"mc_se", vec_json(s.mc_se)},
                         {"bias", vec_json(s.bias)},
                         {"coverage", vec_json(s.coverage)},
                         {"mean_dropped_share", num(s.mean_dropped_share)}});
  r["summaries"] = summaries;
  if (c.plim) {
    json pl = json::object();
    for (auto e : c.estimators) pl[std::string(sim::to_string(e))] = plim_entry(c.scenario, e);
    r["plim"] = pl;
  }
  if (opts.export_dir) {
    write_export(c, *opts.export_dir);
    r["export"] = {{"directory", opts.export_dir->string()}, {"replication", 1}};
  }
  r["timing"] = {{"seconds", seconds_since(t0)}};

  std::ostringstream os;
  os << "mdest simulate  scenario=" << c.scenario.name << "  design=" << sim::to_string(c.scenario.design)
     << "  G=" << c.scenario.groups << "  R=" << c.replications << "  seed=" << c.scenario.seed << "\n\n";
  std::vector<std::string> head{"estimator", "coef", "truth", "mean", "bias", "sd", "mc_se", "coverage", "dropped", "failed"};
  if (c.plim) head.push_back("plim");
  TextTable t(head);
  for (const auto& s : sums) {
    for (Eigen::Index j = 0; j < s.truth.size(); ++j) {
      std::vector<std::string> row{s.tag,           index_name("b", j),  fmt(s.truth(j)),    fmt(s.mean(j)),
                                   fmt(s.bias(j)),  fmt(s.sd(j)),        fmt(s.mc_se(j)),    fmt(s.coverage(j), 3),
                                   fmt(s.mean_dropped_share, 4), std::to_string(s.failures)};
      if (c.plim) {
        const json& coef = r["plim"][s.tag]["coef"];
        row.push_back(coef.is_null() || coef[static_cast<std::size_t>(j)].is_null()
                          ? "-"
                          : fmt(coef[static_cast<std::size_t>(j)].get<double>()));
      }
      t.add(std::move(row));
    }
  }
  os << t.str();
  if (opts.export_dir) os << "\nexported replication 1 to " << opts.export_dir->string() << '\n';
  return {std::move(r), os.str()};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Group-level policy effects: minimum distance and GMM estimation, diagnostics, simulation", "mdest"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report_version));

  std::string config_path, out_path, export_dir;
  std::uint64_t seed = 0;
  bool json_only = false;
  std::vector<CLI::Option*> seed_opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_path, "write the JSON report here");
    seed_opts.push_back(sub->add_option("--seed", seed, "override the configured seed (simulate)"));
    sub->add_flag("--json-only", json_only, "print the JSON report instead of the text summary");
  };
  CLI::App* est = app.add_subcommand("estimate", "fit a second-stage estimator to unit-level data");
  CLI::App* diag = app.add_subcommand("diagnose", "first stage, selection and conditioning diagnostics");
  CLI::App* simc = app.add_subcommand("simulate", "Monte Carlo on a synthetic scenario");
  add_common(est);
  add_common(diag);
  add_common(simc);
  simc->add_option("--export-data", export_dir, "dump replication 1 as CSV into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    CommandOptions opts;
    for (auto* o : seed_opts)
      if (o->count()) opts.seed = seed;
    if (!export_dir.empty()) opts.export_dir = std::filesystem::path(export_dir);
    const std::filesystem::path cfg_path(config_path);
    const json cfg = load_json(cfg_path);
    const std::filesystem::path base = std::filesystem::absolute(cfg_path).parent_path();

    CommandResult res;
    if (est->parsed()) res = cmd_estimate(cfg, base, opts);
    else if (diag->parsed()) res = cmd_diagnose(cfg, base, opts);
    else res = cmd_simulate(cfg, opts);

    if (!out_path.empty()) {
      std::ofstream f(out_path);
      f << res.report.dump(2) << '\n';
      require(static_cast<bool>(f), ErrorKind::invalid_input, "cannot write report to " + out_path);
    }
    if (json_only) out << res.report.dump(2) << '\n';
    else out << res.table;
    return 0;
  } catch (const Error& e) {
    err << "mdest: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "mdest: internal: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace mdest::cli
