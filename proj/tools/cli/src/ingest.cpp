#include "mdest_cli/ingest.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "mdest/error.hpp"
#include "mdest_cli/csv.hpp"

namespace mdest::cli {

namespace {

std::string where(const CsvTable& t, std::size_t row) {
  return t.path.string() + ":" + std::to_string(t.line_numbers[row]);
}

std::size_t need_column(const CsvTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  require(c != std::string::npos, ErrorKind::parse, t.path.string() + ": missing column '" + name + "'");
  return c;
}

}  // namespace

IngestedData ingest_units(const std::filesystem::path& units_path, const std::filesystem::path& policy_path) {
  const CsvTable units = read_csv(units_path);
  const std::size_t c_id = need_column(units, "group_id");
  const std::size_t c_y = need_column(units, "delta_y");
  const std::size_t c_e = need_column(units, "e");
  const std::size_t c_z = units.column("z");
  const std::size_t c_w = units.column("weight");
  for (const auto& h : units.header)
    require(h == "group_id" || h == "delta_y" || h == "e" || h == "z" || h == "weight", ErrorKind::parse,
            units.path.string() + ": unknown column '" + h + "'");

  IngestedData out;
  out.iv = c_z != std::string::npos;
  out.weighted = c_w != std::string::npos;

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<UnitMoment>> by_group;
  for (std::size_t r = 0; r < units.rows.size(); ++r) {
    const std::string& id = units.rows[r][c_id];
    require(!id.empty(), ErrorKind::parse, where(units, r) + ": column 'group_id': missing value");
    const double dy = parse_number(units, r, c_y);
    const double e = parse_number(units, r, c_e);
    require(e == 0.0 || e == 1.0, ErrorKind::parse, where(units, r) + ": column 'e': must be 0 or 1");
    UnitMoment u = out.iv ? build_iv_unit(dy, e, parse_number(units, r, c_z)) : build_did_unit(dy, e);
    if (out.weighted) {
      const double w = parse_number(units, r, c_w);
      require(w >= 0.0, ErrorKind::parse, where(units, r) + ": column 'weight': must be >= 0");
      u = u.scaled(w);
    }
    auto [it, fresh] = by_group.try_emplace(id);
    if (fresh) order.push_back(id);
    it->second.push_back(std::move(u));
  }
  require(!order.empty(), ErrorKind::parse, units.path.string() + ": no data rows");

  const CsvTable pol = read_csv(policy_path);
  const std::size_t p_id = need_column(pol, "group_id");
  require(p_id == 0, ErrorKind::parse, pol.path.string() + ": 'group_id' must be the first column");
  const Eigen::Index p = static_cast<Eigen::Index>(pol.header.size()) - 1;
  require(p >= 1, ErrorKind::parse, pol.path.string() + ": no policy columns");
  for (Eigen::Index j = 0; j < p; ++j)
    require(pol.header[static_cast<std::size_t>(j) + 1] == "w_" + std::to_string(j + 1), ErrorKind::parse,
            pol.path.string() + ": policy columns must be named w_1..w_p in order");
  std::unordered_map<std::string, Eigen::VectorXd> policy_of;
  for (std::size_t r = 0; r < pol.rows.size(); ++r) {
    const std::string& id = pol.rows[r][0];
    require(!id.empty(), ErrorKind::parse, where(pol, r) + ": column 'group_id': missing value");
    Eigen::VectorXd w(p);
    for (Eigen::Index j = 0; j < p; ++j) w(j) = parse_number(pol, r, static_cast<std::size_t>(j) + 1);
    require(policy_of.emplace(id, std::move(w)).second, ErrorKind::parse,
            where(pol, r) + ": duplicate group '" + id + "'");
  }

  out.policy_dim = p;
  for (const auto& id : order) {
    auto it = policy_of.find(id);
    require(it != policy_of.end(), ErrorKind::parse,
            pol.path.string() + ": group '" + id + "' from " + units.path.string() + " has no policy row");
    out.samples.emplace_back(id, std::move(by_group[id]));
    out.policies.push_back(it->second);
  }
  return out;
}

std::map<std::string, Eigen::MatrixXd> ingest_auxiliary(const std::filesystem::path& path, Eigen::Index k) {
  const CsvTable t = read_csv(path);
  require(t.header.size() == static_cast<std::size_t>(k * k) + 1 && t.header[0] == "group_id", ErrorKind::parse,
          t.path.string() + ": expected columns group_id,h2_11,...,h2_" + std::to_string(k) + std::to_string(k));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const std::string name = "h2_" + std::to_string(i + 1) + std::to_string(j + 1);
      require(t.header[static_cast<std::size_t>(i * k + j) + 1] == name, ErrorKind::parse,
              t.path.string() + ": expected column '" + name + "'");
    }
  std::map<std::string, Eigen::MatrixXd> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Eigen::MatrixXd h(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) h(i, j) = parse_number(t, r, static_cast<std::size_t>(i * k + j) + 1);
    require(out.emplace(t.rows[r][0], std::move(h)).second, ErrorKind::parse,
            where(t, r) + ": duplicate group '" + t.rows[r][0] + "'");
  }
  return out;
}

void export_dataset(const sim::SimDataset& data, const std::vector<Eigen::Index>& columns,
                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorKind::invalid_input, "cannot create export directory " + dir.string());
  const bool iv = data.design == sim::Design::iv;

  std::ofstream units(dir / "units.csv");
  std::ofstream pols(dir / "policies.csv");
  std::ofstream aux(dir / "auxiliary.csv");
  require(units && pols && aux, ErrorKind::invalid_input, "cannot write into " + dir.string());
  units << (iv ? "group_id,delta_y,e,z\n" : "group_id,delta_y,e\n");
  const auto policies = data.policies(columns);
  const Eigen::Index p = static_cast<Eigen::Index>(columns.size());
  pols << "group_id";
  for (Eigen::Index j = 0; j < p; ++j) pols << ",w_" << j + 1;
  pols << '\n';
  aux << "group_id,h2_11,h2_12,h2_21,h2_22\n";
  for (std::size_t g = 0; g < data.size(); ++g) {
    const auto& s = data.groups[g];
    for (std::size_t i = 0; i < s.delta_y.size(); ++i) {
      units << s.id << ',' << format_double(s.delta_y[i]) << ',' << format_double(s.e[i]);
      if (iv) units << ',' << format_double(s.z[i]);
      units << '\n';
    }
    pols << s.id;
    for (Eigen::Index j = 0; j < p; ++j) pols << ',' << format_double(policies[g](j));
    pols << '\n';
    const Eigen::MatrixXd h = data.population_h2(g);
    aux << s.id;
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) aux << ',' << format_double(h(i, j));
    aux << '\n';
  }
  require(static_cast<bool>(units) && static_cast<bool>(pols) && static_cast<bool>(aux), ErrorKind::invalid_input,
          "writing the export failed");
}

}  // namespace mdest::cli
