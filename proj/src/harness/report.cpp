#include <cstdio>
#include <string>

#include <json.hpp>

#include "fluency/harness.hpp"

namespace fluency {
namespace {

std::string fixed3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  std::string out(buf);
  return out == "-0.000" ? "0.000" : out;
}

std::string cell_text(const ReportCell& cell) {
  if (!cell.value) return "n/a";
  std::string text = fixed3(*cell.value);
  if (cell.significantly_worse) text += "*";
  return cell.best ? "**" + text + "**" : text;
}

std::string row_text(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& cell : cells) out += " " + cell + " |";
  return out + "\n";
}

nlohmann::ordered_json cell_json(const ReportCell& cell) {
  nlohmann::ordered_json out;
  out["value"] = cell.value ? nlohmann::ordered_json(*cell.value) : nlohmann::ordered_json(nullptr);
  out["best"] = cell.best;
  out["p_value"] = cell.p_value ? nlohmann::ordered_json(*cell.p_value) : nlohmann::ordered_json(nullptr);
  out["significantly_worse"] = cell.significantly_worse;
  return out;
}

}  // namespace

std::string render_table(const MetricReport& report) {
  std::string out;
  out += "records: " + std::to_string(report.total);
  out += "; group by: " + std::string(to_string(report.group_by));
  if (report.rating_kappa) out += "; rater agreement (quadratic weighted kappa): " + fixed3(*report.rating_kappa);
  out += "\n\n";

  std::vector<std::string> header{"metric", "refs"};
  if (report.group_by == GroupBy::kNone) {
    header.insert(header.end(), {"Pearson", "MSE"});
  } else {
    for (const auto& g : report.groups) header.push_back("Pearson " + g);
    for (const auto& g : report.groups) header.push_back("MSE " + g);
  }
  out += row_text(header);
  out += row_text(std::vector<std::string>(header.size(), "---"));

  if (report.group_by != GroupBy::kNone) {
    std::vector<std::string> samples{"# samples", ""};
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t n : report.group_sizes) samples.push_back(std::to_string(n));
    }
    out += row_text(samples);
  }
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{row.name, row.refs};
    if (report.group_by == GroupBy::kNone) {
      cells.push_back(cell_text(row.overall_pearson));
      cells.push_back(cell_text(row.overall_mse));
    } else {
      for (const auto& cell : row.group_pearson) cells.push_back(cell_text(cell));
      for (const auto& cell : row.group_mse) cells.push_back(cell_text(cell));
    }
    out += row_text(cells);
  }
  out += "\nPearson: higher is better. MSE: lower is better. **bold**: best per column.\n";
  out += "*: significantly worse than best with p < 0.05; one-tailed; Fisher-Z-transformation "
         "for Pearson, two sample t-test (Welch) for MSE. n/a: degenerate variance.\n";
  return out;
}

std::string render_json(const MetricReport& report) {
  nlohmann::ordered_json out;
  out["format"] = "fluency-report v1";
  out["group_by"] = std::string(to_string(report.group_by));
  out["records"] = report.total;
  out["rating_kappa"] =
      report.rating_kappa ? nlohmann::ordered_json(*report.rating_kappa) : nlohmann::ordered_json(nullptr);
  out["significance_level"] = kSignificanceLevel;
  auto groups = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    groups.push_back({{"name", report.groups[g]}, {"records", report.group_sizes[g]}});
  }
  out["groups"] = groups;
  auto metrics = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json m;
    m["name"] = row.name;
    m["refs"] = row.refs;
    m["overall"] = {{"pearson", cell_json(row.overall_pearson)}, {"mse", cell_json(row.overall_mse)}};
    nlohmann::ordered_json per_group = nlohmann::ordered_json::object();
    for (std::size_t g = 0; g < report.groups.size(); ++g) {
      per_group[report.groups[g]] = {{"pearson", cell_json(row.group_pearson[g])},
                                     {"mse", cell_json(row.group_mse[g])}};
    }
    m["groups"] = per_group;
    metrics.push_back(std::move(m));
  }
  out["metrics"] = metrics;
  return out.dump(2) + "\n";
}

}  // namespace fluency
