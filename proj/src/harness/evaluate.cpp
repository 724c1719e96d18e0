#include <algorithm>
#include <cmath>
#include <set>

#include "fluency/error.hpp"
#include "fluency/harness.hpp"
#include "fluency/stats.hpp"

namespace fluency {
namespace {

struct Column {
  std::vector<std::size_t> members;  // record indices
};

struct Fitted {
  ReportCell pearson;
  ReportCell mse;
  std::vector<double> residuals;  // squared, for the MSE test
};

Fitted fit_column(const std::vector<double>& x, const std::vector<double>& y) {
  Fitted out;
  if (x.size() < 2) return out;
  const stats::PairedSamples samples(x, y);
  try {
    out.pearson.value = stats::pearson(samples);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateVariance) throw;
  }
  try {
    out.residuals = stats::squared_residuals(samples);
    out.mse.value = stats::mean(out.residuals);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateVariance) throw;
  }
  return out;
}

double pearson_p(double best, double other, std::size_t n) {
  if (std::abs(best) >= 1.0 || std::abs(other) >= 1.0) return best > other ? 0.0 : 0.5;
  return stats::fisher_z_test(best, other, n, n);
}

double mse_p(const std::vector<double>& best, const std::vector<double>& other) {
  try {
    return stats::two_sample_t_test(best, other);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateVariance) throw;
    return stats::mean(best) < stats::mean(other) ? 0.0 : 0.5;
  }
}

// Marks the best cell and attaches p-values of every other cell against it.
void mark_column(std::vector<Fitted*>& fits, std::size_t n) {
  auto mark = [&](auto cell_of, bool higher_is_better, auto p_value) {
    Fitted* best = nullptr;
    for (Fitted* f : fits) {
      const auto& v = cell_of(*f).value;
      if (!v) continue;
      if (!best || (higher_is_better ? *v > *cell_of(*best).value : *v < *cell_of(*best).value)) {
        best = f;
      }
    }
    if (!best) return;
    cell_of(*best).best = true;
    for (Fitted* f : fits) {
      if (f == best || !cell_of(*f).value) continue;
      const auto p = p_value(*best, *f);
      if (!p) continue;
      cell_of(*f).p_value = *p;
      cell_of(*f).significantly_worse = *p < kSignificanceLevel;
    }
  };
  mark([](Fitted& f) -> ReportCell& { return f.pearson; }, true,
       [&](Fitted& best, Fitted& other) -> std::optional<double> {
         if (n < 4) return std::nullopt;
         return pearson_p(*best.pearson.value, *other.pearson.value, n);
       });
  mark([](Fitted& f) -> ReportCell& { return f.mse; }, false,
       [&](Fitted& best, Fitted& other) -> std::optional<double> {
         if (n < 2) return std::nullopt;
         return mse_p(best.residuals, other.residuals);
       });
}

}  // namespace

std::string_view to_string(GroupBy group_by) {
  switch (group_by) {
    case GroupBy::kNone: return "none";
    case GroupBy::kSystem: return "system";
    case GroupBy::kDomain: return "domain";
  }
  return "?";
}

std::optional<GroupBy> parse_group_by(std::string_view text) {
  if (text == "none") return GroupBy::kNone;
  if (text == "system") return GroupBy::kSystem;
  if (text == "domain") return GroupBy::kDomain;
  return std::nullopt;
}

MetricReport evaluate(std::span<const ScoreTable> metrics, std::span<const DatasetRecord> records,
                      GroupBy group_by) {
  require(!metrics.empty(), ErrorCode::kInvalidArgument, "no metrics to evaluate");
  MetricReport report;
  report.group_by = group_by;
  report.total = records.size();
  report.rating_kappa = rating_agreement(records);

  std::vector<double> ratings;
  ratings.reserve(records.size());
  for (const auto& r : records) ratings.push_back(aggregate_ratings(r));

  // Column 0 is overall; the rest follow report.groups.
  std::vector<Column> columns(1);
  for (std::size_t i = 0; i < records.size(); ++i) columns[0].members.push_back(i);
  if (group_by != GroupBy::kNone) {
    std::set<std::string> labels;
    for (const auto& r : records) labels.insert(group_by == GroupBy::kSystem ? r.system : r.domain);
    report.groups.assign(labels.begin(), labels.end());
    for (const auto& label : report.groups) {
      Column column;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& key = group_by == GroupBy::kSystem ? records[i].system : records[i].domain;
        if (key == label) column.members.push_back(i);
      }
      report.group_sizes.push_back(column.members.size());
      columns.push_back(std::move(column));
    }
  }

  std::vector<std::vector<double>> scores(metrics.size());
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    for (const auto& r : records) {
      auto it = metrics[m].values.find(r.id);
      if (it == metrics[m].values.end()) {
        fail(ErrorCode::kMissingScore,
             "metric '" + metrics[m].metric + "' has no score for id '" + r.id + "'");
      }
      scores[m].push_back(it->second);
    }
  }

  std::vector<std::vector<Fitted>> fitted(metrics.size(), std::vector<Fitted>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> y;
    for (std::size_t i : columns[c].members) y.push_back(ratings[i]);
    std::vector<Fitted*> column_fits;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      std::vector<double> x;
      for (std::size_t i : columns[c].members) x.push_back(scores[m][i]);
      fitted[m][c] = fit_column(x, y);
      column_fits.push_back(&fitted[m][c]);
    }
    mark_column(column_fits, columns[c].members.size());
  }

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    MetricRow row;
    row.name = metrics[m].metric;
    row.refs = metrics[m].refs;
    row.overall_pearson = fitted[m][0].pearson;
    row.overall_mse = fitted[m][0].mse;
    for (std::size_t c = 1; c < columns.size(); ++c) {
      row.group_pearson.push_back(fitted[m][c].pearson);
      row.group_mse.push_back(fitted[m][c].mse);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

MetricReport evaluate(const std::map<std::string, double>& metric_scores,
                      std::span<const DatasetRecord> records, GroupBy group_by) {
  const ScoreTable table{"metric", "0", metric_scores};
  return evaluate(std::span<const ScoreTable>(&table, 1), records, group_by);
}

}  // namespace fluency
