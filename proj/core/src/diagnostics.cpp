#include "epibda/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace epibda {

EssResult ess(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 10) throw std::invalid_argument("ess: trace needs at least 10 values");
  double mean = 0.0;
  for (double x : trace) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = trace[i] - mean;

  auto autocov = [&](std::size_t lag) {
    double sum = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) sum += centered[i] * centered[i + lag];
    return sum / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) return {static_cast<double>(n), true};

  // Sum consecutive autocovariance pairs while they stay positive, enforcing
  // a nonincreasing sequence.
  double pair_sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = (m == 0 ? gamma0 : autocov(2 * m)) + autocov(2 * m + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    pair_sum += pair;
  }
  const double tau = -1.0 + 2.0 * pair_sum / gamma0;
  return {static_cast<double>(n) / std::max(tau, 1e-12), false};
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("empirical_quantile: level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double position = n * level;
  const double rounded = std::round(position);
  if (std::abs(position - rounded) < 1e-9 * std::max(1.0, n)) {
    const auto k = static_cast<std::size_t>(rounded);
    if (k == 0) return values.front();
    if (k >= values.size()) return values.back();
    return 0.5 * (values[k - 1] + values[k]);
  }
  const auto k = static_cast<std::size_t>(std::ceil(position));
  return values[std::clamp<std::size_t>(k, 1, values.size()) - 1];
}

std::vector<LatentSummaryRow> summarize_counts(const std::vector<std::vector<std::vector<int>>>& counts,
                                               std::span<const double> grid, std::span<const double> levels) {
  if (counts.empty()) throw std::invalid_argument("summarize_latent: no snapshots");
  const std::size_t states = counts.front().empty() ? 0 : counts.front().front().size();
  std::vector<LatentSummaryRow> rows;
  std::vector<double> column(counts.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t k = 0; k < states; ++k) {
      for (std::size_t s = 0; s < counts.size(); ++s) column[s] = counts[s].at(g).at(k);
      LatentSummaryRow row{grid[g], static_cast<int>(k), {}};
      for (double level : levels) row.quantiles.push_back(empirical_quantile(column, level));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<LatentSummaryRow> summarize_latent(std::span<const PopulationHistory> snapshots,
                                               std::span<const double> grid, std::span<const double> levels) {
  std::vector<std::vector<std::vector<int>>> counts;
  counts.reserve(snapshots.size());
  for (const auto& h : snapshots) counts.push_back(compartment_counts_at(h, grid));
  return summarize_counts(counts, grid, levels);
}

}  // namespace epibda
