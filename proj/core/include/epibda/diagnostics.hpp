#pragma once

#include <span>
#include <vector>

#include "epibda/history.hpp"
#include "epibda/model.hpp"

namespace epibda {

struct EssResult {
  double ess = 0.0;
  /// The trace never moves; `ess` is then the trace length.
  bool constant = false;
};

/// Effective sample size from Geyer's initial positive sequence estimator.
/// Throws std::invalid_argument for traces shorter than 10.
EssResult ess(std::span<const double> trace);

/// Empirical quantile that inverts the empirical CDF and averages the two
/// neighbouring order statistics where the CDF is flat (so the median of two
/// values is their midpoint). `values` need not be sorted.
double empirical_quantile(std::vector<double> values, double level);

struct LatentSummaryRow {
  double time;
  int state;
  std::vector<double> quantiles;
};

/// `counts[s][g][k]`: count of state k at grid time g in snapshot s.
std::vector<LatentSummaryRow> summarize_counts(const std::vector<std::vector<std::vector<int>>>& counts,
                                               std::span<const double> grid, std::span<const double> levels);

/// Pointwise quantiles of compartment counts (left limits) across snapshots.
std::vector<LatentSummaryRow> summarize_latent(std::span<const PopulationHistory> snapshots,
                                               std::span<const double> grid, std::span<const double> levels);

}  // namespace epibda
