#pragma once

#include <map>
#include <string>
#include <vector>

#include "epibda/diagnostics.hpp"
#include "epibda/engine.hpp"
#include "epibda/model.hpp"
#include "epibda/simulate.hpp"

namespace epibda {

/// Reads a `time,count` CSV. `population` is attached to the dataset.
Dataset read_dataset_csv(const std::string& path, int population);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// `iteration,logpost,beta,gamma,mu,rho,phi,p_S,p_E,p_I,p_R,accept_rate`;
/// parameters a model does not have are written as `nan`.
void write_chain_csv(const std::string& path, const ChainOutput& chain, const ModelSpec& model);

/// Column-oriented numeric CSV table.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

CsvTable read_csv_table(const std::string& path);

/// Latent snapshots as `iteration,time,<state labels>` rows on `grid`.
void write_snapshot_csv(const std::string& path, const ChainOutput& chain, const ModelSpec& model,
                        const std::vector<double>& grid);

/// `time,state,q025,q50,q975` (one column per requested level).
void write_latent_summary_csv(const std::string& path, const std::vector<LatentSummaryRow>& rows,
                              const ModelSpec& model, const std::vector<double>& levels);

/// Count trajectory: one row at the start and one after every event,
/// columns `time,<state labels>`.
void write_trajectory_csv(const std::string& path, const LumpedPath& path_data, const ModelSpec& model);

}  // namespace epibda
