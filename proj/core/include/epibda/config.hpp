#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epibda/bridge.hpp"
#include "epibda/gibbs.hpp"
#include "epibda/model.hpp"
#include "epibda/pmmh.hpp"

namespace epibda {

/// Plain-text `key = value` file. `#` starts a comment; list values are
/// separated by commas or whitespace.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::vector<double> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Directory of the loaded file, used to resolve relative paths.
  const std::string& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::string base_dir_;
};

enum class Method { Bda, Pmmh };

/// Ground truth and observation design for `epibda simulate`.
struct SimulationConfig {
  Parameters truth;
  /// Epoch boundaries and per-epoch rates; empty means constant truth.
  std::vector<double> epoch_boundaries;
  std::vector<Parameters> epoch_parameters;
  /// Initial counts per state; empty means Multinomial(N, truth.p_init).
  std::vector<int> initial_counts;
  double start = 0.0;
  double end = 0.0;
  double obs_interval = 1.0;
};

struct RunConfig {
  ModelKind model = ModelKind::SIR;
  EmissionKind emission = EmissionKind::Binomial;
  Method method = Method::Bda;
  std::string data_path;
  int population = 0;
  PriorSpec priors;
  std::optional<Parameters> initial;
  long iterations = 1000;
  long burn_in = 0;
  long thin = 250;
  /// 0 means 10% of the population (at least one subject).
  int subjects_per_iter = 0;
  std::optional<BridgeSampler> bridge_sampler;
  std::uint64_t seed = 1;
  int chains = 1;
  long init_attempts = 100'000;
  long rho_phi_pilot = 10'000;
  PmmhConfig pmmh;
  SimulationConfig sim;

  ModelSpec model_spec() const;
  int resolved_subjects_per_iter(int n) const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

RunConfig parse_run_config(const Config& config);

}  // namespace epibda
