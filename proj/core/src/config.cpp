#include "epibda/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace epibda {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + text + "' is not a number");
  }
  if (trim(text.substr(used)).size() != 0) {
    throw std::invalid_argument("config key '" + key + "': trailing characters in '" + text + "'");
  }
  return value;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(number) + ": empty key");
    out.values_[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Config out = parse(buffer.str());
  out.base_dir_ = std::filesystem::path(path).parent_path().string();
  return out;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key) const {
  const double value = get_double(key);
  if (value != std::floor(value)) throw std::invalid_argument("config key '" + key + "' must be an integer");
  return static_cast<long>(value);
}

long Config::get_long(const std::string& key, long fallback) const { return has(key) ? get_long(key) : fallback; }

std::vector<double> Config::get_list(const std::string& key) const {
  std::string text = get_string(key);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double(key, token));
  return out;
}

ModelSpec RunConfig::model_spec() const {
  switch (model) {
    case ModelKind::SIR: return ModelSpec::sir();
    case ModelKind::SEIR: return ModelSpec::seir();
    case ModelKind::SIRS: return ModelSpec::sirs();
  }
  return ModelSpec::sir();
}

int RunConfig::resolved_subjects_per_iter(int n) const {
  if (subjects_per_iter > 0) return std::min(subjects_per_iter, n);
  return std::max(1, n / 10);
}

void RunConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("iterations must be nonnegative");
  if (burn_in < 0 || (iterations > 0 && burn_in >= iterations)) {
    throw std::invalid_argument("burn_in must satisfy 0 <= burn_in < iterations");
  }
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (subjects_per_iter < 0) throw std::invalid_argument("subjects_per_iter must be positive");
  if (population > 0 && subjects_per_iter > population) {
    throw std::invalid_argument("subjects_per_iter cannot exceed the population size");
  }
  if (chains < 1) throw std::invalid_argument("chains must be at least 1");
  priors.validate(model_spec(), emission);
  if (initial) epibda::validate(*initial, model_spec(), emission);
}

namespace {

Parameters read_parameters(const Config& config, const std::string& prefix, const ModelSpec& model,
                           EmissionKind emission, const std::vector<double>& default_p0) {
  Parameters theta;
  theta.beta = config.get_double(prefix + "beta");
  theta.mu = config.get_double(prefix + "mu");
  if (model.uses(RateParam::Gamma)) theta.gamma = config.get_double(prefix + "gamma");
  theta.rho = config.get_double(prefix + "rho");
  if (emission == EmissionKind::NegativeBinomial) theta.phi = config.get_double(prefix + "phi");
  theta.p_init = config.has(prefix + "p0") ? config.get_list(prefix + "p0") : default_p0;
  double total = 0.0;
  for (double p : theta.p_init) total += p;
  if (total > 0.0) {
    for (auto& p : theta.p_init) p /= total;
  }
  return theta;
}

GammaPrior read_gamma(const Config& config, const std::string& name, GammaPrior fallback) {
  return {config.get_double("prior." + name + ".shape", fallback.shape),
          config.get_double("prior." + name + ".rate", fallback.rate)};
}

}  // namespace

RunConfig parse_run_config(const Config& config) {
  RunConfig run;
  const ModelSpec model = ModelSpec::from_name(config.get_string("model", "SIR"));
  run.model = model.kind();
  run.emission = emission_from_name(config.get_string("emission", "binomial"));
  const std::string method = config.get_string("method", "bda");
  if (method == "bda") {
    run.method = Method::Bda;
  } else if (method == "pmmh") {
    run.method = Method::Pmmh;
  } else {
    throw std::invalid_argument("method must be 'bda' or 'pmmh'");
  }

  if (config.has("data")) {
    std::filesystem::path data = config.get_string("data");
    if (data.is_relative() && !config.base_dir().empty()) data = std::filesystem::path(config.base_dir()) / data;
    run.data_path = data.string();
  }
  run.population = static_cast<int>(config.get_long("population", 0));
  run.iterations = config.get_long("iterations", run.iterations);
  run.burn_in = config.get_long("burn_in", run.burn_in);
  run.thin = config.get_long("thin", run.thin);
  run.subjects_per_iter = static_cast<int>(config.get_long("subjects_per_iter", 0));
  if (config.has("bridge_sampler")) run.bridge_sampler = bridge_sampler_from_name(config.get_string("bridge_sampler"));
  run.seed = static_cast<std::uint64_t>(config.get_long("seed", 1));
  run.chains = static_cast<int>(config.get_long("chains", 1));
  run.init_attempts = config.get_long("init_attempts", run.init_attempts);
  run.rho_phi_pilot = config.get_long("rwmh.pilot", run.rho_phi_pilot);

  run.priors.beta = read_gamma(config, "beta", run.priors.beta);
  run.priors.mu = read_gamma(config, "mu", run.priors.mu);
  run.priors.gamma = read_gamma(config, "gamma", run.priors.gamma);
  run.priors.phi = read_gamma(config, "phi", run.priors.phi);
  run.priors.rho = {config.get_double("prior.rho.a", 1.0), config.get_double("prior.rho.b", 1.0)};
  run.priors.p_init_alpha = config.has("prior.p0.alpha") ? config.get_list("prior.p0.alpha")
                                                         : std::vector<double>(model.num_states(), 1.0);

  std::vector<double> prior_mean = run.priors.p_init_alpha;
  if (config.has("init.beta")) run.initial = read_parameters(config, "init.", model, run.emission, prior_mean);

  run.pmmh.filter.particles = static_cast<int>(config.get_long("pmmh.particles", run.pmmh.filter.particles));
  run.pmmh.filter.step = config.get_double("pmmh.step", run.pmmh.filter.step);
  run.pmmh.filter.simulator = path_simulator_from_name(config.get_string("pmmh.path_sim", "exact"));
  run.pmmh.pilot = config.get_long("pmmh.pilot", run.pmmh.pilot);
  run.pmmh.initial_scale = config.get_double("pmmh.scale", run.pmmh.initial_scale);
  run.pmmh.iterations = run.iterations;

  if (config.has("sim.beta")) {
    run.sim.truth = read_parameters(config, "sim.", model, run.emission, prior_mean);
    run.sim.start = config.get_double("sim.start", 0.0);
    run.sim.end = config.get_double("sim.end");
    run.sim.obs_interval = config.get_double("sim.obs_interval", 1.0);
    if (config.has("sim.initial_counts")) {
      for (double c : config.get_list("sim.initial_counts")) run.sim.initial_counts.push_back(static_cast<int>(c));
    }
    if (config.has("sim.epochs")) {
      run.sim.epoch_boundaries = config.get_list("sim.epochs");
      const std::size_t epochs = run.sim.epoch_boundaries.size() - 1;
      const auto betas = config.get_list("sim.epoch.beta");
      const auto mus = config.get_list("sim.epoch.mu");
      const auto gammas = model.uses(RateParam::Gamma) ? config.get_list("sim.epoch.gamma") : std::vector<double>{};
      if (betas.size() != epochs || mus.size() != epochs ||
          (model.uses(RateParam::Gamma) && gammas.size() != epochs)) {
        throw std::invalid_argument("sim.epoch.* lists need one value per epoch");
      }
      for (std::size_t k = 0; k < epochs; ++k) {
        Parameters p = run.sim.truth;
        p.beta = betas[k];
        p.mu = mus[k];
        if (model.uses(RateParam::Gamma)) p.gamma = gammas[k];
        run.sim.epoch_parameters.push_back(p);
      }
    }
  }
  run.validate();
  return run;
}

}  // namespace epibda
