#include "epibda/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace epibda {

ModelSpec::ModelSpec(ModelKind kind, std::string name, std::vector<std::string> states,
                     std::vector<Transition> transitions, int infectious)
    : kind_(kind),
      name_(std::move(name)),
      states_(std::move(states)),
      transitions_(std::move(transitions)),
      infectious_(infectious) {
  for (auto& row : lookup_) row.fill(-1);
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    lookup_[transitions_[k].from][transitions_[k].to] = static_cast<int>(k);
  }
  // Acyclic iff repeatedly stripping states without incoming edges empties the graph.
  const int n = num_states();
  std::vector<int> indegree(n, 0);
  for (const auto& t : transitions_) ++indegree[t.to];
  std::vector<bool> removed(n, false);
  int removed_count = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (int s = 0; s < n; ++s) {
      if (removed[s] || indegree[s] != 0) continue;
      removed[s] = true;
      ++removed_count;
      progress = true;
      for (const auto& t : transitions_) {
        if (t.from == s) --indegree[t.to];
      }
    }
  }
  monotone_ = removed_count == n;
}

ModelSpec ModelSpec::sir() {
  return ModelSpec(ModelKind::SIR, "SIR", {"S", "I", "R"},
                   {{0, 1, RateParam::Beta, RateForm::InfectiveContact},
                    {1, 2, RateParam::Mu, RateForm::Constant}},
                   1);
}

ModelSpec ModelSpec::seir() {
  return ModelSpec(ModelKind::SEIR, "SEIR", {"S", "E", "I", "R"},
                   {{0, 1, RateParam::Beta, RateForm::InfectiveContact},
                    {1, 2, RateParam::Gamma, RateForm::Constant},
                    {2, 3, RateParam::Mu, RateForm::Constant}},
                   2);
}

ModelSpec ModelSpec::sirs() {
  return ModelSpec(ModelKind::SIRS, "SIRS", {"S", "I", "R"},
                   {{0, 1, RateParam::Beta, RateForm::InfectiveContact},
                    {1, 2, RateParam::Mu, RateForm::Constant},
                    {2, 0, RateParam::Gamma, RateForm::Constant}},
                   1);
}

ModelSpec ModelSpec::from_name(std::string_view name) {
  if (name == "SIR" || name == "sir") return sir();
  if (name == "SEIR" || name == "seir") return seir();
  if (name == "SIRS" || name == "sirs") return sirs();
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

bool ModelSpec::uses(RateParam p) const {
  for (const auto& t : transitions_) {
    if (t.param == p) return true;
  }
  return false;
}

int ModelSpec::state_index(std::string_view label) const {
  for (int s = 0; s < num_states(); ++s) {
    if (states_[s] == label) return s;
  }
  return -1;
}

EmissionKind emission_from_name(std::string_view name) {
  if (name == "binomial") return EmissionKind::Binomial;
  if (name == "negbin" || name == "negative-binomial" || name == "negative_binomial") {
    return EmissionKind::NegativeBinomial;
  }
  throw std::invalid_argument("unknown emission '" + std::string(name) + "'");
}

std::string_view emission_name(EmissionKind kind) {
  return kind == EmissionKind::Binomial ? "binomial" : "negative-binomial";
}

double Parameters::rate(RateParam p) const {
  switch (p) {
    case RateParam::Beta: return beta;
    case RateParam::Gamma: return gamma;
    case RateParam::Mu: return mu;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double& Parameters::rate(RateParam p) {
  switch (p) {
    case RateParam::Beta: return beta;
    case RateParam::Gamma: return gamma;
    case RateParam::Mu: break;
  }
  return mu;
}

void validate(const Parameters& theta, const ModelSpec& model, EmissionKind emission) {
  for (const auto& t : model.transitions()) {
    const double r = theta.rate(t.param);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("rate parameters must be positive and finite");
    }
  }
  if (!(theta.rho >= 0.0 && theta.rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (emission == EmissionKind::NegativeBinomial && !(theta.phi > 0.0 && std::isfinite(theta.phi))) {
    throw std::invalid_argument("phi must be positive under negative-binomial emission");
  }
  if (static_cast<int>(theta.p_init.size()) != model.num_states()) {
    throw std::invalid_argument("p_init must have one entry per model state");
  }
  double total = 0.0;
  for (double p : theta.p_init) {
    if (!(p >= 0.0)) throw std::invalid_argument("p_init entries must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("p_init must sum to one");
}

void validate(const Dataset& data) {
  if (data.times.size() != data.counts.size()) {
    throw std::invalid_argument("dataset times and counts differ in length");
  }
  if (data.times.empty()) throw std::invalid_argument("dataset has no observations");
  for (std::size_t i = 1; i < data.times.size(); ++i) {
    if (!(data.times[i] > data.times[i - 1])) {
      throw std::invalid_argument("observation times must be strictly increasing");
    }
  }
  for (int y : data.counts) {
    if (y < 0) throw std::invalid_argument("observed counts must be nonnegative");
  }
  if (data.population <= 0) throw std::invalid_argument("population size must be positive");
}

double emission_loglik(int y, int infected, const Parameters& theta, EmissionKind kind) {
  if (y < 0 || infected < 0) throw std::invalid_argument("emission_loglik: negative count");
  const double rho = theta.rho;
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("emission_loglik: rho outside [0, 1]");

  if (kind == EmissionKind::Binomial) {
    if (y > infected) return kNegInf;
    if (infected == 0) return 0.0;
    const double log_choose = std::lgamma(infected + 1.0) - std::lgamma(y + 1.0) -
                              std::lgamma(infected - y + 1.0);
    double out = log_choose;
    if (y > 0) out += (rho > 0.0) ? y * std::log(rho) : kNegInf;
    if (infected - y > 0) out += (rho < 1.0) ? (infected - y) * std::log1p(-rho) : kNegInf;
    return out;
  }

  const double phi = theta.phi;
  if (!(phi > 0.0)) throw std::invalid_argument("emission_loglik: phi must be positive");
  const double mean = rho * infected;
  if (mean <= 0.0) return y == 0 ? 0.0 : kNegInf;
  // NB(size = phi, prob = phi / (phi + mean))
  return std::lgamma(y + phi) - std::lgamma(phi) - std::lgamma(y + 1.0) +
         phi * std::log(phi / (phi + mean)) + y * std::log(mean / (phi + mean));
}

}  // namespace epibda
