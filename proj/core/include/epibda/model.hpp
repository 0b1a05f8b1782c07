#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace epibda {

inline constexpr int kMaxStates = 4;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class ModelKind { SIR, SEIR, SIRS };

/// Rate parameters that can drive a transition.
enum class RateParam : std::uint8_t { Beta, Gamma, Mu };

/// Per-subject rate form: `InfectiveContact` is beta times the current number
/// of infectives, `Constant` is the bare parameter.
enum class RateForm : std::uint8_t { InfectiveContact, Constant };

struct Transition {
  int from;
  int to;
  RateParam param;
  RateForm form;
};

/// Compartmental model definition. States are indexed 0..num_states()-1 in
/// the order listed by `states`.
class ModelSpec {
 public:
  static ModelSpec sir();
  static ModelSpec seir();
  static ModelSpec sirs();
  static ModelSpec from_name(std::string_view name);

  ModelKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  int infectious_state() const { return infectious_; }
  /// True iff the transition graph is acyclic (subjects never revisit a state).
  bool monotone() const { return monotone_; }
  bool uses(RateParam p) const;

  /// Index into transitions(), or -1 if `from -> to` is not allowed.
  int transition_index(int from, int to) const { return lookup_[from][to]; }
  int state_index(std::string_view label) const;

 private:
  ModelSpec(ModelKind kind, std::string name, std::vector<std::string> states,
            std::vector<Transition> transitions, int infectious);

  ModelKind kind_;
  std::string name_;
  std::vector<std::string> states_;
  std::vector<Transition> transitions_;
  int infectious_;
  bool monotone_;
  std::array<std::array<int, kMaxStates>, kMaxStates> lookup_{};
};

enum class EmissionKind { Binomial, NegativeBinomial };

EmissionKind emission_from_name(std::string_view name);
std::string_view emission_name(EmissionKind kind);

/// theta = (beta, gamma, mu, rho, phi, p_t1). gamma is unused by SIR and phi
/// by the binomial emission; unused entries are NaN.
struct Parameters {
  double beta = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> p_init;

  double rate(RateParam p) const;
  double& rate(RateParam p);
};

/// Throws std::invalid_argument when theta violates its invariants for this
/// model/emission pair.
void validate(const Parameters& theta, const ModelSpec& model, EmissionKind emission);

/// Prevalence counts Y_1..Y_L at strictly increasing times t_1..t_L.
struct Dataset {
  std::vector<double> times;
  std::vector<int> counts;
  int population = 0;

  std::size_t size() const { return times.size(); }
  double start() const { return times.front(); }
  double end() const { return times.back(); }
};

void validate(const Dataset& data);

/// log Pr(Y = y | I infectives). Binomial: Bin(I, rho). Negative binomial:
/// mean rho*I, variance m + m^2/phi; a zero mean is a point mass at zero.
double emission_loglik(int y, int infected, const Parameters& theta, EmissionKind kind);

}  // namespace epibda
