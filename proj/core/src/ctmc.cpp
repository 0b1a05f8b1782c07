#include "epibda/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace epibda {

namespace {

// Eigenbases with a condition number above this are treated as defective.
// At 1e7 the reconstruction error of exp(t*Lambda) stays below ~1e-9.
constexpr double kMaxBasisCondition = 1e7;
// Relative size below which an eigenvalue gap or a back-substitution
// numerator counts as zero.
constexpr double kRelativeZero = 1e-13;

bool is_upper_triangular(const RateMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (m(i, j) != 0.0) return false;
    }
  }
  return true;
}

double basis_condition(const StateMatrix& basis) {
  Eigen::JacobiSVD<StateMatrix> svd(basis);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
}

// Eigenvectors of an upper-triangular generator by back-substitution. A
// repeated eigenvalue is accepted only when the coupling numerator vanishes,
// i.e. when the matrix is genuinely diagonalizable in that direction.
std::optional<EigenSystem> decompose_triangular(const RateMatrix& rates) {
  const Eigen::Index n = rates.rows();
  const double scale = std::max(rates.cwiseAbs().maxCoeff(), 1e-300);
  EigenSystem out;
  out.real = rates.diagonal();
  out.imag = StateVector::Zero(n);
  out.basis = StateMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lambda = rates(k, k);
    out.basis(k, k) = 1.0;
    for (Eigen::Index i = k - 1; i >= 0; --i) {
      double numerator = 0.0;
      for (Eigen::Index m = i + 1; m <= k; ++m) numerator += rates(i, m) * out.basis(m, k);
      const double gap = lambda - rates(i, i);
      if (std::abs(gap) <= kRelativeZero * scale) {
        if (std::abs(numerator) > kRelativeZero * scale * out.basis.col(k).cwiseAbs().maxCoeff()) {
          return std::nullopt;
        }
        out.basis(i, k) = 0.0;
      } else {
        out.basis(i, k) = numerator / gap;
      }
    }
  }
  if (basis_condition(out.basis) > kMaxBasisCondition) return std::nullopt;
  out.basis_inv = out.basis.triangularView<Eigen::Upper>().solve(StateMatrix::Identity(n, n));
  return out;
}

std::optional<EigenSystem> decompose_general(const RateMatrix& rates) {
  const Eigen::Index n = rates.rows();
  Eigen::EigenSolver<StateMatrix> solver(rates, true);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const auto values = solver.eigenvalues();
  const auto vectors = solver.eigenvectors();
  const double scale = std::max(rates.cwiseAbs().maxCoeff(), 1e-300);

  EigenSystem out;
  out.real = StateVector::Zero(n);
  out.imag = StateVector::Zero(n);
  out.basis = StateMatrix::Zero(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double im = values(k).imag();
    if (std::abs(im) <= 1e-12 * scale) {
      out.real(col) = values(k).real();
      out.basis.col(col) = vectors.col(k).real();
      ++col;
    } else if (im > 0.0) {
      // lambda = a + ib with eigenvector u + iv gives Lambda [u v] = [u v] [[a, b], [-b, a]]
      out.complex_pair = true;
      out.real(col) = values(k).real();
      out.real(col + 1) = values(k).real();
      out.imag(col) = im;
      out.imag(col + 1) = -im;
      out.basis.col(col) = vectors.col(k).real();
      out.basis.col(col + 1) = vectors.col(k).imag();
      col += 2;
    }
  }
  if (col != n) return std::nullopt;
  if (basis_condition(out.basis) > kMaxBasisCondition) return std::nullopt;
  out.basis_inv = out.basis.fullPivLu().inverse();
  return out;
}

void clamp_and_normalize(TransitionMatrix& p) {
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) < 0.0) p(i, j) = 0.0;
      total += p(i, j);
    }
    if (total > 0.0) p.row(i) /= total;
  }
}

}  // namespace

RateMatrix build_subject_rate_matrix(const ModelSpec& model, const Parameters& theta, int excluded_infected) {
  if (excluded_infected < 0) throw std::invalid_argument("excluded infective count must be nonnegative");
  const int n = model.num_states();
  RateMatrix out = RateMatrix::Zero(n, n);
  for (const auto& t : model.transitions()) {
    const double rate = theta.rate(t.param);
    out(t.from, t.to) = t.form == RateForm::InfectiveContact ? rate * excluded_infected : rate;
  }
  for (int s = 0; s < n; ++s) out(s, s) = -(out.row(s).sum() - out(s, s));
  return out;
}

StateMatrix EigenSystem::reconstruct() const {
  const Eigen::Index n = real.size();
  StateMatrix v = StateMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    v(k, k) = real(k);
    if (imag(k) > 0.0) {
      v(k, k + 1) = imag(k);
      v(k + 1, k) = -imag(k);
    }
  }
  return basis * v * basis_inv;
}

std::optional<EigenSystem> eigen_decompose(const RateMatrix& rates) {
  if (rates.rows() != rates.cols() || rates.rows() == 0) throw std::invalid_argument("rate matrix must be square");
  return is_upper_triangular(rates) ? decompose_triangular(rates) : decompose_general(rates);
}

TransitionMatrix transition_matrix(const EigenSystem& eig, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("transition_matrix: dt must be nonnegative");
  const Eigen::Index n = eig.real.size();
  if (dt == 0.0) return TransitionMatrix::Identity(n, n);
  TransitionMatrix p;
  if (!eig.complex_pair) {
    StateVector decay(n);
    for (Eigen::Index k = 0; k < n; ++k) decay(k) = std::exp(dt * eig.real(k));
    p = (eig.basis * decay.asDiagonal()) * eig.basis_inv;
  } else {
    StateMatrix e = StateMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (eig.imag(k) > 0.0) {
        const double growth = std::exp(eig.real(k) * dt);
        const double c = std::cos(eig.imag(k) * dt);
        const double s = std::sin(eig.imag(k) * dt);
        e(k, k) = growth * c;
        e(k, k + 1) = growth * s;
        e(k + 1, k) = -growth * s;
        e(k + 1, k + 1) = growth * c;
        ++k;
      } else {
        e(k, k) = std::exp(dt * eig.real(k));
      }
    }
    p = eig.basis * e * eig.basis_inv;
  }
  clamp_and_normalize(p);
  return p;
}

StateMatrix series_expm(const RateMatrix& rates, double dt, int terms) {
  if (!(dt >= 0.0)) throw std::invalid_argument("series_expm: dt must be nonnegative");
  const Eigen::Index n = rates.rows();
  StateMatrix a = rates * dt;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);
  StateMatrix sum = StateMatrix::Identity(n, n);
  StateMatrix term = StateMatrix::Identity(n, n);
  for (int k = 1; k < terms; ++k) {
    term = (term * a) / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = (sum * sum).eval();
  return sum;
}

TransitionMatrix transition_matrix(const RateMatrix& rates, double dt) {
  if (auto eig = eigen_decompose(rates)) return transition_matrix(*eig, dt);
  TransitionMatrix p = series_expm(rates, dt);
  clamp_and_normalize(p);
  return p;
}

TransitionMatrix tpm_product(std::span<const TimeInterval> intervals, std::span<const RateMatrix> rates) {
  if (intervals.empty()) throw std::invalid_argument("tpm_product: empty partition");
  if (intervals.size() != rates.size()) throw std::invalid_argument("tpm_product: one rate matrix per interval");
  const Eigen::Index n = rates.front().rows();
  TransitionMatrix out = TransitionMatrix::Identity(n, n);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    if (!(iv.end >= iv.start)) throw std::invalid_argument("tpm_product: interval with end before start");
    if (i > 0) {
      const double prev_end = intervals[i - 1].end;
      const double tol = 1e-12 * std::max({1.0, std::abs(prev_end), std::abs(iv.start)});
      if (std::abs(iv.start - prev_end) > tol) {
        throw std::invalid_argument(iv.start > prev_end ? "tpm_product: gap in partition"
                                                        : "tpm_product: overlapping intervals");
      }
    }
    out = (out * transition_matrix(rates[i], iv.end - iv.start)).eval();
  }
  return out;
}

double homogeneous_path_loglik(int start_state, std::span<const Jump> jumps, double start, double end,
                               const RateMatrix& rates) {
  int state = start_state;
  double prev = start;
  double out = 0.0;
  for (const auto& j : jumps) {
    if (!(j.time > prev && j.time < end)) {
      throw std::invalid_argument("homogeneous_path_loglik: jump times must increase inside (start, end)");
    }
    out += rates(state, state) * (j.time - prev);
    const double rate = j.to == state ? 0.0 : rates(state, j.to);
    if (!(rate > 0.0)) return kNegInf;
    out += std::log(rate);
    state = j.to;
    prev = j.time;
  }
  out += rates(state, state) * (end - prev);
  return out;
}

DecompositionCache::DecompositionCache(const ModelSpec& model, const Parameters& theta)
    : model_(&model), theta_(theta) {}

void DecompositionCache::reset(const Parameters& theta) {
  theta_ = theta;
  for (auto& e : entries_) e.reset();
  size_ = 0;
}

const DecompositionCache::Entry& DecompositionCache::get(int excluded_infected) {
  if (excluded_infected < 0) throw std::invalid_argument("excluded infective count must be nonnegative");
  const auto key = static_cast<std::size_t>(excluded_infected);
  if (key >= entries_.size()) entries_.resize(key + 1);
  auto& slot = entries_[key];
  if (slot) {
    ++hits_;
    return *slot;
  }
  ++misses_;
  ++size_;
  RateMatrix rates = build_subject_rate_matrix(*model_, theta_, excluded_infected);
  auto eigen = eigen_decompose(rates);
  slot.emplace(Entry{std::move(rates), std::move(eigen)});
  return *slot;
}

TransitionMatrix DecompositionCache::transition(int excluded_infected, double dt) {
  const Entry& entry = get(excluded_infected);
  if (entry.eigen) return transition_matrix(*entry.eigen, dt);
  TransitionMatrix p = series_expm(entry.rates, dt);
  clamp_and_normalize(p);
  return p;
}

}  // namespace epibda
