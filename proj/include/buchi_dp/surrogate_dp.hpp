#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "buchi_dp/error.hpp"
#include "buchi_dp/graph.hpp"
#include "buchi_dp/model.hpp"

namespace buchi_dp {

using ValueVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Reduced systems up to this size are solved densely.
inline constexpr std::size_t kDenseLimit = 4096;

/// Discount pair of the surrogate reward: γ_B on accepting states, γ
/// elsewhere, with 0 < γ_B < γ ≤ 1. Accepting states pay 1 - γ_B.
struct SurrogateParams {
  double gamma_b = 0.99;
  double gamma = 1.0;

  void validate() const {
    if (!(gamma_b > 0.0 && gamma_b < gamma && gamma <= 1.0))
      throw InvalidParameter("discounts must satisfy 0 < gamma_b < gamma <= 1 (got gamma_b=" +
                             std::to_string(gamma_b) + ", gamma=" + std::to_string(gamma) + ")");
  }
  double reward() const noexcept { return 1.0 - gamma_b; }
  bool undiscounted() const noexcept { return gamma == 1.0; }
};

struct SurrogateReward {
  ValueVector reward;    // R(s), indexed by original state
  ValueVector discount;  // Γ(s), indexed by original state
};

inline SurrogateReward surrogate_reward(const StatePartition& partition,
                                        const SurrogateParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(partition.reduced_index.size());
  SurrogateReward out{ValueVector::Zero(n), ValueVector::Constant(n, params.gamma)};
  for (auto s : partition.b_states) {
    out.reward[static_cast<Eigen::Index>(s)] = params.reward();
    out.discount[static_cast<Eigen::Index>(s)] = params.gamma_b;
  }
  return out;
}

/// DP restricted to X = B ∪ ¬B_{T,A}. T holds the one-step probabilities
/// between states of X (rows leak whatever mass enters ¬B_R), and
/// H = diag(γ_B·1_m, γ·1_{n'})·T.
struct ReducedSystem {
  std::size_t m = 0;
  std::size_t n_prime = 0;
  std::size_t full_size = 0;
  std::vector<StateIndex> ordering;
  SparseMatrix t;
  SparseMatrix h;
  ValueVector reward;
  SurrogateParams params;

  std::size_t size() const noexcept { return m + n_prime; }
  Eigen::MatrixXd dense_t() const { return Eigen::MatrixXd(t); }
  Eigen::MatrixXd dense_h() const { return Eigen::MatrixXd(h); }
  double discount_of_row(std::size_t i) const { return i < m ? params.gamma_b : params.gamma; }
};

inline ReducedSystem build_reduced_system(const McModel& mc, const StatePartition& partition,
                                          const SurrogateParams& params) {
  params.validate();
  if (partition.reduced_size() == 0)
    throw EmptySystem("every state lies in a rejecting BSCC; the value function is identically 0");

  ReducedSystem sys;
  sys.m = partition.m();
  sys.n_prime = partition.n_prime();
  sys.full_size = mc.num_states();
  sys.ordering = partition.ordering;
  sys.params = params;

  const auto size = static_cast<Eigen::Index>(sys.size());
  std::vector<Eigen::Triplet<double>> t_entries, h_entries;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const double discount = sys.discount_of_row(i);
    for (const auto& tr : mc.rows[sys.ordering[i]]) {
      const auto j = partition.reduced_index[tr.target];
      if (j == StatePartition::kDropped || !(tr.probability > 0.0)) continue;
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      t_entries.emplace_back(r, c, tr.probability);
      h_entries.emplace_back(r, c, discount * tr.probability);
    }
  }
  sys.t.resize(size, size);
  sys.h.resize(size, size);
  sys.t.setFromTriplets(t_entries.begin(), t_entries.end());
  sys.h.setFromTriplets(h_entries.begin(), h_entries.end());
  sys.t.makeCompressed();
  sys.h.makeCompressed();

  sys.reward = ValueVector::Zero(size);
  sys.reward.head(static_cast<Eigen::Index>(sys.m)).setConstant(params.reward());
  return sys;
}

/// One DP step U ← r + H·U.
inline ValueVector bellman_update(const ValueVector& u, const ReducedSystem& sys) {
  if (static_cast<std::size_t>(u.size()) != sys.size())
    throw DimensionMismatch("value vector has " + std::to_string(u.size()) +
                            " entries, system has " + std::to_string(sys.size()));
  ValueVector next = sys.reward;
  next.noalias() += sys.h * u;
  return next;
}

/// Iterates U_(0) = 0, ..., U_(k_max). With a reference V, sup_errors[k]
/// holds ‖U_(k) − V‖∞.
struct DpTrace {
  std::vector<ValueVector> iterates;
  std::vector<double> sup_errors;
  std::size_t k_max = 0;

  // D_(k) = V − U_(k); nonnegative for U_(0) = 0.
  ValueVector error_vector(std::size_t k, const ValueVector& reference) const {
    return reference - iterates.at(k);
  }
};

inline DpTrace run_dp(const ReducedSystem& sys, std::size_t k_max,
                      const std::optional<ValueVector>& reference = std::nullopt) {
  if (reference && static_cast<std::size_t>(reference->size()) != sys.size())
    throw DimensionMismatch("reference has " + std::to_string(reference->size()) +
                            " entries, system has " + std::to_string(sys.size()));
  DpTrace trace;
  trace.k_max = k_max;
  trace.iterates.reserve(k_max + 1);
  trace.iterates.push_back(ValueVector::Zero(static_cast<Eigen::Index>(sys.size())));
  for (std::size_t k = 0; k < k_max; ++k)
    trace.iterates.push_back(bellman_update(trace.iterates.back(), sys));
  if (reference) {
    trace.sup_errors.reserve(trace.iterates.size());
    for (const auto& u : trace.iterates)
      trace.sup_errors.push_back((u - *reference).cwiseAbs().maxCoeff());
  }
  return trace;
}

/// Unique fixed point of U = r + H·U, from (I − H)·V = r. Dense LU with
/// partial pivoting up to kDenseLimit states, sparse LU above.
inline ValueVector solve_value(const ReducedSystem& sys) {
  if (sys.size() == 0) throw EmptySystem("reduced system has no states");
  const auto n = static_cast<Eigen::Index>(sys.size());
  ValueVector v;
  if (sys.size() <= kDenseLimit) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - sys.dense_h();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const auto& packed = lu.matrixLU();
    for (Eigen::Index i = 0; i < n; ++i)
      if (packed(i, i) == 0.0) throw SingularSystem("I - H is singular (zero pivot)");
    v = lu.solve(sys.reward);
    // I − H becomes ill-conditioned as γ_B → 1; refine with residuals
    // accumulated in extended precision.
    for (int pass = 0; pass < 3; ++pass) {
      ValueVector residual(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        long double acc = static_cast<long double>(sys.reward[i]) - static_cast<long double>(v[i]);
        for (SparseMatrix::InnerIterator it(sys.h, i); it; ++it)
          acc += static_cast<long double>(it.value()) * static_cast<long double>(v[it.col()]);
        residual[i] = static_cast<double>(acc);
      }
      v += lu.solve(residual);
    }
  } else {
    SparseMatrix id(n, n);
    id.setIdentity();
    Eigen::SparseMatrix<double> a = id - sys.h;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU of I - H failed: " + lu.lastErrorMessage());
    v = lu.solve(sys.reward);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(v[i]) || v[i] < -1e-9 || v[i] > 1.0 + 1e-9)
      throw SingularSystem("solution entry " + std::to_string(i) + " = " + std::to_string(v[i]) +
                           " is outside [0, 1]; I - H is numerically singular");
    v[i] = std::clamp(v[i], 0.0, 1.0);
  }
  return v;
}

// Scatters a reduced vector back to all states, with zeros on ¬B_R.
inline ValueVector expand_value(const ReducedSystem& sys, const ValueVector& reduced) {
  if (static_cast<std::size_t>(reduced.size()) != sys.size())
    throw DimensionMismatch("reduced vector size does not match the system");
  ValueVector full = ValueVector::Zero(static_cast<Eigen::Index>(sys.full_size));
  for (std::size_t i = 0; i < sys.size(); ++i)
    full[static_cast<Eigen::Index>(sys.ordering[i])] = reduced[static_cast<Eigen::Index>(i)];
  return full;
}

/// A priori iteration count guaranteeing ‖U_(k) − V‖∞ ≤ tol, using ‖V‖∞ ≤ 1:
/// ⌈log tol / log γ⌉ for γ < 1 and (n'+1)·⌈log tol / log c⌉ with
/// c = 1 − (1 − γ_B)ε^{n'} for γ = 1.
inline std::size_t iterations_for_tolerance(const SurrogateParams& params, const ContractionParams& cp,
                                            double tol) {
  params.validate();
  if (!(tol > 0.0)) throw InvalidParameter("tolerance must be positive");
  if (tol >= 1.0) return 0;
  double steps_per_contraction = 1.0;
  double log_c = std::log(params.gamma);
  if (params.undiscounted()) {
    steps_per_contraction = static_cast<double>(cp.n_prime + 1);
    log_c = std::log1p(-params.reward() * std::pow(cp.epsilon, static_cast<double>(cp.n_prime)));
  }
  if (!(log_c < 0.0))
    throw InvalidParameter("contraction factor is indistinguishable from 1; no finite iteration bound");
  const double k = steps_per_contraction * std::ceil(std::log(tol) / log_c);
  if (!(k < 9.0e15)) throw InvalidParameter("a priori iteration bound overflows");
  return static_cast<std::size_t>(k);
}

}  // namespace buchi_dp
