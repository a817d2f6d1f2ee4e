#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "buchi_dp/error.hpp"
#include "buchi_dp/graph.hpp"
#include "buchi_dp/surrogate_dp.hpp"

namespace buchi_dp {

// Slack allowed between the empirical ‖H^N‖∞ and the theoretical c.
inline constexpr double kCertificateSlack = 1e-12;

/// Multi-step contraction data for the γ = 1 regime: ‖H^N‖∞ ≤ c with
/// N = n'+1 and c = 1 − (1 − γ_B)ε^{n'}. For γ < 1 the certificate is the
/// one-step case c = γ, N = 1.
struct ContractionCertificate {
  double epsilon = 1.0;
  std::size_t n_prime = 0;
  std::size_t step_n = 1;
  double c_theoretical = 1.0;
  std::vector<double> empirical_norms;  // empirical_norms[k-1] = ‖H^k‖∞, k = 1..step_n
  std::optional<std::size_t> first_contractive_step;

  double norm_at_step_n() const { return empirical_norms.back(); }
};

inline double inf_norm(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// ‖H^k‖∞ by repeated multiplication.
inline double matrix_power_inf_norm(const Eigen::MatrixXd& h, std::size_t k) {
  if (h.rows() != h.cols()) throw DimensionMismatch("matrix is not square");
  if (k == 0) throw InvalidParameter("power must be at least 1");
  Eigen::MatrixXd p = h;
  for (std::size_t i = 1; i < k; ++i) p = p * h;
  return inf_norm(p);
}

namespace detail {

// ‖H^k‖∞ for k = 1..count. Dense products for small systems; above
// kDenseLimit the entries are nonnegative, so the norm is the largest
// entry of H^k·1.
inline std::vector<double> power_norms(const ReducedSystem& sys, std::size_t count) {
  std::vector<double> norms;
  norms.reserve(count);
  if (sys.size() <= kDenseLimit) {
    const Eigen::MatrixXd h = sys.dense_h();
    Eigen::MatrixXd p = h;
    for (std::size_t k = 1; k <= count; ++k) {
      if (k > 1) p = p * h;
      norms.push_back(inf_norm(p));
    }
  } else {
    ValueVector ones = ValueVector::Ones(static_cast<Eigen::Index>(sys.size()));
    for (std::size_t k = 1; k <= count; ++k) {
      ones = sys.h * ones;
      norms.push_back(ones.maxCoeff());
    }
  }
  return norms;
}

}  // namespace detail

inline ContractionCertificate certify(const ReducedSystem& sys, const SurrogateParams& params,
                                      const ContractionParams& cp) {
  params.validate();
  ContractionCertificate cert;
  cert.epsilon = cp.epsilon;
  cert.n_prime = cp.n_prime;
  if (!params.undiscounted()) {
    cert.step_n = 1;
    cert.c_theoretical = params.gamma;
  } else {
    cert.step_n = cp.n_prime + 1;
    cert.c_theoretical =
        1.0 - params.reward() * std::pow(cp.epsilon, static_cast<double>(cp.n_prime));
  }
  cert.empirical_norms = detail::power_norms(sys, cert.step_n);
  for (std::size_t k = 0; k < cert.empirical_norms.size(); ++k)
    if (cert.empirical_norms[k] < 1.0) {
      cert.first_contractive_step = k + 1;
      break;
    }
  if (cert.norm_at_step_n() > cert.c_theoretical + kCertificateSlack)
    throw CertificateViolation("||H^" + std::to_string(cert.step_n) + "|| = " +
                               std::to_string(cert.norm_at_step_n()) + " exceeds c = " +
                               std::to_string(cert.c_theoretical));
  return cert;
}

/// b[k] = c^{⌊k/N⌋}·v_norm for k = 0..k_max.
inline std::vector<double> bound_sequence(const ContractionCertificate& cert, std::size_t k_max,
                                          double v_norm = 1.0) {
  std::vector<double> out;
  out.reserve(k_max + 1);
  double factor = 1.0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k > 0 && k % cert.step_n == 0) factor *= cert.c_theoretical;
    out.push_back(factor * v_norm);
  }
  return out;
}

/// {H^steps}_{from,to} as a sum over every length-`steps` path inside the
/// reduced state set, each edge weighted by the departing state's discount
/// (γ_B out of B, γ otherwise). Exponential in `steps`; meant for checking
/// matrix powers on small systems.
inline double discounted_path_probability(const ReducedSystem& sys, std::size_t from,
                                          std::size_t to, std::size_t steps) {
  if (from >= sys.size() || to >= sys.size())
    throw DimensionMismatch("state outside the reduced system");
  if (steps == 0) throw InvalidParameter("steps must be at least 1");
  const Eigen::MatrixXd t = sys.dense_t();
  const auto n = static_cast<std::size_t>(t.rows());

  // Explicit depth-first enumeration; no partial sums are shared.
  double total = 0.0;
  std::vector<std::size_t> path{from};
  auto walk = [&](auto&& self, double weight) -> void {
    const auto at = path.back();
    if (path.size() == steps + 1) {
      if (at == to) total += weight;
      return;
    }
    for (std::size_t next = 0; next < n; ++next) {
      const double p = t(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(next));
      if (p == 0.0) continue;
      path.push_back(next);
      self(self, weight * sys.discount_of_row(at) * p);
      path.pop_back();
    }
  };
  walk(walk, 1.0);
  return total;
}

}  // namespace buchi_dp
