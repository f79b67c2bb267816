#pragma once

// Heuristic finite-section diagnostics: distance of coordinate vectors to
// polynomials in truncated l^2(T, b), and the power-decay infimum.
// Finite sections cannot decide density; these report trends only.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rklab/space.hpp"

namespace rklab {

struct DensityTable {
  std::vector<long> labels;                      // tested coordinate vectors e_m
  std::vector<std::vector<double>> distance;     // [degree][label], relative to ||e_m||
  std::vector<bool> monotone;                    // per label, nonincreasing in degree
  double orthogonality_loss = 0;                 // max |Q^T Q - I|
  double normal_condition = 0;                   // cond of the scaled Vandermonde Gram
  bool normal_equations_ill_conditioned = false; // > 1e14: orthogonalization was required
};

/// Krylov basis of diag(t / max|t|) started at b^{1/2}, reorthogonalized
/// twice in long double; the relative distance of e_m to span{1, ..., t^d} is
/// sqrt(1 - sum_{j <= d} Q_{mj}^2).
template <class Real>
DensityTable poly_density_diagnostic(const NodeWeightSystem<Real>& system, int max_degree, std::size_t horizon,
                                     std::vector<long> labels = {0, 1}) {
  using W = long double;
  using Mat = Eigen::Matrix<W, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<W, Eigen::Dynamic, 1>;
  if (max_degree < 0) fail(ErrorCode::DomainError, "max_degree must be >= 0");
  if (!system.real_nodes) fail(ErrorCode::DomainError, "density diagnostic needs real nodes");
  const Eigen::Index K = static_cast<Eigen::Index>(std::min(horizon, system.size()));
  const Eigen::Index D = max_degree;
  if (K <= D) fail(ErrorCode::DomainError, "horizon must exceed the degree");

  Vec t(K), root_b(K);
  W scale = 0;
  for (Eigen::Index k = 0; k < K; ++k) {
    t(k) = static_cast<W>(system.nodes[std::size_t(k)].real());
    root_b(k) = std::sqrt(static_cast<W>(system.weights[std::size_t(k)]));
    scale = std::max(scale, std::abs(t(k)));
  }
  if (scale > 0) t /= scale;

  Mat Q(K, D + 1);
  Vec v = root_b;
  for (Eigen::Index j = 0; j <= D; ++j) {
    if (j > 0) v = t.cwiseProduct(Q.col(j - 1));
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    const W n = v.norm();
    if (!(n > 0)) fail(ErrorCode::IllConditioned, "Krylov basis broke down at degree " + std::to_string(j));
    Q.col(j) = v / n;
  }
  DensityTable out;
  out.orthogonality_loss =
      static_cast<double>((Q.transpose() * Q - Mat::Identity(D + 1, D + 1)).cwiseAbs().maxCoeff());
  if (out.orthogonality_loss > 1e-8)
    fail(ErrorCode::IllConditioned, "orthogonality loss " + std::to_string(out.orthogonality_loss));

  Mat V(K, D + 1);
  V.col(0) = root_b / root_b.norm();
  for (Eigen::Index j = 1; j <= D; ++j) {
    V.col(j) = V.col(j - 1).cwiseProduct(t);
    const W n = V.col(j).norm();
    if (n > 0) V.col(j) /= n;
  }
  Eigen::JacobiSVD<Mat> svd(V);
  const auto& s = svd.singularValues();
  const W smin = s(s.size() - 1);
  out.normal_condition = smin > 0 ? static_cast<double>((s(0) / smin) * (s(0) / smin)) : infinity<double>();
  out.normal_equations_ill_conditioned = !(out.normal_condition <= 1e14);

  for (long m : labels) {
    if (system.position_of(m) >= std::size_t(K)) fail(ErrorCode::DomainError, "label outside the horizon");
  }
  out.labels = labels;
  out.distance.assign(std::size_t(D + 1), std::vector<double>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Eigen::Index p = static_cast<Eigen::Index>(system.position_of(labels[i]));
    W captured = 0;
    for (Eigen::Index j = 0; j <= D; ++j) {
      captured += Q(p, j) * Q(p, j);
      out.distance[std::size_t(j)][i] = static_cast<double>(std::sqrt(std::max(W(0), 1 - captured)));
    }
    bool mono = true;
    for (Eigen::Index j = 1; j <= D; ++j)
      if (out.distance[std::size_t(j)][i] > out.distance[std::size_t(j - 1)][i] * (1 + 1e-12)) mono = false;
    out.monotone.push_back(mono);
  }
  return out;
}

struct PowerDecayReport {
  double log_infimum = 0;         // inf_m log(b_m (1 + |t_m|)^N)
  double infimum = 0;
  std::size_t argmin = 0;         // stored position of the infimum
  double final_quarter_log_min = 0;
  bool pass = false;
};

/// inf_m b_m (1 + |t_m|)^N over the stored horizon. Pass: the infimum is
/// positive and the final quarter lowers its logarithm by at most
/// `log_slack` (the running infimum has settled).
template <class Real>
PowerDecayReport power_decay_check(const NodeWeightSystem<Real>& system, double N, double log_slack = 1e-2) {
  if (!(N > 0)) fail(ErrorCode::DomainError, "N must be positive");
  const std::size_t K = system.size();
  if (K < 4) fail(ErrorCode::DomainError, "need at least four nodes");
  const std::size_t cut = K - K / 4;
  PowerDecayReport r;
  double head = infinity<double>(), tail = infinity<double>();
  for (std::size_t k = 0; k < K; ++k) {
    const double v = static_cast<double>(std::log(static_cast<long double>(system.weights[k]))) +
                     N * std::log1p(static_cast<double>(std::abs(system.nodes[k])));
    if (k < cut) {
      if (v < head) {
        head = v;
        r.argmin = k;
      }
    } else if (v < tail) {
      tail = v;
    }
  }
  r.final_quarter_log_min = tail;
  r.log_infimum = std::min(head, tail);
  if (tail < head) {
    for (std::size_t k = cut; k < K; ++k) {
      const double v = static_cast<double>(std::log(static_cast<long double>(system.weights[k]))) +
                       N * std::log1p(static_cast<double>(std::abs(system.nodes[k])));
      if (v == tail) {
        r.argmin = k;
        break;
      }
    }
  }
  r.infimum = std::exp(r.log_infimum);
  r.pass = std::isfinite(r.log_infimum) && tail >= head - log_slack;
  return r;
}

}  // namespace rklab
