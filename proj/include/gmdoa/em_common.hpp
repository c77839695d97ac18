#pragma once

#include <functional>
#include <vector>

#include "gmdoa/array_model.hpp"

namespace gmdoa {

// Posterior probability that noise sample (n, t) came from mixture component
// l, for every (n, t, l). Components are 0-based here.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(Eigen::Index sensors, Eigen::Index snapshots, Eigen::Index components);

  double operator()(Eigen::Index n, Eigen::Index t, Eigen::Index l) const {
    return weights_[index(n, t, l)];
  }
  double& operator()(Eigen::Index n, Eigen::Index t, Eigen::Index l) { return weights_[index(n, t, l)]; }

  Eigen::Index num_sensors() const { return sensors_; }
  Eigen::Index num_snapshots() const { return snapshots_; }
  Eigen::Index num_components() const { return components_; }

  // Largest |sum_l w(n,t,l) - 1| over all (n, t).
  double max_normalization_error() const;
  // Smallest entry; strictly positive for a valid array.
  double min_entry() const;

 private:
  std::size_t index(Eigen::Index n, Eigen::Index t, Eigen::Index l) const {
    return static_cast<std::size_t>((t * sensors_ + n) * components_ + l);
  }

  Eigen::Index sensors_ = 0;
  Eigen::Index snapshots_ = 0;
  Eigen::Index components_ = 0;
  std::vector<double> weights_;
};

// E-step: responsibilities of each component given the model prediction.
//   w(n,t,l) ∝ lambda_l / sigma_l^2 * exp(-|y_n(t) - predicted(n,t)|^2 / sigma_l^2)
// Entries that would underflow are lifted to the smallest normal double.
Responsibilities responsibilities(const SnapshotMatrix& snapshots, const CMatrix& predicted,
                                  const NoiseModel& noise);

// Diagonal of sum_l w(., t, l) / sigma_l^2 for one snapshot.
RVector weight_diagonal(const Responsibilities& resp, const NoiseModel& noise, Eigen::Index t);

// All diagonals at once: column t is weight_diagonal(resp, noise, t).
RMatrix weight_diagonals(const Responsibilities& resp, const NoiseModel& noise);

// Per-snapshot weighted least squares
//   s(t) = argmin (y(t) - A s)^H D(t) (y(t) - A s).
// Solved by pivoted QR of D^{1/2} A with rows ordered by decreasing weight,
// which stays accurate when D spans many orders of magnitude. When the
// manifold itself is near-singular (eigenvalue ratio of A^H A above 1e12,
// e.g. two DOAs collapsing onto each other) the normal equations are solved
// instead with a ridge 1e-10 * tr(A^H D A) / M. Throws
// DegenerateGeometryError if the system is still rank deficient.
CMatrix multi_source_signal_update(const SnapshotMatrix& snapshots, const CMatrix& manifold,
                                   const RMatrix& weights);

// a(theta)^H W target / tr(W) for one snapshot.
Complex single_source_signal_update(const CVector& target, double theta, const RVector& weight);

// Same update for every snapshot at once, with targets as columns.
CRowVector single_source_signal_row(const CMatrix& targets, double theta, const RMatrix& weights);

// Concentrated DOA objective over u = cos(theta):
//   g(u) = sum_t |a(u)^H W(t) v(t)|^2 / tr(W(t)).
// Holds W(t) v(t) and 1 / tr(W(t)) precomputed.
class DoaObjective {
 public:
  DoaObjective(const CMatrix& targets, const RMatrix& weights);
  double operator()(double u) const;

  // The same objective up to the constant sum_t v^H W v, evaluated as
  //   -sum_t (v - a s)^H W (v - a s),  s = a^H W v / tr W.
  // With a component near the sigma floor both g and that constant reach
  // ~1e16 while their difference stays small, so searches compare this form.
  double residual_form(double u) const;

  Eigen::Index num_sensors() const { return weighted_.rows(); }

 private:
  CMatrix targets_;       // N x T
  RMatrix weights_;       // N x T
  CMatrix weighted_;      // N x T, column t is W(t) v(t)
  RVector inv_trace_;     // T
};

DoaObjective doa_objective(const CMatrix& targets, const RMatrix& weights);

// Residuals c_n(t) = |y_n(t) - predicted(n,t)|^2.
RMatrix squared_residuals(const SnapshotMatrix& snapshots, const CMatrix& predicted);

// Closed-form mixture update
//   lambda_l = kappa_l / (T N),  sigma_l = sqrt(eps_l / kappa_l)
// with kappa_l = sum w(.,.,l), eps_l = sum w(.,.,l) c. sigma is floored at
// kSigmaFloor, emitting a warning when the floor is hit.
NoiseModel noise_param_update(const Responsibilities& resp, const RMatrix& residuals);

inline constexpr double kSigmaFloor = 1e-8;
inline constexpr double kRidgeConditionLimit = 1e12;
inline constexpr double kRidgeEpsilon = 1e-10;

// Observer invoked with every responsibility array an algorithm computes.
using EStepObserver = std::function<void(const Responsibilities&)>;

}  // namespace gmdoa
