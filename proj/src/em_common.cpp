#include "gmdoa/em_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "gmdoa/diagnostics.hpp"

namespace gmdoa {

Responsibilities::Responsibilities(Eigen::Index sensors, Eigen::Index snapshots, Eigen::Index components)
    : sensors_(sensors),
      snapshots_(snapshots),
      components_(components),
      weights_(static_cast<std::size_t>(sensors * snapshots * components), 0.0) {}

double Responsibilities::max_normalization_error() const {
  double worst = 0.0;
  for (Eigen::Index t = 0; t < snapshots_; ++t) {
    for (Eigen::Index n = 0; n < sensors_; ++n) {
      double sum = 0.0;
      for (Eigen::Index l = 0; l < components_; ++l) sum += (*this)(n, t, l);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return worst;
}

double Responsibilities::min_entry() const {
  if (weights_.empty()) return std::numeric_limits<double>::infinity();
  return *std::min_element(weights_.begin(), weights_.end());
}

Responsibilities responsibilities(const SnapshotMatrix& snapshots, const CMatrix& predicted,
                                  const NoiseModel& noise) {
  const Eigen::Index sensors = snapshots.num_sensors();
  const Eigen::Index count = snapshots.num_snapshots();
  if (predicted.rows() != sensors || predicted.cols() != count) {
    throw StructuralError(fmt::format("prediction is {}x{}, data is {}x{}", predicted.rows(),
                                      predicted.cols(), sensors, count));
  }
  const Eigen::Index components = noise.num_components();
  RVector log_prior(components);
  RVector inv_var(components);
  for (Eigen::Index l = 0; l < components; ++l) {
    inv_var[l] = 1.0 / (noise.stddevs[l] * noise.stddevs[l]);
    log_prior[l] = std::log(noise.mixing[l] * inv_var[l]);
  }

  constexpr double kTiny = std::numeric_limits<double>::min();
  Responsibilities resp(sensors, count, components);
  RVector terms(components);
  for (Eigen::Index t = 0; t < count; ++t) {
    for (Eigen::Index n = 0; n < sensors; ++n) {
      const double r = std::norm(snapshots.data(n, t) - predicted(n, t));
      terms = log_prior - r * inv_var;
      const double peak = terms.maxCoeff();
      terms = (terms.array() - peak).exp();
      const double total = terms.sum();
      for (Eigen::Index l = 0; l < components; ++l) {
        resp(n, t, l) = std::max(terms[l] / total, kTiny);
      }
    }
  }
  return resp;
}

RVector weight_diagonal(const Responsibilities& resp, const NoiseModel& noise, Eigen::Index t) {
  if (t < 0 || t >= resp.num_snapshots()) {
    throw StructuralError(fmt::format("snapshot index {} out of range [0, {})", t, resp.num_snapshots()));
  }
  RVector diag = RVector::Zero(resp.num_sensors());
  for (Eigen::Index n = 0; n < resp.num_sensors(); ++n) {
    for (Eigen::Index l = 0; l < resp.num_components(); ++l) {
      diag[n] += resp(n, t, l) / (noise.stddevs[l] * noise.stddevs[l]);
    }
  }
  return diag;
}

RMatrix weight_diagonals(const Responsibilities& resp, const NoiseModel& noise) {
  if (resp.num_components() != noise.num_components()) {
    throw StructuralError(fmt::format("{} responsibility components, {} noise components",
                                      resp.num_components(), noise.num_components()));
  }
  RMatrix out(resp.num_sensors(), resp.num_snapshots());
  for (Eigen::Index t = 0; t < resp.num_snapshots(); ++t) out.col(t) = weight_diagonal(resp, noise, t);
  return out;
}

CMatrix multi_source_signal_update(const SnapshotMatrix& snapshots, const CMatrix& manifold,
                                   const RMatrix& weights) {
  const Eigen::Index sensors = snapshots.num_sensors();
  const Eigen::Index sources = manifold.cols();
  if (manifold.rows() != sensors || weights.rows() != sensors ||
      weights.cols() != snapshots.num_snapshots()) {
    throw StructuralError("manifold, weights and snapshots disagree in shape");
  }
  if (sources >= sensors) {
    throw StructuralError(fmt::format("{} sources need more than {} sensors", sources, sensors));
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw DomainError("weights must be finite and nonnegative");
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> geometry(manifold.adjoint() * manifold, Eigen::EigenvaluesOnly);
  const double lo = geometry.eigenvalues().minCoeff();
  const double hi = geometry.eigenvalues().maxCoeff();
  const bool collapsed = !(lo > 0.0 && hi / lo <= kRidgeConditionLimit);

  CMatrix out(sources, snapshots.num_snapshots());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(sensors));
  CMatrix scaled(sensors, sources);
  CVector rhs(sensors);
  for (Eigen::Index t = 0; t < snapshots.num_snapshots(); ++t) {
    if (collapsed) {
      const CMatrix weighted_adj = manifold.adjoint() * weights.col(t).asDiagonal();
      CMatrix gram = weighted_adj * manifold;
      gram = 0.5 * (gram + gram.adjoint()).eval();
      gram.diagonal().array() += kRidgeEpsilon * gram.trace().real() / static_cast<double>(sources);
      Eigen::LLT<CMatrix> chol(gram);
      if (chol.info() != Eigen::Success) {
        throw DegenerateGeometryError(
            fmt::format("weighted Gram matrix singular at snapshot t={} even after ridge", t), t);
      }
      out.col(t) = chol.solve(weighted_adj * snapshots.data.col(t));
    } else {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index i, Eigen::Index j) { return weights(i, t) > weights(j, t); });
      for (Eigen::Index r = 0; r < sensors; ++r) {
        const Eigen::Index n = order[static_cast<std::size_t>(r)];
        const double root = std::sqrt(weights(n, t));
        scaled.row(r) = root * manifold.row(n);
        rhs[r] = root * snapshots.data(n, t);
      }
      const Eigen::ColPivHouseholderQR<CMatrix> qr(scaled);
      if (qr.rank() < sources) {
        throw DegenerateGeometryError(
            fmt::format("weighted manifold is rank deficient at snapshot t={}", t), t);
      }
      out.col(t) = qr.solve(rhs);
    }
    if (!out.col(t).allFinite()) {
      throw DegenerateGeometryError(fmt::format("non-finite signal estimate at snapshot t={}", t), t);
    }
  }
  return out;
}

Complex single_source_signal_update(const CVector& target, double theta, const RVector& weight) {
  if (target.size() != weight.size()) throw StructuralError("target and weight lengths differ");
  const CVector a = steering_vector(theta, target.size());
  return a.dot(weight.cwiseProduct(target)) / weight.sum();
}

CRowVector single_source_signal_row(const CMatrix& targets, double theta, const RMatrix& weights) {
  if (targets.rows() != weights.rows() || targets.cols() != weights.cols()) {
    throw StructuralError("targets and weights disagree in shape");
  }
  const CVector a = steering_vector(theta, targets.rows());
  const CMatrix weighted = weights.cast<Complex>().cwiseProduct(targets);
  CRowVector row = a.adjoint() * weighted;
  return row.cwiseQuotient(weights.colwise().sum().cast<Complex>());
}

namespace {

const RMatrix& checked_weights(const CMatrix& targets, const RMatrix& weights) {
  if (targets.rows() != weights.rows() || targets.cols() != weights.cols()) {
    throw StructuralError("targets and weights disagree in shape");
  }
  if (targets.cols() < 1) throw StructuralError("DOA objective needs at least one snapshot");
  return weights;
}

}  // namespace

DoaObjective::DoaObjective(const CMatrix& targets, const RMatrix& weights)
    : targets_(targets),
      weights_(weights),
      weighted_(checked_weights(targets, weights).cast<Complex>().cwiseProduct(targets)),
      inv_trace_(weights.colwise().sum().cwiseInverse().transpose()) {}

double DoaObjective::operator()(double u) const {
  // a(u)^H has entries exp(+j n pi u).
  const CVector phasor = steering_vector_u(-u, weighted_.rows());
  const CRowVector projected = phasor.transpose() * weighted_;
  return projected.cwiseAbs2().dot(inv_trace_.transpose());
}

double DoaObjective::residual_form(double u) const {
  const Eigen::Index sensors = targets_.rows();
  const CVector a = steering_vector_u(u, sensors);
  double total = 0.0;
  for (Eigen::Index t = 0; t < targets_.cols(); ++t) {
    const Complex s = a.dot(weighted_.col(t)) * inv_trace_[t];
    for (Eigen::Index n = 0; n < sensors; ++n) total += weights_(n, t) * std::norm(targets_(n, t) - a[n] * s);
  }
  return -total;
}

DoaObjective doa_objective(const CMatrix& targets, const RMatrix& weights) {
  return DoaObjective(targets, weights);
}

RMatrix squared_residuals(const SnapshotMatrix& snapshots, const CMatrix& predicted) {
  if (predicted.rows() != snapshots.num_sensors() || predicted.cols() != snapshots.num_snapshots()) {
    throw StructuralError("prediction and snapshots disagree in shape");
  }
  return (snapshots.data - predicted).cwiseAbs2();
}

NoiseModel noise_param_update(const Responsibilities& resp, const RMatrix& residuals) {
  if (residuals.rows() != resp.num_sensors() || residuals.cols() != resp.num_snapshots()) {
    throw StructuralError("residuals and responsibilities disagree in shape");
  }
  if ((residuals.array() < 0.0).any() || !residuals.allFinite()) {
    throw DomainError("squared residuals must be finite and nonnegative");
  }
  const Eigen::Index components = resp.num_components();
  RVector kappa = RVector::Zero(components);
  RVector eps = RVector::Zero(components);
  for (Eigen::Index t = 0; t < resp.num_snapshots(); ++t) {
    for (Eigen::Index n = 0; n < resp.num_sensors(); ++n) {
      for (Eigen::Index l = 0; l < components; ++l) {
        kappa[l] += resp(n, t, l);
        eps[l] += resp(n, t, l) * residuals(n, t);
      }
    }
  }

  const double count = static_cast<double>(resp.num_sensors() * resp.num_snapshots());
  NoiseModel out{kappa / count, RVector(components)};
  for (Eigen::Index l = 0; l < components; ++l) {
    const double sigma = std::sqrt(eps[l] / kappa[l]);
    if (!(sigma >= kSigmaFloor)) {
      warn(fmt::format("component {} standard deviation {} floored at {}", l, sigma, kSigmaFloor));
      out.stddevs[l] = kSigmaFloor;
    } else {
      out.stddevs[l] = sigma;
    }
  }
  return out;
}

}  // namespace gmdoa
