#include "gmdoa/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace gmdoa {
namespace {

void check_doa(double theta) {
  if (!(theta > 0.0 && theta < kPi)) {
    throw DomainError(fmt::format("DOA {} rad is outside (0, pi)", theta));
  }
}

// Top 53 bits -> [0, 1).
double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

void NoiseModel::validate() const {
  if (mixing.size() == 0 || mixing.size() != stddevs.size()) {
    throw StructuralError(fmt::format("noise model needs matching non-empty mixing/stddev vectors "
                                      "(got {} and {})",
                                      mixing.size(), stddevs.size()));
  }
  for (Eigen::Index l = 0; l < mixing.size(); ++l) {
    if (!(mixing[l] > 0.0) || !std::isfinite(mixing[l])) {
      throw DomainError(fmt::format("mixing proportion {} must be positive (got {})", l, mixing[l]));
    }
    if (!(stddevs[l] > 0.0) || !std::isfinite(stddevs[l])) {
      throw DomainError(fmt::format("standard deviation {} must be positive (got {})", l, stddevs[l]));
    }
  }
  if (std::abs(mixing.sum() - 1.0) > 1e-12) {
    throw DomainError(fmt::format("mixing proportions sum to {}, expected 1", mixing.sum()));
  }
}

double NoiseModel::mean_power() const { return mixing.dot(stddevs.cwiseAbs2()); }

void ParameterEstimate::validate() const {
  if (doas.size() < 1) throw StructuralError("estimate needs at least one source");
  if (waveforms.rows() != doas.size() || waveforms.cols() < 1) {
    throw StructuralError(fmt::format("waveforms are {}x{}, expected {}xT with T >= 1",
                                      waveforms.rows(), waveforms.cols(), doas.size()));
  }
  for (Eigen::Index m = 0; m < doas.size(); ++m) check_doa(doas[m]);
  noise.validate();
}

CVector steering_vector_u(double u, Eigen::Index num_sensors) {
  CVector a(num_sensors);
  for (Eigen::Index n = 0; n < num_sensors; ++n) {
    a[n] = std::polar(1.0, -static_cast<double>(n) * kPi * u);
  }
  return a;
}

CVector steering_vector(double theta, Eigen::Index num_sensors) {
  check_doa(theta);
  if (num_sensors < 1) throw StructuralError("steering vector needs at least one sensor");
  return steering_vector_u(std::cos(theta), num_sensors);
}

CMatrix manifold_matrix(const RVector& doas, Eigen::Index num_sensors) {
  CMatrix a(num_sensors, doas.size());
  for (Eigen::Index m = 0; m < doas.size(); ++m) a.col(m) = steering_vector(doas[m], num_sensors);
  return a;
}

CMatrix predicted_output(const RVector& doas, const CMatrix& waveforms, Eigen::Index num_sensors) {
  if (waveforms.rows() != doas.size()) {
    throw StructuralError(fmt::format("{} DOAs but {} waveform rows", doas.size(), waveforms.rows()));
  }
  return manifold_matrix(doas, num_sensors) * waveforms;
}

CMatrix sample_gmm_noise(const NoiseModel& noise, Eigen::Index rows, Eigen::Index cols,
                         std::uint64_t seed) {
  noise.validate();
  std::mt19937_64 engine(seed);
  const Eigen::Index num_components = noise.num_components();
  RVector cumulative(num_components);
  std::partial_sum(noise.mixing.begin(), noise.mixing.end(), cumulative.begin());

  CMatrix out(rows, cols);
  for (Eigen::Index t = 0; t < cols; ++t) {
    for (Eigen::Index n = 0; n < rows; ++n) {
      const double pick = to_unit(engine());
      Eigen::Index l = 0;
      while (l + 1 < num_components && pick >= cumulative[l]) ++l;

      // 1 - U lies in (0, 1], keeping the log finite.
      const double u1 = 1.0 - to_unit(engine());
      const double u2 = to_unit(engine());
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double scale = noise.stddevs[l] / std::sqrt(2.0);
      out(n, t) = Complex(scale * radius * std::cos(2.0 * kPi * u2),
                          scale * radius * std::sin(2.0 * kPi * u2));
    }
  }
  return out;
}

SnapshotMatrix synthesize_snapshots(const ArrayGeometry& geometry, const SourceConfig& sources,
                                    const NoiseModel& noise, std::uint64_t seed) {
  const Eigen::Index n = geometry.num_sensors;
  if (n < 2) throw StructuralError("array needs at least two sensors");
  if (sources.num_sources() < 1) throw StructuralError("need at least one source");
  if (n <= sources.num_sources()) {
    throw StructuralError(fmt::format("{} sensors cannot resolve {} sources", n, sources.num_sources()));
  }
  if (sources.waveforms.rows() != sources.num_sources() || sources.num_snapshots() < 1) {
    throw StructuralError(fmt::format("waveforms are {}x{}, expected {}xT", sources.waveforms.rows(),
                                      sources.waveforms.cols(), sources.num_sources()));
  }
  CMatrix data = predicted_output(sources.doas, sources.waveforms, n);
  data += sample_gmm_noise(noise, n, sources.num_snapshots(), seed);
  return SnapshotMatrix{std::move(data)};
}

RVector signal_power(const CMatrix& waveforms) {
  if (waveforms.cols() < 1) throw StructuralError("signal power needs at least one snapshot");
  return waveforms.cwiseAbs2().rowwise().mean();
}

double log_mixture_density(double r, const NoiseModel& noise) {
  const Eigen::Index num_components = noise.num_components();
  double peak = -std::numeric_limits<double>::infinity();
  RVector terms(num_components);
  for (Eigen::Index l = 0; l < num_components; ++l) {
    const double var = noise.stddevs[l] * noise.stddevs[l];
    terms[l] = std::log(noise.mixing[l] / (kPi * var)) - r / var;
    peak = std::max(peak, terms[l]);
  }
  double acc = 0.0;
  for (Eigen::Index l = 0; l < num_components; ++l) acc += std::exp(terms[l] - peak);
  return peak + std::log(acc);
}

double log_likelihood(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate) {
  const Eigen::Index n_sensors = snapshots.num_sensors();
  if (estimate.num_snapshots() != snapshots.num_snapshots()) {
    throw StructuralError(fmt::format("estimate has {} snapshots, data has {}",
                                      estimate.num_snapshots(), snapshots.num_snapshots()));
  }
  const CMatrix model = predicted_output(estimate.doas, estimate.waveforms, n_sensors);
  double total = 0.0;
  for (Eigen::Index t = 0; t < snapshots.num_snapshots(); ++t) {
    for (Eigen::Index n = 0; n < n_sensors; ++n) {
      const double r = std::norm(snapshots.data(n, t) - model(n, t));
      const double term = log_mixture_density(r, estimate.noise);
      if (!std::isfinite(term)) {
        throw NumericError(fmt::format("non-finite log-likelihood term at (n={}, t={})", n, t));
      }
      total += term;
    }
  }
  return total;
}

}  // namespace gmdoa
