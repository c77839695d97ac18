#pragma once

#include <cstdint>

#include "gmdoa/types.hpp"

namespace gmdoa {

// Uniform linear array with half-wavelength spacing.
struct ArrayGeometry {
  Eigen::Index num_sensors = 0;
};

// True (or estimated) source directions and waveforms. Angles in radians.
struct SourceConfig {
  RVector doas;       // M entries in (0, pi), distinct
  CMatrix waveforms;  // M x T, row m is s_m

  Eigen::Index num_sources() const { return doas.size(); }
  Eigen::Index num_snapshots() const { return waveforms.cols(); }
};

// Circular complex Gaussian mixture: component l has weight mixing[l] and
// standard deviation stddevs[l] (total variance stddevs[l]^2).
struct NoiseModel {
  RVector mixing;
  RVector stddevs;

  Eigen::Index num_components() const { return mixing.size(); }
  // Throws StructuralError / DomainError when the invariants do not hold.
  void validate() const;
  // Sum of mixing[l] * stddevs[l]^2, the mean of |v|^2.
  double mean_power() const;
};

// N x T observation matrix; column t is one snapshot y(t).
struct SnapshotMatrix {
  CMatrix data;

  Eigen::Index num_sensors() const { return data.rows(); }
  Eigen::Index num_snapshots() const { return data.cols(); }
};

// Full parameter set (doas, waveforms, noise).
struct ParameterEstimate {
  RVector doas;
  CMatrix waveforms;
  NoiseModel noise;

  Eigen::Index num_sources() const { return doas.size(); }
  Eigen::Index num_snapshots() const { return waveforms.cols(); }
  void validate() const;
};

// Element n (0-based) is exp(-j n pi cos(theta)).
CVector steering_vector(double theta, Eigen::Index num_sensors);

// Same as steering_vector but parameterized by u = cos(theta); u in [-1, 1].
CVector steering_vector_u(double u, Eigen::Index num_sensors);

// N x M matrix whose column m is steering_vector(doas[m], N).
CMatrix manifold_matrix(const RVector& doas, Eigen::Index num_sensors);

// A(doas) * waveforms, the noiseless array output.
CMatrix predicted_output(const RVector& doas, const CMatrix& waveforms, Eigen::Index num_sensors);

// Draws an N x T matrix of i.i.d. mixture samples.
//
// Stream layout (fixed, part of the reproducibility contract): a
// std::mt19937_64 seeded with `seed`; entries are visited column-major
// (t outer, n inner); for each entry one 64-bit draw selects the component
// label by inverse CDF over `mixing`, then two draws feed a Box-Muller pair
// giving the real and imaginary parts, each scaled to variance sigma_l^2 / 2.
// Uniforms are formed from the top 53 bits of each draw.
CMatrix sample_gmm_noise(const NoiseModel& noise, Eigen::Index rows, Eigen::Index cols,
                         std::uint64_t seed);

// Y = A(doas) S + V with V from sample_gmm_noise.
SnapshotMatrix synthesize_snapshots(const ArrayGeometry& geometry, const SourceConfig& sources,
                                    const NoiseModel& noise, std::uint64_t seed);

// Time-averaged |s_m(t)|^2 per row.
RVector signal_power(const CMatrix& waveforms);

// Incomplete-data log-likelihood
//   sum_t sum_n ln sum_l lambda_l / (pi sigma_l^2) exp(-|y_n(t) - [A s(t)]_n|^2 / sigma_l^2)
// evaluated with log-sum-exp. Throws NumericError naming (n, t) on a
// non-finite term.
double log_likelihood(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate);

// Per-element log density of a residual with squared modulus `r`.
double log_mixture_density(double r, const NoiseModel& noise);

}  // namespace gmdoa
