#include "gmdoa/aecm.hpp"

#include <fmt/format.h>

namespace gmdoa {

AecmEStep aecm_estep_m(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate, Eigen::Index m) {
  const Eigen::Index sources = estimate.num_sources();
  if (m < 0 || m >= sources) {
    throw StructuralError(fmt::format("source index {} out of range [0, {})", m, sources));
  }
  const Eigen::Index sensors = snapshots.num_sensors();
  const CMatrix manifold = manifold_matrix(estimate.doas, sensors);
  const CMatrix predicted = manifold * estimate.waveforms;

  CMatrix others = CMatrix::Zero(sensors, snapshots.num_snapshots());
  for (Eigen::Index d = 0; d < sources; ++d) {
    if (d != m) others += manifold.col(d) * estimate.waveforms.row(d);
  }
  return AecmEStep{responsibilities(snapshots, predicted, estimate.noise), snapshots.data - others};
}

SourceUpdate aecm_cmstep_m(const Responsibilities& resp, const CMatrix& targets, const NoiseModel& noise,
                           double previous_doa, const DoaSearchStrategy& search) {
  return fit_single_source(targets, weight_diagonals(resp, noise), previous_doa, search);
}

double aecm_cycle_objective(const Responsibilities& resp, const CMatrix& targets, const NoiseModel& noise,
                            double theta, const CRowVector& waveform, double rho) {
  const CVector a = steering_vector(theta, targets.rows());
  const RMatrix weights = weight_diagonals(resp, noise);
  const RMatrix misfit = (targets - a * waveform).cwiseAbs2().array() + rho;
  return -weights.cwiseProduct(misfit).sum();
}

void aecm_step(const SnapshotMatrix& snapshots, AecmState& state, const DoaSearchStrategy& search,
               const EStepObserver& on_estep, const CycleCallback& on_cycle) {
  ParameterEstimate& est = state.estimate;
  const Eigen::Index sources = est.num_sources();

  for (state.cycle_cursor = 0; state.cycle_cursor < sources; ++state.cycle_cursor) {
    const Eigen::Index m = state.cycle_cursor;
    try {
      const AecmEStep estep = aecm_estep_m(snapshots, est, m);
      if (on_estep) on_estep(estep.resp);
      SourceUpdate update = aecm_cmstep_m(estep.resp, estep.targets, est.noise, est.doas[m], search);
      est.doas[m] = update.doa;
      est.waveforms.row(m) = update.waveform;
    } catch (Error& e) {
      e.add_context(fmt::format("cycle {} (source {})", m + 1, m + 1));
      throw;
    }
    if (on_cycle) on_cycle(static_cast<int>(m + 1), est);
  }

  try {
    est.waveforms = sage_empair2(snapshots, est, on_estep);
  } catch (Error& e) {
    e.add_context(fmt::format("cycle {}", sources + 1));
    throw;
  }
  state.cycle_cursor = sources + 1;
  if (on_cycle) on_cycle(static_cast<int>(sources + 1), est);

  est.noise = sage_empair3(snapshots, est, on_estep);
  if (on_cycle) on_cycle(static_cast<int>(sources + 2), est);

  state.cycle_cursor = 0;
  ++state.iteration;
}

IterationResult aecm_iterate(const SnapshotMatrix& snapshots, AecmState state,
                             const DoaSearchStrategy& search, const IterateOptions& options) {
  search.validate();
  const ParameterEstimate initial = state.estimate;
  const auto cycles = static_cast<int>(initial.num_sources() + 2);
  auto step = [&](ParameterEstimate& est, const CycleCallback& on_cycle) {
    state.estimate = std::move(est);
    aecm_step(snapshots, state, search, options.on_estep, on_cycle);
    est = state.estimate;
  };
  return run_iterations(snapshots, initial, cycles, options, step);
}

}  // namespace gmdoa
