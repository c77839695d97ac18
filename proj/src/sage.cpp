#include "gmdoa/sage.hpp"

#include <fmt/format.h>

namespace gmdoa {

SourceUpdate fit_single_source(const CMatrix& targets, const RMatrix& weights, double start_doa,
                               const DoaSearchStrategy& search) {
  const DoaObjective objective(targets, weights);
  SourceUpdate update;
  update.doa = search_doa([&](double u) { return objective.residual_form(u); }, start_doa, search);
  update.waveform = single_source_signal_row(targets, update.doa, weights);
  return update;
}

SageEStep1 sage_estep1(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate) {
  const Eigen::Index sensors = snapshots.num_sensors();
  const Eigen::Index sources = estimate.num_sources();
  const CMatrix manifold = manifold_matrix(estimate.doas, sensors);
  const CMatrix predicted = manifold * estimate.waveforms;

  SageEStep1 out{responsibilities(snapshots, predicted, estimate.noise), {}};
  const CMatrix residual = snapshots.data - predicted;
  const double keep = 1.0 - 1.0 / static_cast<double>(sources);
  out.conditional_means.reserve(static_cast<std::size_t>(sources));
  for (Eigen::Index m = 0; m < sources; ++m) {
    // a_m s_m + r / M written as y - sum_{d != m} a_d s_d - (1 - 1/M) r, so a
    // single source gets Y back exactly.
    CMatrix others = CMatrix::Zero(sensors, snapshots.num_snapshots());
    for (Eigen::Index d = 0; d < sources; ++d) {
      if (d != m) others += manifold.col(d) * estimate.waveforms.row(d);
    }
    out.conditional_means.push_back(snapshots.data - others - keep * residual);
  }
  return out;
}

DoaSignalUpdate sage_mstep1(const std::vector<CMatrix>& conditional_means, const Responsibilities& resp,
                            const NoiseModel& noise, const RVector& previous_doas,
                            const DoaSearchStrategy& search) {
  const auto sources = static_cast<Eigen::Index>(conditional_means.size());
  if (previous_doas.size() != sources) {
    throw StructuralError(fmt::format("{} conditional means but {} DOAs", sources, previous_doas.size()));
  }
  const RMatrix weights = weight_diagonals(resp, noise);
  DoaSignalUpdate out{RVector(sources), CMatrix(sources, resp.num_snapshots())};
  for (Eigen::Index m = 0; m < sources; ++m) {
    try {
      SourceUpdate update =
          fit_single_source(conditional_means[static_cast<std::size_t>(m)], weights, previous_doas[m], search);
      out.doas[m] = update.doa;
      out.waveforms.row(m) = update.waveform;
    } catch (Error& e) {
      e.add_context(fmt::format("source {}", m + 1));
      throw;
    }
  }
  return out;
}

CMatrix sage_empair2(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate,
                     const EStepObserver& on_estep) {
  const CMatrix manifold = manifold_matrix(estimate.doas, snapshots.num_sensors());
  const Responsibilities resp = responsibilities(snapshots, manifold * estimate.waveforms, estimate.noise);
  if (on_estep) on_estep(resp);
  return multi_source_signal_update(snapshots, manifold, weight_diagonals(resp, estimate.noise));
}

NoiseModel sage_empair3(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate,
                        const EStepObserver& on_estep) {
  const CMatrix predicted = predicted_output(estimate.doas, estimate.waveforms, snapshots.num_sensors());
  const Responsibilities resp = responsibilities(snapshots, predicted, estimate.noise);
  if (on_estep) on_estep(resp);
  return noise_param_update(resp, squared_residuals(snapshots, predicted));
}

void sage_step(const SnapshotMatrix& snapshots, SageState& state, const DoaSearchStrategy& search,
               const EStepObserver& on_estep, const CycleCallback& on_cycle) {
  ParameterEstimate& est = state.estimate;

  {
    const SageEStep1 estep = sage_estep1(snapshots, est);
    if (on_estep) on_estep(estep.resp);
    DoaSignalUpdate update = sage_mstep1(estep.conditional_means, estep.resp, est.noise, est.doas, search);
    est.doas = std::move(update.doas);
    est.waveforms = std::move(update.waveforms);
  }
  if (on_cycle) on_cycle(1, est);

  est.waveforms = sage_empair2(snapshots, est, on_estep);
  if (on_cycle) on_cycle(2, est);

  est.noise = sage_empair3(snapshots, est, on_estep);
  if (on_cycle) on_cycle(3, est);

  ++state.iteration;
}

IterationResult sage_iterate(const SnapshotMatrix& snapshots, SageState state,
                             const DoaSearchStrategy& search, const IterateOptions& options) {
  search.validate();
  const ParameterEstimate initial = state.estimate;
  auto step = [&](ParameterEstimate& est, const CycleCallback& on_cycle) {
    state.estimate = std::move(est);
    sage_step(snapshots, state, search, options.on_estep, on_cycle);
    est = state.estimate;
  };
  return run_iterations(snapshots, initial, 3, options, step);
}

}  // namespace gmdoa
