#pragma once

#include <vector>

#include "gmdoa/array_model.hpp"
#include "gmdoa/doa_search.hpp"
#include "gmdoa/em_common.hpp"
#include "gmdoa/trace.hpp"

namespace gmdoa {

// Updated (theta_m, s_m) for one source.
struct SourceUpdate {
  double doa = 0.0;
  CRowVector waveform;
};

// Concentrated single-source fit shared by both algorithms: searches
// g(u) = sum_t |a(u)^H W(t) v(t)|^2 / tr W(t) from cos(start_doa), in its
// residual form, and returns the angle together with
// s(t) = a^H W(t) v(t) / tr W(t).
SourceUpdate fit_single_source(const CMatrix& targets, const RMatrix& weights, double start_doa,
                               const DoaSearchStrategy& search);

struct SageState {
  ParameterEstimate estimate;
  int iteration = 0;  // completed iterations
};

struct SageEStep1 {
  Responsibilities resp;
  // One N x T array per source:
  //   mu^m = a(theta_m) s_m + (Y - A S) / M.
  std::vector<CMatrix> conditional_means;
};

// E-step of the first EM-pair.
SageEStep1 sage_estep1(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate);

struct DoaSignalUpdate {
  RVector doas;
  CMatrix waveforms;
};

// M-step of the first EM-pair. Every source reads the same responsibilities
// and starts its search from previous_doas[m]; updates are simultaneous.
DoaSignalUpdate sage_mstep1(const std::vector<CMatrix>& conditional_means, const Responsibilities& resp,
                            const NoiseModel& noise, const RVector& previous_doas,
                            const DoaSearchStrategy& search);

// Second EM-pair: fresh responsibilities at the current estimate, then the
// per-snapshot weighted least-squares signal update. Returns the new M x T
// waveforms.
CMatrix sage_empair2(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate,
                     const EStepObserver& on_estep = {});

// Third EM-pair: fresh responsibilities, then the closed-form mixture update.
NoiseModel sage_empair3(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate,
                        const EStepObserver& on_estep = {});

// One full SAGE iteration (three EM-pairs). `on_cycle` is called after each
// pair with cycle = 1, 2, 3.
void sage_step(const SnapshotMatrix& snapshots, SageState& state, const DoaSearchStrategy& search,
               const EStepObserver& on_estep = {}, const CycleCallback& on_cycle = {});

// Runs up to options.max_iterations SAGE iterations from state.estimate.
IterationResult sage_iterate(const SnapshotMatrix& snapshots, SageState state,
                             const DoaSearchStrategy& search, const IterateOptions& options);

}  // namespace gmdoa
