#pragma once

#include "gmdoa/sage.hpp"

namespace gmdoa {

struct AecmState {
  ParameterEstimate estimate;  // sources < cycle_cursor already hold this iteration's values
  int iteration = 0;           // completed iterations
  Eigen::Index cycle_cursor = 0;  // 0-based index of the next cycle, 0..M+1
};

struct AecmEStep {
  Responsibilities resp;
  // eta^m = Y - sum_{d != m} a(theta_d) s_d, using whatever values the
  // estimate currently holds (updated for d < m, previous for d > m).
  CMatrix targets;
};

// E-step of the m-th EM-cycle (m is 0-based) at the mixed estimate.
AecmEStep aecm_estep_m(const SnapshotMatrix& snapshots, const ParameterEstimate& estimate, Eigen::Index m);

// CM-step of the m-th EM-cycle: searches d_m from previous_doa (a local
// improvement with the golden strategy) and refits s_m.
SourceUpdate aecm_cmstep_m(const Responsibilities& resp, const CMatrix& targets, const NoiseModel& noise,
                           double previous_doa, const DoaSearchStrategy& search);

// Expected complete-data objective of the m-th cycle for candidate
// (theta, s), up to terms constant in (theta, s):
//   -sum_{t,n,l} w(n,t,l)/sigma_l^2 * (rho + |eta_n(t) - a_n(theta) s(t)|^2).
double aecm_cycle_objective(const Responsibilities& resp, const CMatrix& targets, const NoiseModel& noise,
                            double theta, const CRowVector& waveform, double rho = 0.0);

// One full AECM iteration: M source cycles in ascending order, then the
// signal cycle and the noise cycle. `on_cycle` is called after each of the
// M + 2 cycles.
void aecm_step(const SnapshotMatrix& snapshots, AecmState& state, const DoaSearchStrategy& search,
               const EStepObserver& on_estep = {}, const CycleCallback& on_cycle = {});

IterationResult aecm_iterate(const SnapshotMatrix& snapshots, AecmState state,
                             const DoaSearchStrategy& search, const IterateOptions& options);

}  // namespace gmdoa
