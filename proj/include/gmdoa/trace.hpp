#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "gmdoa/array_model.hpp"
#include "gmdoa/em_common.hpp"

namespace gmdoa {

// One convergence record. `iteration` is integral for per-iteration rows and
// fractional (k - 1 + c / cycles) for per-cycle rows.
struct TraceRow {
  double iteration = 0.0;
  RVector doas_deg;
  RVector errors_deg;  // NaN where no true DOA was matched
  RVector mixing;
  RVector stddevs;
  double loglik = 0.0;
  double wall_ms = 0.0;
};

// Row 0 is the initial estimate.
struct ConvergenceTrace {
  std::vector<TraceRow> rows;

  // Number of full iterations recorded (rows with integral iteration > 0).
  int iterations() const;
  // First integral iteration whose largest per-source error is below
  // threshold_deg, or -1 if none.
  int iterations_to_threshold(double threshold_deg) const;
};

// Greedy nearest-angle assignment: repeatedly pair the closest unassigned
// (estimate, truth) couple. Returns |estimate_m - matched truth| in degrees
// per estimate; unmatched estimates get NaN.
RVector matched_errors_deg(const RVector& estimates_rad, const RVector& truth_rad);

TraceRow make_trace_row(double iteration, const SnapshotMatrix& snapshots,
                        const ParameterEstimate& estimate, const RVector& truth_rad, double wall_ms);

// CSV with header iter,theta_deg_1..M,err_deg_1..M,lambda_1..L,sigma_1..L,loglik,wall_ms;
// 12 significant digits, LF line endings.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);
// Parses the format written by write_trace_csv. Throws StructuralError on a
// malformed header or row.
ConvergenceTrace read_trace_csv(std::istream& in);

enum class TraceGranularity { iteration, cycle };

struct IterateOptions {
  int max_iterations = 50;
  // Stop once max_m |delta theta_m| < early_stop_tol for early_stop_patience
  // consecutive iterations.
  bool early_stop = false;
  double early_stop_tol = 1e-6;
  int early_stop_patience = 3;
  TraceGranularity granularity = TraceGranularity::iteration;
  RVector true_doas;       // radians; empty disables the error columns
  EStepObserver on_estep;  // called with every responsibility array computed
};

struct IterationResult {
  ParameterEstimate estimate;
  ConvergenceTrace trace;
};

// Called by an algorithm step after each EM-pair / EM-cycle with the cycle
// index (1-based) and the estimate at that point.
using CycleCallback = std::function<void(int cycle, const ParameterEstimate&)>;

// One full algorithm iteration, updating the estimate in place.
using IterationStep = std::function<void(ParameterEstimate&, const CycleCallback&)>;

// Shared outer loop: records the initial row, runs `step` up to
// max_iterations times, times each iteration on a monotonic clock (trace
// bookkeeping excluded) and appends rows at the requested granularity.
IterationResult run_iterations(const SnapshotMatrix& snapshots, ParameterEstimate initial,
                               int cycles_per_iteration, const IterateOptions& options,
                               const IterationStep& step);

}  // namespace gmdoa
