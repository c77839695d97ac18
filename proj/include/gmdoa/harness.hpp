#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gmdoa/aecm.hpp"
#include "gmdoa/sage.hpp"

namespace gmdoa {

enum class Algorithm { sage, aecm };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algorithm);

// Experiment description. Angles are in degrees here; the library works in
// radians. Waveforms are constant over time: one complex value per source.
//
// Defaults reproduce the reference scenario: N = 6, T = 200, sources at 60
// and 100 degrees with amplitudes 1 and sqrt(10), two-component noise
// (0.95, 0.05) / (1, sqrt(20)), initialized at 55 and 105 degrees with unit
// waveforms and noise (0.9, 0.1) / (1, sqrt(10)).
struct ExperimentConfig {
  Eigen::Index num_sensors = 6;
  Eigen::Index num_snapshots = 200;
  RVector true_doas_deg;
  CVector true_waveforms;
  NoiseModel noise;
  RVector initial_doas_deg;
  CVector initial_waveforms;
  NoiseModel initial_noise;
  Algorithm algorithm = Algorithm::aecm;
  DoaSearchStrategy search;
  int iterations = 50;
  std::uint64_t seed = 0;
  TraceGranularity granularity = TraceGranularity::iteration;
  bool early_stop = false;

  // Throws ValidationError naming the offending key, e.g. "initial.doas[0]".
  void validate() const;
};

ExperimentConfig default_config();

// Config file parse failure; line() is 1-based.
class ConfigParseError : public ValidationError {
 public:
  ConfigParseError(int line, const std::string& message)
      : ValidationError(fmt_line(line), message), line_(line) {}
  int line() const { return line_; }

 private:
  static std::string fmt_line(int line) { return "line " + std::to_string(line); }
  int line_;
};

// YAML document; every key is optional and falls back to default_config().
//
//   N: 6
//   T: 200
//   sources:   { doas: [60, 100], waveforms: [1, 3.1622776601683795] }
//   noise:     { lambda: [0.95, 0.05], sigma: [1, 4.47213595499958] }
//   initial:   { doas: [55, 105], waveforms: [1, 1], lambda: [0.9, 0.1], sigma: [1, 3.1622776601683795] }
//   algorithm: aecm        # sage | aecm
//   search:    golden      # golden | grid
//   search_params: { grid_step: 0.001, bracket_tol: 0.0001, derivative_step: 1.0e-6, canonical_golden: false }
//   iterations: 50
//   seed: 0
//   trace: iteration       # iteration | cycle
//   early_stop: false
//
// A waveform entry is a real number or a [re, im] pair.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
  ConvergenceTrace trace;
  ParameterEstimate estimate;
};

SourceConfig true_sources(const ExperimentConfig& config);
ParameterEstimate initial_estimate(const ExperimentConfig& config);
SnapshotMatrix experiment_snapshots(const ExperimentConfig& config);

// Synthesizes data from config.seed and runs the configured algorithm.
ExperimentResult run_experiment(const ExperimentConfig& config, const EStepObserver& on_estep = {});

void emit_trace(const ConvergenceTrace& trace, const std::filesystem::path& path);

inline constexpr double kConvergenceThresholdDeg = 1.0;

struct AlgorithmSummary {
  int iterations_to_threshold = -1;  // -1 when the threshold is never reached
  int iterations_run = 0;
  double total_wall_ms = 0.0;
  double mean_iteration_ms = 0.0;
  double final_max_error_deg = 0.0;
};

struct ComparisonSummary {
  std::uint64_t seed = 0;
  AlgorithmSummary sage;
  AlgorithmSummary aecm;
};

AlgorithmSummary summarize(const ConvergenceTrace& trace);

// Runs SAGE and AECM on identical data and initialization.
ComparisonSummary compare_runs(const ExperimentConfig& config_base);

void write_comparison_csv(const std::vector<ComparisonSummary>& rows, std::ostream& out);

}  // namespace gmdoa
