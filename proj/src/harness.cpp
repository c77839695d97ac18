#include "gmdoa/harness.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace gmdoa {
namespace {

RVector vec(std::initializer_list<double> values) {
  RVector out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out[i++] = v;
  return out;
}

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ValidationError(field, message);
}

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

void reject_unknown_keys(const YAML::Node& map, const std::string& prefix,
                         const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(prefix.empty() ? "<root>" : prefix, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      fail(prefix.empty() ? key : prefix + "." + key, fmt::format("unknown key (line {})", line_of(kv.first)));
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(field, fmt::format("cannot read value (line {})", line_of(node)));
  }
}

RVector real_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) fail(field, fmt::format("expected a list (line {})", line_of(node)));
  RVector out(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = scalar<double>(node[i], fmt::format("{}[{}]", field, i));
  }
  return out;
}

CVector complex_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) fail(field, fmt::format("expected a list (line {})", line_of(node)));
  CVector out(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto name = fmt::format("{}[{}]", field, i);
    const YAML::Node item = node[i];
    if (item.IsSequence()) {
      if (item.size() != 2) fail(name, "complex value must be [re, im]");
      out[static_cast<Eigen::Index>(i)] =
          Complex(scalar<double>(item[0], name), scalar<double>(item[1], name));
    } else {
      out[static_cast<Eigen::Index>(i)] = scalar<double>(item, name);
    }
  }
  return out;
}

void check_doas(const RVector& doas_deg, const std::string& field) {
  for (Eigen::Index i = 0; i < doas_deg.size(); ++i) {
    if (!(doas_deg[i] > 0.0 && doas_deg[i] < 180.0)) {
      fail(fmt::format("{}[{}]", field, i), fmt::format("{} deg is outside (0, 180)", doas_deg[i]));
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (doas_deg[i] == doas_deg[j]) fail(fmt::format("{}[{}]", field, i), "duplicate DOA");
    }
  }
}

void check_noise(const NoiseModel& noise, const std::string& prefix) {
  if (noise.mixing.size() == 0) fail(prefix + ".lambda", "needs at least one component");
  if (noise.mixing.size() != noise.stddevs.size()) {
    fail(prefix + ".sigma", fmt::format("has {} entries, lambda has {}", noise.stddevs.size(), noise.mixing.size()));
  }
  for (Eigen::Index l = 0; l < noise.mixing.size(); ++l) {
    if (!(noise.mixing[l] > 0.0)) fail(fmt::format("{}.lambda[{}]", prefix, l), "must be positive");
    if (!(noise.stddevs[l] > 0.0) || !std::isfinite(noise.stddevs[l])) {
      fail(fmt::format("{}.sigma[{}]", prefix, l), "must be positive");
    }
  }
  if (std::abs(noise.mixing.sum() - 1.0) > 1e-12) {
    fail(prefix + ".lambda", fmt::format("sums to {}, expected 1", noise.mixing.sum()));
  }
}

CMatrix constant_rows(const CVector& values, Eigen::Index snapshots) {
  return values * CRowVector::Ones(snapshots);
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "sage") return Algorithm::sage;
  if (name == "aecm") return Algorithm::aecm;
  throw ValidationError("algorithm", fmt::format("unknown algorithm '{}' (expected sage or aecm)", name));
}

std::string_view to_string(Algorithm algorithm) { return algorithm == Algorithm::sage ? "sage" : "aecm"; }

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.true_doas_deg = vec({60.0, 100.0});
  c.true_waveforms = CVector(2);
  c.true_waveforms << 1.0, std::sqrt(10.0);
  c.noise = NoiseModel{vec({0.95, 0.05}), vec({1.0, std::sqrt(20.0)})};
  c.initial_doas_deg = vec({55.0, 105.0});
  c.initial_waveforms = CVector::Ones(2);
  c.initial_noise = NoiseModel{vec({0.9, 0.1}), vec({1.0, std::sqrt(10.0)})};
  return c;
}

void ExperimentConfig::validate() const {
  if (num_sensors < 2) fail("N", "needs at least two sensors");
  if (num_snapshots < 1) fail("T", "needs at least one snapshot");
  const Eigen::Index sources = true_doas_deg.size();
  if (sources < 1) fail("sources.doas", "needs at least one source");
  if (num_sensors <= sources) fail("N", fmt::format("{} sensors cannot resolve {} sources", num_sensors, sources));
  check_doas(true_doas_deg, "sources.doas");
  if (true_waveforms.size() != sources) {
    fail("sources.waveforms", fmt::format("has {} entries, expected {}", true_waveforms.size(), sources));
  }
  check_noise(noise, "noise");
  if (initial_doas_deg.size() != sources) {
    fail("initial.doas", fmt::format("has {} entries, expected {}", initial_doas_deg.size(), sources));
  }
  check_doas(initial_doas_deg, "initial.doas");
  if (initial_waveforms.size() != sources) {
    fail("initial.waveforms", fmt::format("has {} entries, expected {}", initial_waveforms.size(), sources));
  }
  check_noise(initial_noise, "initial");
  if (iterations < 1) fail("iterations", "must be at least 1");
  try {
    search.validate();
  } catch (const Error& e) {
    fail("search_params", e.what());
  }
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError(e.mark.line + 1, e.msg);
  }

  ExperimentConfig c = default_config();
  if (root.IsNull()) return c;
  reject_unknown_keys(root, "",
                      {"N", "T", "sources", "noise", "initial", "algorithm", "search", "search_params",
                       "iterations", "seed", "trace", "early_stop"});

  if (root["N"]) c.num_sensors = scalar<Eigen::Index>(root["N"], "N");
  if (root["T"]) c.num_snapshots = scalar<Eigen::Index>(root["T"], "T");

  if (const auto src = root["sources"]) {
    reject_unknown_keys(src, "sources", {"doas", "waveforms"});
    if (src["doas"]) c.true_doas_deg = real_list(src["doas"], "sources.doas");
    if (src["waveforms"]) c.true_waveforms = complex_list(src["waveforms"], "sources.waveforms");
  }
  if (const auto noise = root["noise"]) {
    reject_unknown_keys(noise, "noise", {"lambda", "sigma"});
    if (noise["lambda"]) c.noise.mixing = real_list(noise["lambda"], "noise.lambda");
    if (noise["sigma"]) c.noise.stddevs = real_list(noise["sigma"], "noise.sigma");
  }
  if (const auto init = root["initial"]) {
    reject_unknown_keys(init, "initial", {"doas", "waveforms", "lambda", "sigma"});
    if (init["doas"]) c.initial_doas_deg = real_list(init["doas"], "initial.doas");
    if (init["waveforms"]) c.initial_waveforms = complex_list(init["waveforms"], "initial.waveforms");
    if (init["lambda"]) c.initial_noise.mixing = real_list(init["lambda"], "initial.lambda");
    if (init["sigma"]) c.initial_noise.stddevs = real_list(init["sigma"], "initial.sigma");
  }
  if (root["algorithm"]) c.algorithm = parse_algorithm(scalar<std::string>(root["algorithm"], "algorithm"));
  if (root["search"]) {
    try {
      c.search.kind = parse_search_kind(scalar<std::string>(root["search"], "search"));
    } catch (const DomainError& e) {
      fail("search", e.what());
    }
  }
  if (const auto sp = root["search_params"]) {
    reject_unknown_keys(sp, "search_params", {"grid_step", "bracket_tol", "derivative_step", "canonical_golden"});
    if (sp["grid_step"]) c.search.grid_step = scalar<double>(sp["grid_step"], "search_params.grid_step");
    if (sp["bracket_tol"]) c.search.bracket_tol = scalar<double>(sp["bracket_tol"], "search_params.bracket_tol");
    if (sp["derivative_step"]) {
      c.search.derivative_step = scalar<double>(sp["derivative_step"], "search_params.derivative_step");
    }
    if (sp["canonical_golden"]) {
      c.search.canonical_golden = scalar<bool>(sp["canonical_golden"], "search_params.canonical_golden");
    }
  }
  if (root["iterations"]) c.iterations = scalar<int>(root["iterations"], "iterations");
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["trace"]) {
    const auto g = scalar<std::string>(root["trace"], "trace");
    if (g == "iteration") {
      c.granularity = TraceGranularity::iteration;
    } else if (g == "cycle") {
      c.granularity = TraceGranularity::cycle;
    } else {
      fail("trace", fmt::format("unknown granularity '{}' (expected iteration or cycle)", g));
    }
  }
  if (root["early_stop"]) c.early_stop = scalar<bool>(root["early_stop"], "early_stop");

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", fmt::format("cannot open '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

SourceConfig true_sources(const ExperimentConfig& config) {
  return SourceConfig{config.true_doas_deg * (kPi / 180.0),
                      constant_rows(config.true_waveforms, config.num_snapshots)};
}

ParameterEstimate initial_estimate(const ExperimentConfig& config) {
  return ParameterEstimate{config.initial_doas_deg * (kPi / 180.0),
                           constant_rows(config.initial_waveforms, config.num_snapshots), config.initial_noise};
}

SnapshotMatrix experiment_snapshots(const ExperimentConfig& config) {
  return synthesize_snapshots(ArrayGeometry{config.num_sensors}, true_sources(config), config.noise, config.seed);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const EStepObserver& on_estep) {
  config.validate();
  const SnapshotMatrix snapshots = experiment_snapshots(config);

  IterateOptions options;
  options.max_iterations = config.iterations;
  options.early_stop = config.early_stop;
  options.granularity = config.granularity;
  options.true_doas = config.true_doas_deg * (kPi / 180.0);
  options.on_estep = on_estep;

  IterationResult run = config.algorithm == Algorithm::sage
                            ? sage_iterate(snapshots, SageState{initial_estimate(config)}, config.search, options)
                            : aecm_iterate(snapshots, AecmState{initial_estimate(config)}, config.search, options);
  return ExperimentResult{std::move(run.trace), std::move(run.estimate)};
}

void emit_trace(const ConvergenceTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  write_trace_csv(trace, out);
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

AlgorithmSummary summarize(const ConvergenceTrace& trace) {
  AlgorithmSummary s;
  s.iterations_to_threshold = trace.iterations_to_threshold(kConvergenceThresholdDeg);
  s.iterations_run = trace.iterations();
  s.total_wall_ms = trace.rows.back().wall_ms;
  s.mean_iteration_ms = s.iterations_run > 0 ? s.total_wall_ms / s.iterations_run : 0.0;
  s.final_max_error_deg = trace.rows.back().errors_deg.maxCoeff();
  return s;
}

ComparisonSummary compare_runs(const ExperimentConfig& config_base) {
  ExperimentConfig sage_cfg = config_base;
  sage_cfg.algorithm = Algorithm::sage;
  sage_cfg.granularity = TraceGranularity::iteration;
  ExperimentConfig aecm_cfg = sage_cfg;
  aecm_cfg.algorithm = Algorithm::aecm;

  ComparisonSummary out;
  out.seed = config_base.seed;
  out.sage = summarize(run_experiment(sage_cfg).trace);
  out.aecm = summarize(run_experiment(aecm_cfg).trace);
  return out;
}

void write_comparison_csv(const std::vector<ComparisonSummary>& rows, std::ostream& out) {
  out << "seed,sage_iters_to_threshold,aecm_iters_to_threshold,sage_total_ms,aecm_total_ms,"
         "sage_ms_per_iter,aecm_ms_per_iter,sage_final_max_err_deg,aecm_final_max_err_deg\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", r.seed,
                       r.sage.iterations_to_threshold, r.aecm.iterations_to_threshold, r.sage.total_wall_ms,
                       r.aecm.total_wall_ms, r.sage.mean_iteration_ms, r.aecm.mean_iteration_ms,
                       r.sage.final_max_error_deg, r.aecm.final_max_error_deg);
  }
}

}  // namespace gmdoa
