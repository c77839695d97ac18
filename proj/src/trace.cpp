#include "gmdoa/trace.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace gmdoa {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_integral(double x) { return std::floor(x) == x; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no, std::size_t column) {
  if (text == "nan") return kNaN;
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw StructuralError(fmt::format("line {}: column {} is not a number ('{}')", line_no, column + 1, text));
  }
}

}  // namespace

int ConvergenceTrace::iterations() const {
  int count = 0;
  for (const auto& row : rows) {
    if (row.iteration > 0.0 && is_integral(row.iteration)) ++count;
  }
  return count;
}

int ConvergenceTrace::iterations_to_threshold(double threshold_deg) const {
  for (const auto& row : rows) {
    if (row.iteration <= 0.0 || !is_integral(row.iteration) || row.errors_deg.size() == 0) continue;
    if (row.errors_deg.hasNaN()) continue;
    if (row.errors_deg.maxCoeff() < threshold_deg) return static_cast<int>(row.iteration);
  }
  return -1;
}

RVector matched_errors_deg(const RVector& estimates_rad, const RVector& truth_rad) {
  const Eigen::Index m_est = estimates_rad.size();
  const Eigen::Index m_true = truth_rad.size();
  RVector errors = RVector::Constant(m_est, kNaN);
  std::vector<bool> est_used(static_cast<std::size_t>(m_est), false);
  std::vector<bool> true_used(static_cast<std::size_t>(m_true), false);

  for (Eigen::Index pair = 0; pair < std::min(m_est, m_true); ++pair) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_i = -1;
    Eigen::Index best_j = -1;
    for (Eigen::Index i = 0; i < m_est; ++i) {
      if (est_used[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = 0; j < m_true; ++j) {
        if (true_used[static_cast<std::size_t>(j)]) continue;
        const double gap = std::abs(estimates_rad[i] - truth_rad[j]);
        if (gap < best) {
          best = gap;
          best_i = i;
          best_j = j;
        }
      }
    }
    est_used[static_cast<std::size_t>(best_i)] = true;
    true_used[static_cast<std::size_t>(best_j)] = true;
    errors[best_i] = rad_to_deg(best);
  }
  return errors;
}

TraceRow make_trace_row(double iteration, const SnapshotMatrix& snapshots,
                        const ParameterEstimate& estimate, const RVector& truth_rad, double wall_ms) {
  TraceRow row;
  row.iteration = iteration;
  row.doas_deg = estimate.doas * (180.0 / kPi);
  row.errors_deg = matched_errors_deg(estimate.doas, truth_rad);
  row.mixing = estimate.noise.mixing;
  row.stddevs = estimate.noise.stddevs;
  row.loglik = log_likelihood(snapshots, estimate);
  row.wall_ms = wall_ms;
  return row;
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  if (trace.rows.empty()) throw StructuralError("cannot write an empty trace");
  const Eigen::Index sources = trace.rows.front().doas_deg.size();
  const Eigen::Index components = trace.rows.front().mixing.size();

  std::string header = "iter";
  for (Eigen::Index m = 1; m <= sources; ++m) header += fmt::format(",theta_deg_{}", m);
  for (Eigen::Index m = 1; m <= sources; ++m) header += fmt::format(",err_deg_{}", m);
  for (Eigen::Index l = 1; l <= components; ++l) header += fmt::format(",lambda_{}", l);
  for (Eigen::Index l = 1; l <= components; ++l) header += fmt::format(",sigma_{}", l);
  header += ",loglik,wall_ms\n";
  out << header;

  auto num = [](double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{:.12g}", v); };
  for (const auto& row : trace.rows) {
    std::string line = num(row.iteration);
    for (double v : row.doas_deg) line += ',' + num(v);
    for (double v : row.errors_deg) line += ',' + num(v);
    for (double v : row.mixing) line += ',' + num(v);
    for (double v : row.stddevs) line += ',' + num(v);
    line += ',' + num(row.loglik) + ',' + num(row.wall_ms) + '\n';
    out << line;
  }
}

ConvergenceTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw StructuralError("trace is empty");
  const auto header = split_csv_line(line);
  Eigen::Index sources = 0;
  Eigen::Index components = 0;
  for (const auto& name : header) {
    if (name.rfind("theta_deg_", 0) == 0) ++sources;
    if (name.rfind("lambda_", 0) == 0) ++components;
  }
  const std::size_t expected = static_cast<std::size_t>(3 + 2 * sources + 2 * components);
  if (header.size() != expected || header.front() != "iter" || header[header.size() - 2] != "loglik" ||
      header.back() != "wall_ms") {
    throw StructuralError(fmt::format("unexpected trace header '{}'", line));
  }

  ConvergenceTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected) {
      throw StructuralError(fmt::format("line {}: {} fields, expected {}", line_no, fields.size(), expected));
    }
    std::size_t col = 0;
    auto next = [&] {
      const double v = parse_number(fields[col], line_no, col);
      ++col;
      return v;
    };
    TraceRow row;
    row.iteration = next();
    row.doas_deg.resize(sources);
    row.errors_deg.resize(sources);
    row.mixing.resize(components);
    row.stddevs.resize(components);
    for (Eigen::Index m = 0; m < sources; ++m) row.doas_deg[m] = next();
    for (Eigen::Index m = 0; m < sources; ++m) row.errors_deg[m] = next();
    for (Eigen::Index l = 0; l < components; ++l) row.mixing[l] = next();
    for (Eigen::Index l = 0; l < components; ++l) row.stddevs[l] = next();
    row.loglik = next();
    row.wall_ms = next();
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

IterationResult run_iterations(const SnapshotMatrix& snapshots, ParameterEstimate initial,
                               int cycles_per_iteration, const IterateOptions& options,
                               const IterationStep& step) {
  if (options.max_iterations < 1) {
    throw DomainError(fmt::format("iteration budget must be at least 1, got {}", options.max_iterations));
  }
  initial.validate();
  using Clock = std::chrono::steady_clock;

  IterationResult result{std::move(initial), {}};
  result.trace.rows.push_back(make_trace_row(0.0, snapshots, result.estimate, options.true_doas, 0.0));

  double elapsed_ms = 0.0;
  int quiet_iterations = 0;
  for (int k = 1; k <= options.max_iterations; ++k) {
    const RVector before = result.estimate.doas;
    auto segment_start = Clock::now();
    auto lap = [&] {
      const auto now = Clock::now();
      elapsed_ms += std::chrono::duration<double, std::milli>(now - segment_start).count();
      return now;
    };

    CycleCallback on_cycle;
    if (options.granularity == TraceGranularity::cycle) {
      on_cycle = [&](int cycle, const ParameterEstimate& current) {
        lap();
        if (cycle < cycles_per_iteration) {
          const double at = (k - 1) + static_cast<double>(cycle) / cycles_per_iteration;
          result.trace.rows.push_back(make_trace_row(at, snapshots, current, options.true_doas, elapsed_ms));
        }
        segment_start = Clock::now();
      };
    }

    try {
      step(result.estimate, on_cycle);
    } catch (Error& e) {
      e.add_context(fmt::format("iteration {}", k));
      throw;
    }
    lap();
    result.trace.rows.push_back(
        make_trace_row(static_cast<double>(k), snapshots, result.estimate, options.true_doas, elapsed_ms));

    if (options.early_stop) {
      const double change = (result.estimate.doas - before).cwiseAbs().maxCoeff();
      quiet_iterations = change < options.early_stop_tol ? quiet_iterations + 1 : 0;
      if (quiet_iterations >= options.early_stop_patience) break;
    }
  }
  return result;
}

}  // namespace gmdoa
