#include "gmdoa/doa_search.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gmdoa/diagnostics.hpp"

namespace gmdoa {
namespace {

double evaluate(const UnivariateObjective& objective, double u) {
  const double value = objective(u);
  if (!std::isfinite(value)) {
    throw NumericError(fmt::format("DOA objective is not finite at u={}", u));
  }
  return value;
}

double clamp_u(double u) { return std::clamp(u, kUMin, kUMax); }

// Sign of f'(u) from a central difference, one-sided near the domain edges.
double ascent_direction(const UnivariateObjective& objective, double u, double step) {
  const double lo = clamp_u(u - step);
  const double hi = clamp_u(u + step);
  if (hi <= lo) return 1.0;
  const double slope = (evaluate(objective, hi) - evaluate(objective, lo)) / (hi - lo);
  return slope < 0.0 ? -1.0 : 1.0;
}

}  // namespace

void DoaSearchStrategy::validate() const {
  if (!(grid_step > 0.0 && grid_step < 1.0)) {
    throw DomainError(fmt::format("grid_step must lie in (0, 1), got {}", grid_step));
  }
  if (!(bracket_tol > 0.0 && bracket_tol < grid_step)) {
    throw DomainError(fmt::format("bracket_tol must lie in (0, grid_step), got {}", bracket_tol));
  }
  if (!(derivative_step > 0.0)) {
    throw DomainError(fmt::format("derivative_step must be positive, got {}", derivative_step));
  }
}

SearchKind parse_search_kind(std::string_view name) {
  if (name == "golden") return SearchKind::golden_local;
  if (name == "grid") return SearchKind::grid_argmax;
  throw DomainError(fmt::format("unknown search kind '{}' (expected golden or grid)", name));
}

std::string_view to_string(SearchKind kind) {
  return kind == SearchKind::golden_local ? "golden" : "grid";
}

double golden_local_search(const UnivariateObjective& objective, double u_start,
                           const DoaSearchStrategy& params) {
  params.validate();
  if (!std::isfinite(u_start)) throw DomainError("search start is not finite");
  const double start = clamp_u(u_start);
  const double start_value = evaluate(objective, start);
  const double step = params.grid_step;
  const double dir = ascent_direction(objective, start, params.derivative_step);

  // March uphill. `best` trails `probe` by one step.
  double best = start;
  double best_value = start_value;
  double probe = clamp_u(best + dir * step);
  double probe_value = evaluate(objective, probe);
  bool hit_edge = false;
  while (best_value < probe_value) {
    best = probe;
    best_value = probe_value;
    const double next = clamp_u(probe + dir * step);
    if (next == probe) {
      hit_edge = true;
      break;
    }
    probe = next;
    probe_value = evaluate(objective, probe);
  }
  if (hit_edge) {
    warn(fmt::format("DOA search reached the edge of the u domain at u={}", probe));
  }

  double star = dir > 0.0 ? best - step : probe;
  double end = dir > 0.0 ? probe : best + step;
  star = clamp_u(star);
  end = clamp_u(end);

  const double lower = params.lower_fraction();
  while (end - star > params.bracket_tol) {
    const double width = end - star;
    const double mid1 = star + lower * width;
    const double mid2 = star + kUpperFraction * width;
    if (evaluate(objective, mid1) < evaluate(objective, mid2)) {
      star = mid1;
    } else {
      end = mid2;
    }
  }

  const double result = clamp_u(0.5 * (star + end));
  return evaluate(objective, result) > start_value ? result : start;
}

double grid_argmax(const UnivariateObjective& objective, double grid_step,
                   const DoaSearchStrategy& params) {
  if (!(grid_step > 0.0 && grid_step < 1.0)) {
    throw DomainError(fmt::format("grid_step must lie in (0, 1), got {}", grid_step));
  }
  const auto points = static_cast<long>(std::floor(2.0 / grid_step + 1e-9)) - 1;
  if (points < 1) throw DomainError("grid has no interior points");

  double best_u = -1.0 + grid_step;
  double best_value = evaluate(objective, best_u);
  for (long k = 2; k <= points; ++k) {
    const double u = -1.0 + static_cast<double>(k) * grid_step;
    if (u >= 1.0) break;
    const double value = evaluate(objective, u);
    if (value > best_value) {
      best_value = value;
      best_u = u;
    }
  }
  return golden_local_search(objective, best_u, params);
}

double search_doa(const UnivariateObjective& objective, double theta_start,
                  const DoaSearchStrategy& strategy) {
  const double u_start = std::cos(theta_start);
  const double u = strategy.kind == SearchKind::golden_local
                       ? golden_local_search(objective, u_start, strategy)
                       : grid_argmax(objective, strategy.grid_step, strategy);
  return std::acos(clamp_u(u));
}

}  // namespace gmdoa
