#pragma once

#include <functional>
#include <string_view>

#include "gmdoa/types.hpp"

namespace gmdoa {

using UnivariateObjective = std::function<double(double)>;

enum class SearchKind { golden_local, grid_argmax };

// DOA update strategy over u = cos(theta).
struct DoaSearchStrategy {
  SearchKind kind = SearchKind::golden_local;
  double grid_step = 1e-3;         // march step, also the grid spacing for grid_argmax
  double bracket_tol = 1e-4;       // stop shrinking once end - star <= bracket_tol
  double derivative_step = 1e-6;   // central difference step for the ascent direction
  bool canonical_golden = false;   // interior points 0.382/0.618 instead of 0.312/0.618

  void validate() const;
  // Fraction of the bracket at which the lower interior point sits.
  double lower_fraction() const { return canonical_golden ? 0.382 : 0.312; }
};

inline constexpr double kUpperFraction = 0.618;
inline constexpr double kDomainMargin = 1e-9;
inline constexpr double kUMin = -1.0 + kDomainMargin;
inline constexpr double kUMax = 1.0 - kDomainMargin;

SearchKind parse_search_kind(std::string_view name);
std::string_view to_string(SearchKind kind);

// Local maximum of `objective` nearest `u_start`: pick the ascent direction
// from a central difference, march in steps of grid_step while the objective
// increases, bracket, then shrink the bracket with two interior points until
// its width is at most bracket_tol and return the midpoint. If the midpoint
// is not strictly better than the start, the start is returned, so the
// result never decreases the objective. Results are clamped to
// [kUMin, kUMax]. Throws NumericError on a non-finite objective value.
double golden_local_search(const UnivariateObjective& objective, double u_start,
                           const DoaSearchStrategy& params = {});

// Global maximizer on the grid {-1 + k*grid_step} inside (-1, 1), ties to the
// smaller u, refined by golden_local_search from the best grid point.
double grid_argmax(const UnivariateObjective& objective, double grid_step,
                   const DoaSearchStrategy& params = {});

// Applies the configured strategy starting from theta_start (radians) and
// returns the updated angle in radians.
double search_doa(const UnivariateObjective& objective, double theta_start,
                  const DoaSearchStrategy& strategy);

}  // namespace gmdoa
