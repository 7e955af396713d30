#pragma once

#include <span>
#include <vector>

namespace heatlab::detail {

/// Solves a tridiagonal system (Thomas algorithm, no pivoting; the systems
/// assembled here are diagonally dominant). lower[i] couples row i+1 to i,
/// upper[i] couples row i to i+1.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Symmetric cyclic tridiagonal system: corner couples rows 0 and n-1.
std::vector<double> solve_cyclic_symmetric(std::span<const double> diag,
                                           std::span<const double> off, double corner,
                                           std::span<const double> rhs);

} // namespace heatlab::detail
