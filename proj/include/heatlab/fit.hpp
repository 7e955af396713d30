#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace heatlab {

/// One observation for an envelope fit: the fitted budget sum_j c_j basis_j
/// must cover `deficit`.
struct DeficitSample {
    double deficit = 0.0;
    std::vector<double> basis;
};

/// Names of the budget terms in priority order; `nonnegative[j]` constrains c_j >= 0.
struct BudgetForm {
    std::vector<std::string> names;
    std::vector<bool> nonnegative;

    /// First term an unconstrained intercept, the rest nonnegative.
    static BudgetForm with_intercept(std::vector<std::string> names);
};

struct FitResult {
    std::vector<double> coefficients;
    /// max over samples of the fitted budget.
    double budget = 0.0;
    /// max over samples of budget - deficit (the minimised quantity).
    double max_gap = 0.0;
    double worst_deficit = 0.0;
    std::size_t sample_count = 0;
    /// Too few samples or a rank-deficient basis; dropped terms are fixed at 0.
    bool degenerate = false;
    std::vector<std::string> dropped;

    double evaluate(std::span<const double> basis) const;
};

/// Least upper envelope: among coefficient vectors covering every sample,
/// minimise the largest gap between budget and deficit, then minimise
/// c_0, c_1, ... in order. Deterministic and independent of sample order.
/// Throws EmptySamples.
FitResult fit_constants(std::span<const DeficitSample> samples, const BudgetForm& form);

/// Ordinary least squares min ||X b - y||, X row-major rows x cols.
std::vector<double> least_squares(std::span<const double> X, std::size_t rows, std::size_t cols,
                                  std::span<const double> y);

/// Slope of the OLS line y ~ a + b x.
double ols_slope(std::span<const double> x, std::span<const double> y);

namespace detail {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> solution;
    double objective = 0.0;
};

/// min g.v subject to G v >= rhs (G row-major m x q) and v_j >= 0 where
/// nonnegative[j]. Solved through the dual with Bland's rule.
LpResult lp_minimize(std::span<const double> g, std::span<const double> G, std::size_t m,
                     std::span<const double> rhs, const std::vector<bool>& nonnegative);

} // namespace detail

} // namespace heatlab
