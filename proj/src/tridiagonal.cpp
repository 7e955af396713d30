#include "tridiagonal.hpp"

#include "heatlab/error.hpp"

#include <cmath>

namespace heatlab::detail {

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0);
    std::vector<double> x(rhs.begin(), rhs.end());
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot))
        throw Error(ErrorCode::LinearSolveFailure, "zero pivot in tridiagonal solve");
    if (n > 1) c[0] = upper[0] / pivot;
    x[0] /= pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw Error(ErrorCode::LinearSolveFailure, "zero pivot in tridiagonal solve");
        if (i + 1 < n) c[i] = upper[i] / pivot;
        x[i] = (x[i] - lower[i - 1] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

std::vector<double> solve_cyclic_symmetric(std::span<const double> diag,
                                           std::span<const double> off, double corner,
                                           std::span<const double> rhs) {
    // Sherman-Morrison: A = T + u v^T with u = (gamma, 0.., corner),
    // v = (1, 0.., corner / gamma).
    const std::size_t n = diag.size();
    const double gamma = -diag[0];
    std::vector<double> d(diag.begin(), diag.end());
    d[0] -= gamma;
    d[n - 1] -= corner * corner / gamma;
    std::vector<double> y = solve_tridiagonal(off, d, off, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner;
    std::vector<double> z = solve_tridiagonal(off, d, off, u);
    const double vy = y[0] + corner / gamma * y[n - 1];
    const double vz = z[0] + corner / gamma * z[n - 1];
    const double factor = vy / (1.0 + vz);
    for (std::size_t i = 0; i < n; ++i) y[i] -= factor * z[i];
    return y;
}

} // namespace heatlab::detail
