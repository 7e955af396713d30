#include "heatlab/oracle.hpp"

#include "heatlab/error.hpp"

#include <cmath>
#include <numbers>

namespace heatlab::oracle {

namespace {

void require_positive_time(double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel needs t > 0");
}

} // namespace

double linear_potential_kernel_1d(double x, double y, double t, double a, double b) {
    require_positive_time(t);
    const double d = x - y;
    const double exponent = 0.5 * a * (x + y) + b - 0.25 * a * a * t - d * d / (4.0 * t);
    return std::exp(exponent) / std::sqrt(4.0 * std::numbers::pi * t);
}

double soliton_kernel_1d(double x, double y, double t, int sign) {
    if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "soliton sign must be +1 or -1");
    return linear_potential_kernel_1d(x, y, t, static_cast<double>(sign));
}

double product_soliton_kernel(std::span<const double> x, std::span<const double> y, double t,
                              const SolitonSpec& spec) {
    if (x.size() != spec.u.size() || y.size() != spec.u.size())
        throw Error(ErrorCode::LengthMismatch, "soliton dimension mismatch");
    double value = std::exp(spec.v);
    for (std::size_t i = 0; i < x.size(); ++i)
        value *= linear_potential_kernel_1d(x[i], y[i], t, spec.u[i]);
    return value;
}

double euclidean_kernel(double d, double t, int n) {
    require_positive_time(t);
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-d * d / (4.0 * t));
}

double quadratic_potential_kernel_1d(double x, double y, double t, double c) {
    require_positive_time(t);
    // Ornstein-Uhlenbeck transition density divided by the target weight e^{-f(y)}.
    const double var = c == 0.0 ? 2.0 * t : -std::expm1(-2.0 * c * t) / c;
    const double m = x * std::exp(-c * t);
    const double z = y - m;
    return std::exp(-z * z / (2.0 * var) + 0.5 * c * y * y) / std::sqrt(2.0 * std::numbers::pi * var);
}

double interval_image_kernel(double x, double y, double t, double lo, double hi, BoundaryKind bc) {
    require_positive_time(t);
    if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "interval needs hi > lo");
    if (bc == BoundaryKind::Periodic) throw Error(ErrorCode::InvalidCombination, "periodic interval");
    const double L = hi - lo;
    const int K = static_cast<int>(std::ceil(12.0 * std::sqrt(t) / L)) + 2;
    const double sign = bc == BoundaryKind::Dirichlet ? -1.0 : 1.0;
    double sum = 0.0;
    for (int k = -K; k <= K; ++k) {
        sum += euclidean_kernel(x - y + 2.0 * k * L, t, 1);
        sum += sign * euclidean_kernel(x + y - 2.0 * lo + 2.0 * k * L, t, 1);
    }
    return sum;
}

double circle_kernel(double x, double y, double t, double circumference) {
    require_positive_time(t);
    if (!(circumference > 0.0)) throw Error(ErrorCode::InvalidArgument, "circumference must be positive");
    const int K = static_cast<int>(std::ceil(12.0 * std::sqrt(t) / circumference)) + 2;
    double sum = 0.0;
    for (int k = -K; k <= K; ++k) sum += euclidean_kernel(x - y + k * circumference, t, 1);
    return sum;
}

double radial3_kernel(double r, double s, double t) {
    require_positive_time(t);
    if (r < 0.0 || s < 0.0) throw Error(ErrorCode::InvalidArgument, "radii must be nonnegative");
    const double a = r * s / t;
    const double mean = a > 0.0 ? -std::expm1(-a) / a : 1.0;
    return euclidean_kernel(r - s, t, 3) * mean;
}

std::optional<double> closed_form_kernel(const SpaceSpec& spec, double x, double y, double t) {
    using Family = PotentialSpec::Family;
    const PotentialSpec& f = spec.potential;
    switch (spec.kind) {
    case GeometryKind::Circle:
        if (f.family == Family::Zero) return circle_kernel(x, y, t, spec.extent());
        if (f.family == Family::Linear && f.slope == 0.0) return std::exp(f.offset) * circle_kernel(x, y, t, spec.extent());
        return std::nullopt;
    case GeometryKind::Interval:
        if (f.family == Family::Zero) return interval_image_kernel(x, y, t, spec.lo, spec.hi, spec.boundary);
        if (f.family == Family::Linear) return linear_potential_kernel_1d(x, y, t, f.slope, f.offset);
        if (f.family == Family::Quadratic) return quadratic_potential_kernel_1d(x, y, t, f.curvature);
        return std::nullopt;
    case GeometryKind::Radial:
        if (spec.dim == 3 && f.family == Family::Zero) return radial3_kernel(x, y, t);
        return std::nullopt;
    }
    return std::nullopt;
}

double interval_neumann_spectrum(double length, int k) {
    if (!(length > 0.0) || k < 0) throw Error(ErrorCode::InvalidArgument, "need L > 0 and k >= 0");
    const double root = std::numbers::pi * k / length;
    return root * root;
}

} // namespace heatlab::oracle
