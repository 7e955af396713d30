#pragma once

#include "heatlab/space.hpp"

#include <optional>
#include <span>
#include <vector>

namespace heatlab::oracle {

/// Steady Gaussian soliton on R^k: f(x) = <u, x> + v.
struct SolitonSpec {
    std::vector<double> u;
    double v = 0.0;
};

/// Kernel of the 1-D steady soliton f(x) = sign * x with respect to e^{-f} dx:
/// e^{sign (x+y)/2} e^{-t/4} (4 pi t)^{-1/2} exp(-|x-y|^2 / 4t).
double soliton_kernel_1d(double x, double y, double t, int sign);

/// Kernel for f(x) = a x + b on the line: e^{a(x+y)/2 + b} e^{-a^2 t/4} (4 pi t)^{-1/2}
/// exp(-|x-y|^2/4t). The e^{b} factor keeps int H e^{-f} dy = 1.
double linear_potential_kernel_1d(double x, double y, double t, double a, double b = 0.0);

/// Product of 1-D factors, one per coordinate with potential u_i x_i (the
/// offset v enters once as e^{v}).
double product_soliton_kernel(std::span<const double> x, std::span<const double> y, double t,
                              const SolitonSpec& spec);

/// (4 pi t)^{-n/2} exp(-d^2 / 4t).
double euclidean_kernel(double d, double t, int n);

/// Mehler kernel for f(x) = c x^2 / 2 on the line (any sign of c).
double quadratic_potential_kernel_1d(double x, double y, double t, double c);

/// Flat kernel on [lo, hi] by the method of images; Dirichlet walls flip the
/// sign of the reflected images.
double interval_image_kernel(double x, double y, double t, double lo, double hi, BoundaryKind bc);

/// Flat kernel on a circle of the given circumference (periodized Gaussian).
double circle_kernel(double x, double y, double t, double circumference);

/// Spherical mean of the 3-D Euclidean kernel between radii r and s.
double radial3_kernel(double r, double s, double t);

/// Closed form for the continuum version of a discretized space, when one is
/// known. Truncated families (linear/quadratic potentials, radial) use the
/// untruncated formula and are only accurate away from the walls.
std::optional<double> closed_form_kernel(const SpaceSpec& spec, double x, double y, double t);

/// Neumann eigenvalue (pi k / L)^2 of -d^2/dx^2 on an interval of length L.
double interval_neumann_spectrum(double length, int k);

} // namespace heatlab::oracle
