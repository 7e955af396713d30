#pragma once

#include "heatlab/operator.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace heatlab {

struct SpectralConfig {
    std::size_t max_nodes = 8192;
};

/// Eigenpairs of -L, eigenvectors orthonormal in <.,.>_mu.
///
/// Eigenvectors are stored node-major, phi(i, k) = vectors[i * N + k], so a
/// kernel value is a dot product of two contiguous rows. Each eigenvector is
/// signed so that its first non-negligible component is positive.
class SpectralData {
public:
    SpectralData(std::shared_ptr<const WeightedSpace> space, std::vector<double> eigenvalues,
                 std::vector<double> vectors);

    const WeightedSpace& space() const { return *space_; }
    std::shared_ptr<const WeightedSpace> space_ptr() const { return space_; }
    std::size_t size() const { return eigenvalues_.size(); }

    std::span<const double> eigenvalues() const { return eigenvalues_; }
    double eigenvalue(std::size_t k) const { return eigenvalues_[k]; }
    double phi(std::size_t node, std::size_t mode) const { return vectors_[node * size() + mode]; }
    std::span<const double> row(std::size_t node) const {
        return {vectors_.data() + node * size(), size()};
    }
    std::vector<double> eigenvector(std::size_t mode) const;

    /// True when the constant mode is present (Neumann or periodic).
    bool conservative() const { return space_->boundary() != BoundaryKind::Dirichlet; }
    /// Smallest nonzero eigenvalue (Neumann/periodic) or lambda_0 (Dirichlet).
    double lambda1_bottom() const;
    /// Bottom of the spectrum: 0 for conservative spaces, lambda_0 otherwise.
    double bottom_of_spectrum() const;

private:
    std::shared_ptr<const WeightedSpace> space_;
    std::vector<double> eigenvalues_;
    std::vector<double> vectors_;
};

/// Full eigendecomposition through the symmetric matrix M^{-1/2}(-S)M^{-1/2}
/// (tridiagonal, or cyclic on the circle). Throws ConvergenceFailure.
SpectralData decompose(const FOperator& op, const SpectralConfig& config = {});

/// H(x, y, t) = sum_k e^{-lambda_k t} phi_k(x) phi_k(y). As t -> 0 the kernel
/// tends to delta_{xy} / mu_y.
double heat_kernel(const SpectralData& spec, std::size_t x, std::size_t y, double t);

/// P_t u0 = sum_k e^{-lambda_k t} <u0, phi_k>_mu phi_k.
std::vector<double> semigroup_apply(const SpectralData& spec, std::span<const double> u0, double t);

struct GreenValue {
    double value = 0.0;
    bool divergent = false;
};

/// G(x, y) = sum_k phi_k(x) phi_k(y) / lambda_k. Spaces with a constant mode
/// have no Green's function and report `divergent` instead of throwing.
GreenValue green_function(const SpectralData& spec, std::size_t x, std::size_t y);

/// Dirichlet G plus the exact contribution of the region beyond the absorbing
/// wall(s), computed from the scale function s' = e^{f} / |S^{n-1}| r^{n-1}.
/// Emulates the minimal Green's function of the untruncated space; divergent
/// when an end is recurrent. Analytic potentials only.
GreenValue green_function_far_field(const SpectralData& spec, std::size_t x, std::size_t y);

struct GreenQuadrature {
    double value = 0.0;       // int_0^T H dt
    double tail_bound = 0.0;  // e^{-lambda_0 T} / lambda_0 / sqrt(mu_x mu_y)
};

/// Time-quadrature route to G, truncated at T with an explicit tail bound.
GreenQuadrature green_function_time_quadrature(const SpectralData& spec, std::size_t x,
                                               std::size_t y, double T);

/// Column G(., y) from one tridiagonal solve -S g = e_y (Dirichlet only).
std::vector<double> green_function_direct(const FOperator& op, std::size_t y);

/// Trapezoidal implicit stepping of du/dt = L u, steps of t / steps.
std::vector<double> crank_nicolson_evolve(const FOperator& op, std::span<const double> u0,
                                          double t, int steps);

struct KernelSample {
    std::size_t x = 0;
    std::size_t y = 0;
    double t = 0.0;
    double H = 0.0;
    double d = 0.0;
    double Vx = 0.0;  // V_f(B_x(sqrt t))
    double Vy = 0.0;
    double A = 0.0;
    double Aprime = 0.0;
    double kappa = 0.0;
    bool clipped = false;
};

/// Which (x, y, t) to evaluate. Positions are snapped to the nearest node.
/// `triples` are evaluated as given; otherwise the cartesian product xs * ys * ts.
/// A and A' are taken over B_o(3R); R <= 0 picks the smallest R with
/// x, y in B_o(R/2) and t < R^2/4 over the whole plan.
struct SamplePlan {
    struct Triple {
        double x;
        double y;
        double t;
    };
    std::vector<Triple> triples;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ts;
    double origin = 0.0;
    double R = 0.0;
    /// Evaluations need t >= min_time_factor * h^2.
    double min_time_factor = 4.0;
    /// Skip pairs with d^2/(4t) above this (round-off floor of the spectral sum).
    double max_gaussian_exponent = 20.0;
    /// Skip pairs the grid cannot resolve: the three-point stencil's relative
    /// error at the Gaussian saddle is about d^4 h^2 / (192 t^3).
    double max_dispersion = 1e-2;
    /// Grid spacing used by both guards; 0 means the space's own h. Setting the
    /// coarse h keeps the sample set fixed across a refinement study.
    double guard_spacing = 0.0;
};

struct SampleGrid {
    std::vector<KernelSample> samples;
    std::size_t skipped = 0;
    double R = 0.0;
};

SampleGrid kernel_sample_grid(const SpectralData& spec, const SamplePlan& plan);

} // namespace heatlab
