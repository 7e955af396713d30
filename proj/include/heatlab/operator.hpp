#pragma once

#include "heatlab/space.hpp"

#include <memory>
#include <span>
#include <vector>

namespace heatlab {

/// Discrete f-Laplacian L = Delta - grad f . grad in divergence form,
///
///   (L u)_i = [w_{i+1/2}(u_{i+1} - u_i) - w_{i-1/2}(u_i - u_{i-1})] / mu_i,
///
/// with face conductances w = e^{-f_face}/h (times |S^{n-1}| r_face^{n-1} on
/// radial spaces). L is self-adjoint in <u, v>_mu = sum u_i v_i mu_i and -L is
/// positive semidefinite; the heat equation is du/dt = L u.
///
/// Neumann walls carry no flux, the radial core r = 0 always reflects, and a
/// Dirichlet wall on a cell face absorbs with conductance e^{-f_face}/(h/2).
class FOperator {
public:
    explicit FOperator(std::shared_ptr<const WeightedSpace> space);

    const WeightedSpace& space() const { return *space_; }
    std::shared_ptr<const WeightedSpace> space_ptr() const { return space_; }
    std::size_t size() const { return diag_.size(); }
    bool periodic() const { return space_->boundary() == BoundaryKind::Periodic; }

    /// Conductance of face k (k = 0..N; on the circle face N joins node N-1 to node 0).
    std::span<const double> conductance() const { return face_w_; }

    /// Symmetric stiffness S with L = M^{-1} S: diagonal and coupling to the next
    /// node. On the circle upper(N-1) couples node N-1 to node 0.
    std::span<const double> stiffness_diagonal() const { return diag_; }
    std::span<const double> stiffness_upper() const { return upper_; }

    std::vector<double> apply(std::span<const double> u) const;
    void apply(std::span<const double> u, std::span<double> out) const;

private:
    std::shared_ptr<const WeightedSpace> space_;
    std::vector<double> face_w_;
    std::vector<double> diag_;
    std::vector<double> upper_;
};

FOperator assemble(const WeightedSpace& space);
FOperator assemble(std::shared_ptr<const WeightedSpace> space);

/// L u, throws LengthMismatch.
std::vector<double> apply(const FOperator& op, std::span<const double> u);

/// <u, v>_mu = sum u_i v_i mu_i.
double weighted_inner(const WeightedSpace& space, std::span<const double> u,
                      std::span<const double> v);

/// Non-conservative stencil u'' - f' u' with centred differences on interior
/// nodes of a line or circle (analytic potentials only). Boundary entries are
/// left at zero. Consistency cross-check for the divergence form only.
std::vector<double> apply_direct_stencil(const WeightedSpace& space, std::span<const double> u);

} // namespace heatlab
