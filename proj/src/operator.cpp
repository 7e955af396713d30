#include "heatlab/operator.hpp"

#include "heatlab/error.hpp"

#include <cmath>

#include <fmt/format.h>

namespace heatlab {

FOperator::FOperator(std::shared_ptr<const WeightedSpace> space) : space_(std::move(space)) {
    const WeightedSpace& s = *space_;
    const std::size_t n = s.size();
    const double h = s.h();
    const auto ff = s.face_potential();
    const bool radial = s.kind() == GeometryKind::Radial;
    const double sphere = radial ? unit_sphere_area(static_cast<double>(s.dim())) : 1.0;

    auto area = [&](std::size_t k) {
        return radial ? sphere * std::pow(s.face_position(k), s.dim() - 1) : 1.0;
    };

    face_w_.assign(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) face_w_[k] = area(k) * std::exp(-ff[k]) / h;

    switch (s.boundary()) {
    case BoundaryKind::Periodic:
        face_w_[n] = std::exp(-ff[n]) / h;
        face_w_[0] = face_w_[n];
        break;
    case BoundaryKind::Neumann:
        break;
    case BoundaryKind::Dirichlet:
        // The wall sits half a cell from the outermost node.
        face_w_[n] = area(n) * std::exp(-ff[n]) / (0.5 * h);
        if (!radial) face_w_[0] = std::exp(-ff[0]) / (0.5 * h);
        break;
    }

    diag_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) upper_[i] = face_w_[i + 1];
    if (periodic()) upper_[n - 1] = face_w_[n];
    for (std::size_t i = 0; i < n; ++i) diag_[i] = -(face_w_[i] + face_w_[i + 1]);
}

void FOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = size();
    if (u.size() != n || out.size() != n)
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("operator of size {} applied to vector of size {}", n, u.size()));
    const auto mu = space_->measure();
    for (std::size_t i = 0; i < n; ++i) {
        double flux = diag_[i] * u[i];
        if (i + 1 < n) flux += upper_[i] * u[i + 1];
        if (i > 0) flux += upper_[i - 1] * u[i - 1];
        if (periodic()) {
            if (i == 0) flux += upper_[n - 1] * u[n - 1];
            if (i == n - 1) flux += upper_[n - 1] * u[0];
        }
        out[i] = flux / mu[i];
    }
}

std::vector<double> FOperator::apply(std::span<const double> u) const {
    std::vector<double> out(size());
    apply(u, out);
    return out;
}

FOperator assemble(std::shared_ptr<const WeightedSpace> space) { return FOperator(std::move(space)); }

FOperator assemble(const WeightedSpace& space) {
    return FOperator(std::make_shared<const WeightedSpace>(space));
}

std::vector<double> apply(const FOperator& op, std::span<const double> u) { return op.apply(u); }

double weighted_inner(const WeightedSpace& space, std::span<const double> u,
                      std::span<const double> v) {
    const auto mu = space.measure();
    if (u.size() != mu.size() || v.size() != mu.size())
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("inner product of sizes {} and {} on {} nodes", u.size(), v.size(),
                                mu.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) sum += u[i] * v[i] * mu[i];
    return sum;
}

std::vector<double> apply_direct_stencil(const WeightedSpace& space, std::span<const double> u) {
    if (space.kind() == GeometryKind::Radial)
        throw Error(ErrorCode::InvalidArgument, "direct stencil is only defined on the line and circle");
    const std::size_t n = space.size();
    if (u.size() != n) throw Error(ErrorCode::LengthMismatch, "direct stencil input size");
    const PotentialSpec& pot = space.spec().potential;
    const double h = space.h();
    std::vector<double> out(n, 0.0);
    const bool wrap = space.kind() == GeometryKind::Circle;
    for (std::size_t i = 0; i < n; ++i) {
        if (!wrap && (i == 0 || i == n - 1)) continue;
        const double up = u[(i + 1) % n];
        const double down = u[(i + n - 1) % n];
        const double df = pot.derivative(space.node(i));
        out[i] = (up - 2.0 * u[i] + down) / (h * h) - df * (up - down) / (2.0 * h);
    }
    return out;
}

} // namespace heatlab
