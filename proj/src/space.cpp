#include "heatlab/space.hpp"

#include "heatlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace heatlab {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorCode::InvalidCombination: return "InvalidCombination";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::DegenerateCylinder: return "DegenerateCylinder";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    }
    return "Unknown";
}

std::string to_string(GeometryKind kind) {
    switch (kind) {
    case GeometryKind::Interval: return "interval";
    case GeometryKind::Circle: return "circle";
    case GeometryKind::Radial: return "radial";
    }
    return "unknown";
}

std::string to_string(BoundaryKind kind) {
    switch (kind) {
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Periodic: return "periodic";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec PotentialSpec::linear(double a, double b) {
    PotentialSpec p;
    p.family = Family::Linear;
    p.slope = a;
    p.offset = b;
    return p;
}

PotentialSpec PotentialSpec::quadratic(double c) {
    PotentialSpec p;
    p.family = Family::Quadratic;
    p.curvature = c;
    return p;
}

PotentialSpec PotentialSpec::custom(std::vector<double> values) {
    PotentialSpec p;
    p.family = Family::Custom;
    p.table = std::move(values);
    return p;
}

double PotentialSpec::value(double x) const {
    switch (family) {
    case Family::Zero: return 0.0;
    case Family::Linear: return slope * x + offset;
    case Family::Quadratic: return 0.5 * curvature * x * x + offset;
    case Family::Custom: break;
    }
    throw Error(ErrorCode::InvalidArgument, "tabulated potential has no analytic value");
}

double PotentialSpec::derivative(double x) const {
    switch (family) {
    case Family::Zero: return 0.0;
    case Family::Linear: return slope;
    case Family::Quadratic: return curvature * x;
    case Family::Custom: break;
    }
    throw Error(ErrorCode::InvalidArgument, "tabulated potential has no analytic derivative");
}

double PotentialSpec::second_derivative(double) const {
    switch (family) {
    case Family::Zero: return 0.0;
    case Family::Linear: return 0.0;
    case Family::Quadratic: return curvature;
    case Family::Custom: break;
    }
    throw Error(ErrorCode::InvalidArgument, "tabulated potential has no analytic derivative");
}

PotentialSpec PotentialSpec::negated() const {
    PotentialSpec p = *this;
    p.slope = -slope;
    p.offset = -offset;
    p.curvature = -curvature;
    for (double& v : p.table) v = -v;
    return p;
}

PotentialSpec PotentialSpec::shifted(double c) const {
    PotentialSpec p = *this;
    if (p.family == Family::Zero && c != 0.0) {
        p.family = Family::Linear;
        p.slope = 0.0;
    }
    p.offset += c;
    for (double& v : p.table) v += c;
    return p;
}

std::string PotentialSpec::describe() const {
    switch (family) {
    case Family::Zero: return "zero";
    case Family::Linear: return fmt::format("linear(a={:g},b={:g})", slope, offset);
    case Family::Quadratic:
        return offset == 0.0 ? fmt::format("quadratic(c={:g})", curvature)
                             : fmt::format("quadratic(c={:g},b={:g})", curvature, offset);
    case Family::Custom: return fmt::format("custom(n={})", table.size());
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// SpaceSpec

SpaceSpec SpaceSpec::interval(double lo, double hi, int resolution, PotentialSpec f,
                              BoundaryKind bc) {
    return SpaceSpec{GeometryKind::Interval, 1, lo, hi, resolution, std::move(f), bc};
}

SpaceSpec SpaceSpec::circle(double circumference, int resolution, PotentialSpec f) {
    return SpaceSpec{GeometryKind::Circle, 1, 0.0, circumference, resolution, std::move(f),
                     BoundaryKind::Periodic};
}

SpaceSpec SpaceSpec::radial(int dim, double radius, int resolution, PotentialSpec f,
                            BoundaryKind bc) {
    return SpaceSpec{GeometryKind::Radial, dim, 0.0, radius, resolution, std::move(f), bc};
}

SpaceSpec SpaceSpec::refined(int factor) const {
    SpaceSpec s = *this;
    s.resolution = resolution * factor;
    if (potential.family == PotentialSpec::Family::Custom) {
        // Linear interpolation of the table onto the finer nodes.
        const double hc = spacing();
        const double hf = hc / factor;
        const double base = kind == GeometryKind::Radial ? 0.0 : lo;
        std::vector<double> fine(static_cast<std::size_t>(s.resolution));
        const auto n = static_cast<double>(potential.table.size());
        for (std::size_t i = 0; i < fine.size(); ++i) {
            const double x = base + (static_cast<double>(i) + 0.5) * hf;
            double pos = (x - base) / hc - 0.5;
            pos = std::clamp(pos, 0.0, n - 1.0);
            auto k = static_cast<std::size_t>(pos);
            if (k + 1 >= potential.table.size()) k = potential.table.size() - 2;
            const double w = pos - static_cast<double>(k);
            fine[i] = (1.0 - w) * potential.table[k] + w * potential.table[k + 1];
        }
        s.potential.table = std::move(fine);
    }
    return s;
}

SpaceSpec SpaceSpec::widened(double factor) const {
    SpaceSpec s = *this;
    if (potential.family == PotentialSpec::Family::Custom)
        throw Error(ErrorCode::InvalidArgument, "cannot widen a space with a tabulated potential");
    const double new_res = resolution * factor;
    s.resolution = static_cast<int>(std::lround(new_res));
    if (kind == GeometryKind::Radial) {
        s.hi = hi * factor;
    } else {
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo) * factor;
        s.lo = kind == GeometryKind::Circle ? 0.0 : mid - half;
        s.hi = kind == GeometryKind::Circle ? (hi - lo) * factor : mid + half;
    }
    return s;
}

SpaceSpec SpaceSpec::with_boundary(BoundaryKind bc) const {
    SpaceSpec s = *this;
    s.boundary = bc;
    return s;
}

// ---------------------------------------------------------------------------
// WeightedSpace

namespace {

void validate(const SpaceSpec& spec) {
    if (spec.resolution < 8)
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("resolution {} < 8", spec.resolution));
    if (!(spec.extent() > 0.0) || !std::isfinite(spec.extent()))
        throw Error(ErrorCode::InvalidArgument, "extent must be positive and finite");
    switch (spec.kind) {
    case GeometryKind::Interval:
        if (spec.dim != 1) throw Error(ErrorCode::InvalidCombination, "interval requires dim 1");
        if (spec.boundary == BoundaryKind::Periodic)
            throw Error(ErrorCode::InvalidCombination, "periodic boundary needs a circle");
        break;
    case GeometryKind::Circle:
        if (spec.dim != 1) throw Error(ErrorCode::InvalidCombination, "circle requires dim 1");
        if (spec.boundary != BoundaryKind::Periodic)
            throw Error(ErrorCode::InvalidCombination, "circle requires periodic boundary");
        break;
    case GeometryKind::Radial:
        if (spec.dim < 2) throw Error(ErrorCode::InvalidCombination, "radial requires dim >= 2");
        if (spec.boundary == BoundaryKind::Periodic)
            throw Error(ErrorCode::InvalidCombination, "periodic boundary needs a circle");
        break;
    }
    if (spec.potential.family == PotentialSpec::Family::Custom &&
        spec.potential.table.size() != static_cast<std::size_t>(spec.resolution))
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("custom potential has {} values for {} nodes",
                                spec.potential.table.size(), spec.resolution));
}

} // namespace

WeightedSpace::WeightedSpace(const SpaceSpec& spec) : spec_(spec) {
    validate(spec_);
    const auto n = static_cast<std::size_t>(spec_.resolution);
    lo_ = spec_.kind == GeometryKind::Radial ? 0.0 : spec_.lo;
    h_ = spec_.spacing();

    nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) nodes_[i] = lo_ + (static_cast<double>(i) + 0.5) * h_;

    const PotentialSpec& pot = spec_.potential;
    f_nodes_.resize(n);
    f_faces_.resize(n + 1);
    if (pot.analytic()) {
        for (std::size_t i = 0; i < n; ++i) f_nodes_[i] = pot.value(nodes_[i]);
        for (std::size_t k = 0; k <= n; ++k) f_faces_[k] = pot.value(face_position(k));
    } else {
        f_nodes_ = pot.table;
        for (std::size_t k = 1; k < n; ++k) f_faces_[k] = 0.5 * (f_nodes_[k - 1] + f_nodes_[k]);
        if (spec_.kind == GeometryKind::Circle) {
            f_faces_[0] = f_faces_[n] = 0.5 * (f_nodes_[n - 1] + f_nodes_[0]);
        } else {
            f_faces_[0] = 1.5 * f_nodes_[0] - 0.5 * f_nodes_[1];
            f_faces_[n] = 1.5 * f_nodes_[n - 1] - 0.5 * f_nodes_[n - 2];
        }
    }
    if (spec_.kind == GeometryKind::Circle) {
        const double a = f_faces_[0];
        const double b = f_faces_[n];
        if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
            throw Error(ErrorCode::InvalidCombination, "potential is not single-valued on the circle");
    }

    mu_.resize(n);
    const double sphere =
        spec_.kind == GeometryKind::Radial ? unit_sphere_area(static_cast<double>(spec_.dim)) : 1.0;
    total_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = std::exp(-f_nodes_[i]) * h_;
        if (spec_.kind == GeometryKind::Radial) w *= sphere * std::pow(nodes_[i], spec_.dim - 1);
        if (!(w > 0.0) || !std::isfinite(w))
            throw Error(ErrorCode::NonPositiveMeasure,
                        fmt::format("cell {} has measure {} (f = {})", i, w, f_nodes_[i]));
        mu_[i] = w;
        total_ += w;
    }
    if (!std::isfinite(total_))
        throw Error(ErrorCode::NonPositiveMeasure, "total measure overflows");
}

WeightedSpace build_space(const SpaceSpec& spec) { return WeightedSpace(spec); }

double WeightedSpace::distance(std::size_t i, std::size_t j) const {
    const double d = std::abs(nodes_[i] - nodes_[j]);
    if (spec_.kind == GeometryKind::Circle) {
        const double circumference = spec_.extent();
        return std::min(d, circumference - d);
    }
    return d;
}

double WeightedSpace::diameter() const {
    switch (spec_.kind) {
    case GeometryKind::Interval: return spec_.extent();
    case GeometryKind::Circle: return 0.5 * spec_.extent();
    case GeometryKind::Radial: return 2.0 * spec_.extent();
    }
    return spec_.extent();
}

std::size_t WeightedSpace::nearest_node(double position) const {
    const double idx = std::floor((position - lo_) / h_);
    const auto last = static_cast<double>(size() - 1);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, last));
}

std::vector<std::size_t> WeightedSpace::ball_nodes(std::size_t center, double radius) const {
    std::vector<std::size_t> out;
    const double r = radius * (1.0 + 1e-12) + 1e-14 * h_;
    for (std::size_t j = 0; j < size(); ++j)
        if (distance(center, j) <= r) out.push_back(j);
    return out;
}

// Fraction of cell i covered by [a, b] (positions on the line, radius for
// radial spaces, where the fraction is r^{n-1}-weighted).
double WeightedSpace::cell_fraction(std::size_t i, double a, double b) const {
    const double c0 = face_position(i);
    const double c1 = face_position(i + 1);
    const double lo = std::max(a, c0);
    const double hi = std::min(b, c1);
    if (hi <= lo) return 0.0;
    if (spec_.kind != GeometryKind::Radial) return (hi - lo) / h_;
    const double n = spec_.dim;
    return (std::pow(hi, n) - std::pow(lo, n)) / (std::pow(c1, n) - std::pow(c0, n));
}

BallVolume ball_volume(const WeightedSpace& space, std::size_t center, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
    const double c = space.node(center);
    const auto n = space.size();
    const auto mu = space.measure();
    BallVolume out;

    if (space.kind() == GeometryKind::Circle) {
        const double circumference = space.spec().extent();
        if (2.0 * radius >= circumference) {
            out.value = space.total_measure();
            return out;
        }
        // Unwrap the arc [c - radius, c + radius] into at most two pieces.
        double sum = 0.0;
        for (double shift : {-circumference, 0.0, circumference}) {
            const double a = c - radius + shift;
            const double b = c + radius + shift;
            if (b <= space.lo() || a >= space.lo() + circumference) continue;
            for (std::size_t i = 0; i < n; ++i) sum += mu[i] * space.cell_fraction(i, a, b);
        }
        out.value = sum;
        return out;
    }

    const double a = c - radius;
    const double b = c + radius;
    const double domain_lo = space.lo();
    const double domain_hi = space.lo() + space.spec().extent();
    out.clipped = b > domain_hi * (1.0 + 1e-14) + 1e-14 ||
                  (space.kind() == GeometryKind::Interval && a < domain_lo - 1e-14 * (1.0 + std::abs(domain_lo)));
    const double a_eff = std::max(a, domain_lo);
    const double b_eff = std::min(b, domain_hi);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = space.cell_fraction(i, a_eff, b_eff);
        if (frac > 0.0) sum += mu[i] * frac;
    }
    out.value = sum;
    return out;
}

namespace {

bool ball_is_clipped(const WeightedSpace& space, std::size_t center, double radius) {
    if (space.kind() == GeometryKind::Circle) return false;
    const double c = space.node(center);
    const double domain_hi = space.lo() + space.spec().extent();
    if (c + radius > domain_hi + 1e-12) return true;
    return space.kind() == GeometryKind::Interval && c - radius < space.lo() - 1e-12;
}

double centred_derivative(const WeightedSpace& space, std::size_t i) {
    const auto f = space.potential();
    const auto n = space.size();
    const double h = space.h();
    if (space.kind() == GeometryKind::Circle) {
        return (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h);
    }
    if (i == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    if (i == n - 1) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return (f[i + 1] - f[i - 1]) / (2.0 * h);
}

} // namespace

SupResult sup_abs_potential(const WeightedSpace& space, std::size_t center, double radius) {
    SupResult out;
    out.clipped = ball_is_clipped(space, center, radius);
    const auto f = space.potential();
    for (std::size_t j : space.ball_nodes(center, radius)) out.value = std::max(out.value, std::abs(f[j]));
    return out;
}

SupResult sup_abs_gradient(const WeightedSpace& space, std::size_t center, double radius) {
    SupResult out;
    out.clipped = ball_is_clipped(space, center, radius);
    for (std::size_t j : space.ball_nodes(center, radius))
        out.value = std::max(out.value, std::abs(centred_derivative(space, j)));
    return out;
}

PotentialStats potential_stats(const WeightedSpace& space, std::size_t center, double R) {
    if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");
    const auto a = sup_abs_potential(space, center, 3.0 * R);
    const auto ap = sup_abs_gradient(space, center, 3.0 * R);
    return PotentialStats{a.value, ap.value, a.clipped};
}

CurvatureProfile curvature_profile(const WeightedSpace& space) {
    const auto f = space.potential();
    const auto n = space.size();
    const double h2 = space.h() * space.h();
    CurvatureProfile out;
    out.ricf.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (space.kind() == GeometryKind::Circle) {
            out.ricf[i] = (f[(i + 1) % n] - 2.0 * f[i] + f[(i + n - 1) % n]) / h2;
        } else if (i == 0) {
            out.ricf[i] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        } else if (i == n - 1) {
            out.ricf[i] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
        } else {
            out.ricf[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
        }
    }
    const double lowest = *std::min_element(out.ricf.begin(), out.ricf.end());
    // Differences of exactly linear data leave round-off of order eps |f| / h^2.
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale) / h2;
    out.kappa = lowest < -noise ? -lowest : 0.0;
    return out;
}

double unit_ball_volume(double m) {
    return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

double unit_sphere_area(double n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

ModelVolumeBounds model_volume_bounds(double m, double K, double r) {
    if (!(m >= 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("model dimension {} < 1", m));
    if (!(K >= 0.0)) throw Error(ErrorCode::InvalidArgument, "K must be nonnegative");
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    const double base = unit_ball_volume(m) * std::pow(r, m);
    return {base, base * std::exp((m - 1.0) * std::sqrt(K) * r)};
}

double model_ball_volume(double m, double K, double r) {
    if (!(m >= 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("model dimension {} < 1", m));
    if (r <= 0.0) return 0.0;
    const double wm = unit_ball_volume(m);
    if (K == 0.0) return wm * std::pow(r, m);
    const double k = std::sqrt(K);
    // V = m omega_m int_0^r (sinh(k s)/k)^{m-1} ds, integrated as r^m * int_0^1 of a bounded profile.
    auto integrand = [&](double u) {
        const double s = u * r;
        const double ratio = s == 0.0 ? 1.0 : std::sinh(k * s) / (k * s);
        return std::pow(u, m - 1.0) * std::pow(ratio, m - 1.0);
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-14);
    return m * wm * std::pow(r, m) * integral;
}

} // namespace heatlab
