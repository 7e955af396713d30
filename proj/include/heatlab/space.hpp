#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace heatlab {

enum class GeometryKind { Interval, Circle, Radial };
enum class BoundaryKind { Neumann, Dirichlet, Periodic };

std::string to_string(GeometryKind kind);
std::string to_string(BoundaryKind kind);

/// Potential f sampled on the grid. Linear is f = a x + b, Quadratic is
/// f = c x^2 / 2 (x is the radius on radial spaces). Custom holds one value per
/// node and is linearly interpolated onto cell faces.
struct PotentialSpec {
    enum class Family { Zero, Linear, Quadratic, Custom };

    Family family = Family::Zero;
    double slope = 0.0;
    double offset = 0.0;
    double curvature = 0.0;
    std::vector<double> table;

    static PotentialSpec zero() { return {}; }
    static PotentialSpec linear(double a, double b = 0.0);
    static PotentialSpec quadratic(double c);
    static PotentialSpec custom(std::vector<double> values);

    bool analytic() const { return family != Family::Custom; }
    /// Analytic families only.
    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    /// Same family with f replaced by -f.
    PotentialSpec negated() const;
    /// Same family with f replaced by f + c.
    PotentialSpec shifted(double c) const;

    std::string describe() const;
};

/// Everything needed to rebuild a space. Interval spans [lo, hi]; Circle has
/// circumference hi - lo; Radial covers radii [0, hi] (lo is ignored).
struct SpaceSpec {
    GeometryKind kind = GeometryKind::Interval;
    int dim = 1;
    double lo = 0.0;
    double hi = 1.0;
    int resolution = 64;
    PotentialSpec potential;
    BoundaryKind boundary = BoundaryKind::Neumann;

    static SpaceSpec interval(double lo, double hi, int resolution, PotentialSpec f,
                              BoundaryKind bc = BoundaryKind::Neumann);
    static SpaceSpec circle(double circumference, int resolution, PotentialSpec f = {});
    static SpaceSpec radial(int dim, double radius, int resolution, PotentialSpec f,
                            BoundaryKind bc = BoundaryKind::Neumann);

    double extent() const { return hi - (kind == GeometryKind::Radial ? 0.0 : lo); }
    double spacing() const { return extent() / resolution; }

    /// Same geometry with the cell count multiplied by `factor` (h -> h / factor).
    SpaceSpec refined(int factor = 2) const;
    /// Extent multiplied by `factor` around the same centre, same h.
    SpaceSpec widened(double factor) const;
    SpaceSpec with_boundary(BoundaryKind bc) const;
};

struct BallVolume {
    double value = 0.0;
    bool clipped = false;
};

struct SupResult {
    double value = 0.0;
    bool clipped = false;
};

/// Cell-centred discretization of a smooth metric measure space
/// (M, g, e^{-f} dv). Immutable after construction.
///
/// Nodes sit at cell midpoints x_i = lo + (i + 1/2) h. Cell measures are
/// mu_i = e^{-f_i} h on the line and circle and mu_i = |S^{n-1}| r_i^{n-1} e^{-f_i} h
/// on radial spaces. Faces are k = 0..N at lo + k h; on the circle face N is
/// face 0.
class WeightedSpace {
public:
    explicit WeightedSpace(const SpaceSpec& spec);

    const SpaceSpec& spec() const { return spec_; }
    GeometryKind kind() const { return spec_.kind; }
    BoundaryKind boundary() const { return spec_.boundary; }
    int dim() const { return spec_.dim; }
    std::size_t size() const { return nodes_.size(); }
    double h() const { return h_; }
    double lo() const { return lo_; }
    double hi() const { return spec_.hi; }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> potential() const { return f_nodes_; }
    std::span<const double> face_potential() const { return f_faces_; }
    std::span<const double> measure() const { return mu_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double face_position(std::size_t k) const { return lo_ + static_cast<double>(k) * h_; }
    double total_measure() const { return total_; }

    /// Arclength: |x - y| on the interval, shorter arc on the circle, |r - r'| radially.
    double distance(std::size_t i, std::size_t j) const;
    double diameter() const;
    std::size_t nearest_node(double position) const;
    /// Nodes with distance(center, .) <= radius.
    std::vector<std::size_t> ball_nodes(std::size_t center, double radius) const;

private:
    double cell_fraction(std::size_t i, double a, double b) const;
    friend BallVolume ball_volume(const WeightedSpace&, std::size_t, double);

    SpaceSpec spec_;
    double h_ = 0.0;
    double lo_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> f_nodes_;
    std::vector<double> f_faces_;
    std::vector<double> mu_;
    double total_ = 0.0;
};

WeightedSpace build_space(const SpaceSpec& spec);

/// V_f(B_center(radius)). Cells count with their overlap fraction, so a ball
/// covering the whole domain returns sum(mu) exactly and flat volumes are exact.
BallVolume ball_volume(const WeightedSpace& space, std::size_t center, double radius);

/// sup |f| and sup |f'| (centred differences) over nodes within `radius`.
SupResult sup_abs_potential(const WeightedSpace& space, std::size_t center, double radius);
SupResult sup_abs_gradient(const WeightedSpace& space, std::size_t center, double radius);

struct PotentialStats {
    double A = 0.0;       // sup |f| over B(3R)
    double Aprime = 0.0;  // sup |grad f| over B(3R)
    bool clipped = false;
};

PotentialStats potential_stats(const WeightedSpace& space, std::size_t center, double R);

struct CurvatureProfile {
    std::vector<double> ricf;
    double kappa = 0.0;  // max(0, -min ricf)
};

CurvatureProfile curvature_profile(const WeightedSpace& space);

struct ModelVolumeBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// omega_m r^m <= V_K^m(r) <= omega_m r^m e^{(m-1) sqrt(K) r}, m real >= 1.
ModelVolumeBounds model_volume_bounds(double m, double K, double r);

/// Volume of the unit ball in R^m, m real.
double unit_ball_volume(double m);
/// Area of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(double n);
/// Exact ball volume in the m-dimensional model space of curvature -K.
double model_ball_volume(double m, double K, double r);

} // namespace heatlab
