#include "heatlab/spectral.hpp"

#include "heatlab/error.hpp"
#include "heatlab/kernels.hpp"
#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <lapacke.h>

namespace heatlab {

SpectralData::SpectralData(std::shared_ptr<const WeightedSpace> space, std::vector<double> eigenvalues,
                           std::vector<double> vectors)
    : space_(std::move(space)), eigenvalues_(std::move(eigenvalues)), vectors_(std::move(vectors)) {}

std::vector<double> SpectralData::eigenvector(std::size_t mode) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = phi(i, mode);
    return out;
}

double SpectralData::lambda1_bottom() const {
    if (!conservative()) return eigenvalues_.front();
    return eigenvalues_.size() > 1 ? eigenvalues_[1] : 0.0;
}

double SpectralData::bottom_of_spectrum() const {
    return conservative() ? 0.0 : std::max(eigenvalues_.front(), 0.0);
}

SpectralData decompose(const FOperator& op, const SpectralConfig& config) {
    const std::size_t n = op.size();
    if (n > config.max_nodes)
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("{} nodes exceeds the eigensolver cap {}", n, config.max_nodes));
    const auto mu = op.space().measure();
    const auto sd = op.stiffness_diagonal();
    const auto su = op.stiffness_upper();

    // Symmetric form D(-L)D^{-1}, D = diag(sqrt(mu)).
    std::vector<double> diag(n);
    std::vector<double> off(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = -sd[i] / mu[i];
        off[i] = -su[i] / std::sqrt(mu[i] * mu[(i + 1) % n]);
    }

    std::vector<double> lambda(n);
    std::vector<double> modes(n * n);  // column-major: modes[k * n + i] = psi_k(i)
    const auto ln = static_cast<lapack_int>(n);
    lapack_int found = 0;
    lapack_int info = 0;
    if (!op.periodic()) {
        std::vector<lapack_int> support(2 * n);
        info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', ln, diag.data(), off.data(), 0.0, 0.0, 0,
                              0, 0.0, &found, lambda.data(), modes.data(), ln, support.data());
    } else {
        std::vector<double> dense(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            dense[i * n + i] = diag[i];
            const std::size_t j = (i + 1) % n;
            dense[i * n + j] += off[i];
            dense[j * n + i] += off[i];
        }
        std::vector<lapack_int> support(2 * n);
        info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', ln, dense.data(), ln, 0.0, 0.0, 0, 0,
                              0.0, &found, lambda.data(), modes.data(), ln, support.data());
    }
    if (info != 0 || found != ln)
        throw Error(ErrorCode::ConvergenceFailure,
                    fmt::format("eigensolver returned info={} with {} of {} eigenpairs", info,
                                found, n));

    // Back-transform phi = D^{-1} psi into node-major storage with the sign fixed.
    std::vector<double> inv_sqrt_mu(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt_mu[i] = 1.0 / std::sqrt(mu[i]);
    std::vector<double> vectors(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        const double* psi = modes.data() + k * n;
        double largest = 0.0;
        for (std::size_t i = 0; i < n; ++i) largest = std::max(largest, std::abs(psi[i]));
        double sign = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(psi[i]) > 1e-8 * largest) {
                sign = psi[i] > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) vectors[i * n + k] = sign * psi[i] * inv_sqrt_mu[i];
    }
    return SpectralData(op.space_ptr(), std::move(lambda), std::move(vectors));
}

double heat_kernel(const SpectralData& spec, std::size_t x, std::size_t y, double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "heat kernel needs t > 0");
    const auto lambda = spec.eigenvalues();
    const auto rx = spec.row(x);
    const auto ry = spec.row(y);
    double sum = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) sum += std::exp(-lambda[k] * t) * rx[k] * ry[k];
    return sum;
}

std::vector<double> semigroup_apply(const SpectralData& spec, std::span<const double> u0, double t) {
    if (u0.size() != spec.size())
        throw Error(ErrorCode::LengthMismatch, "semigroup input size");
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "semigroup needs t >= 0");
    return parallel::semigroup_apply(spec, u0, t);
}

GreenValue green_function(const SpectralData& spec, std::size_t x, std::size_t y) {
    if (spec.conservative()) {
        const double weight = spec.phi(x, 0) * spec.phi(y, 0);
        if (weight != 0.0) return {std::numeric_limits<double>::infinity(), true};
    }
    const auto lambda = spec.eigenvalues();
    const auto rx = spec.row(x);
    const auto ry = spec.row(y);
    double sum = 0.0;
    for (std::size_t k = spec.conservative() ? 1 : 0; k < lambda.size(); ++k)
        sum += rx[k] * ry[k] / lambda[k];
    return {sum, false};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Whether int^{+inf} (or int_{-inf}) of e^{f} r^{-(n-1)} is finite.
bool tail_finite(const PotentialSpec& f, int dim, bool toward_plus) {
    using F = PotentialSpec::Family;
    const double sign = toward_plus ? 1.0 : -1.0;
    switch (f.family) {
    case F::Zero: return dim >= 3;
    case F::Linear:
        if (f.slope * sign > 0.0) return false;
        if (f.slope * sign < 0.0) return true;
        return dim >= 3;
    case F::Quadratic:
        if (f.curvature > 0.0) return false;
        if (f.curvature < 0.0) return true;
        return dim >= 3;
    case F::Custom: break;
    }
    throw Error(ErrorCode::InvalidArgument, "far-field Green's function needs an analytic potential");
}

double integrate_finite(const std::function<double(double)>& g, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 20, 1e-13);
}

double integrate_to_infinity(const std::function<double(double)>& g, double a) {
    boost::math::quadrature::exp_sinh<double> rule;
    return rule.integrate([&](double u) { return g(a + u); }, 1e-13);
}

} // namespace

GreenValue green_function_far_field(const SpectralData& spec, std::size_t x, std::size_t y) {
    const WeightedSpace& space = spec.space();
    if (space.boundary() != BoundaryKind::Dirichlet) return green_function(spec, x, y);
    const GreenValue raw = green_function(spec, x, y);
    const PotentialSpec& pot = space.spec().potential;
    if (!pot.analytic())
        throw Error(ErrorCode::InvalidArgument, "far-field Green's function needs an analytic potential");

    if (space.kind() == GeometryKind::Radial) {
        const int n = space.dim();
        if (!tail_finite(pot, n, true)) return {kInf, true};
        const double sphere = unit_sphere_area(n);
        auto scale = [&](double r) { return std::exp(pot.value(r)) / (sphere * std::pow(r, n - 1)); };
        return {raw.value + integrate_to_infinity(scale, space.hi()), false};
    }

    // Line: continuum Green's function with scale s' = e^{f}, walls at a < b.
    auto scale = [&](double u) { return std::exp(pot.value(u)); };
    const double a = space.lo();
    const double b = space.hi();
    const double lo = std::min(space.node(x), space.node(y));
    const double hi = std::max(space.node(x), space.node(y));
    const double p = integrate_finite(scale, a, lo);
    const double m = integrate_finite(scale, lo, hi);
    const double q = integrate_finite(scale, hi, b);
    const bool left_finite = tail_finite(pot, 1, false);
    const bool right_finite = tail_finite(pot, 1, true);
    if (!left_finite && !right_finite) return {kInf, true};
    const double s_minus = left_finite ? [&] {
        boost::math::quadrature::exp_sinh<double> rule;
        return rule.integrate([&](double u) { return scale(a - u); }, 1e-13);
    }() : kInf;
    const double s_plus = right_finite ? integrate_to_infinity(scale, b) : kInf;

    const double truncated = p * q / (p + m + q);
    double full = 0.0;
    if (!left_finite) {
        full = q + s_plus;
    } else if (!right_finite) {
        full = s_minus + p;
    } else {
        full = (s_minus + p) * (q + s_plus) / (s_minus + p + m + q + s_plus);
    }
    return {raw.value + (full - truncated), false};
}

GreenQuadrature green_function_time_quadrature(const SpectralData& spec, std::size_t x,
                                               std::size_t y, double T) {
    if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadrature horizon must be positive");
    const double h2 = spec.space().h() * spec.space().h();
    auto kernel = [&](double t) { return t <= 0.0 ? (x == y ? 1.0 / spec.space().measure()[x] : 0.0)
                                                   : heat_kernel(spec, x, y, t); };
    GreenQuadrature out;
    // Panels doubling in length from h^2 resolve every time scale of the kernel.
    double a = 0.0;
    double b = std::min(h2, T);
    while (a < T) {
        out.value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(kernel, a, b, 8, 1e-12);
        a = b;
        b = std::min(2.0 * b, T);
    }
    const double lambda0 = spec.eigenvalues().front();
    const auto mu = spec.space().measure();
    out.tail_bound = lambda0 > 0.0 ? std::exp(-lambda0 * T) / lambda0 / std::sqrt(mu[x] * mu[y]) : kInf;
    return out;
}

std::vector<double> green_function_direct(const FOperator& op, std::size_t y) {
    if (op.space().boundary() != BoundaryKind::Dirichlet)
        throw Error(ErrorCode::InvalidArgument, "direct Green's function needs a Dirichlet wall");
    const std::size_t n = op.size();
    std::vector<double> diag(n);
    std::vector<double> off(n - 1);
    const auto sd = op.stiffness_diagonal();
    const auto su = op.stiffness_upper();
    for (std::size_t i = 0; i < n; ++i) diag[i] = -sd[i];
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -su[i];
    std::vector<double> rhs(n, 0.0);
    rhs[y] = 1.0;
    return detail::solve_tridiagonal(off, diag, off, rhs);
}

std::vector<double> crank_nicolson_evolve(const FOperator& op, std::span<const double> u0, double t,
                                          int steps) {
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "need at least one step");
    const std::size_t n = op.size();
    if (u0.size() != n) throw Error(ErrorCode::LengthMismatch, "Crank-Nicolson input size");
    const double dt = t / steps;
    const auto mu = op.space().measure();
    const auto sd = op.stiffness_diagonal();
    const auto su = op.stiffness_upper();

    // (M - dt/2 S) u^{k+1} = (M + dt/2 S) u^k
    std::vector<double> diag(n);
    std::vector<double> off(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = mu[i] - 0.5 * dt * sd[i];
        off[i] = -0.5 * dt * su[i];
    }
    const bool periodic = op.periodic();
    const std::span<const double> off_open(off.data(), n - 1);

    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> rhs(n);
    for (int step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            double flux = sd[i] * u[i];
            if (i + 1 < n) flux += su[i] * u[i + 1];
            if (i > 0) flux += su[i - 1] * u[i - 1];
            if (periodic) {
                if (i == 0) flux += su[n - 1] * u[n - 1];
                if (i == n - 1) flux += su[n - 1] * u[0];
            }
            rhs[i] = mu[i] * u[i] + 0.5 * dt * flux;
        }
        u = periodic ? detail::solve_cyclic_symmetric(diag, off_open, off[n - 1], rhs)
                     : detail::solve_tridiagonal(off_open, diag, off_open, rhs);
    }
    return u;
}

SampleGrid kernel_sample_grid(const SpectralData& spec, const SamplePlan& plan) {
    const WeightedSpace& space = spec.space();
    const std::size_t origin = space.nearest_node(plan.origin);
    const double guard_h = plan.guard_spacing > 0.0 ? plan.guard_spacing : space.h();
    const double t_min = plan.min_time_factor * guard_h * guard_h;

    struct Job {
        std::size_t x, y;
        double t;
    };
    std::vector<Job> jobs;
    if (!plan.triples.empty()) {
        for (const auto& tr : plan.triples)
            jobs.push_back({space.nearest_node(tr.x), space.nearest_node(tr.y), tr.t});
    } else {
        for (double t : plan.ts)
            for (double xp : plan.xs)
                for (double yp : plan.ys)
                    jobs.push_back({space.nearest_node(xp), space.nearest_node(yp), t});
    }

    SampleGrid grid;
    grid.R = plan.R;
    if (grid.R <= 0.0) {
        for (const auto& j : jobs) {
            grid.R = std::max({grid.R, 2.0 * space.distance(origin, j.x),
                               2.0 * space.distance(origin, j.y), 2.0 * std::sqrt(j.t)});
        }
        grid.R *= 1.0 + 1e-9;
    }
    PotentialStats stats{};
    if (grid.R > 0.0) stats = potential_stats(space, origin, grid.R);
    const double kappa = curvature_profile(space).kappa;

    std::vector<Job> kept;
    for (const auto& j : jobs) {
        const double d = space.distance(j.x, j.y);
        const double h2 = guard_h * guard_h;
        const double dispersion = d * d * d * d * h2 / (192.0 * j.t * j.t * j.t);
        if (!(j.t >= t_min) || d * d / (4.0 * j.t) > plan.max_gaussian_exponent ||
            dispersion > plan.max_dispersion) {
            ++grid.skipped;
            continue;
        }
        kept.push_back(j);
    }

    // Batch by time so each block is one parallel kernel_matrix call.
    std::vector<double> values(kept.size());
    std::vector<std::size_t> order(kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return kept[a].t < kept[b].t; });
    for (std::size_t begin = 0; begin < order.size();) {
        std::size_t end = begin;
        while (end < order.size() && kept[order[end]].t == kept[order[begin]].t) ++end;
        std::vector<std::size_t> rows;
        std::vector<std::size_t> cols;
        for (std::size_t k = begin; k < end; ++k) {
            rows.push_back(kept[order[k]].x);
            cols.push_back(kept[order[k]].y);
        }
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        const auto block = parallel::kernel_matrix(spec, rows, cols, kept[order[begin]].t);
        for (std::size_t k = begin; k < end; ++k) {
            const auto& j = kept[order[k]];
            const auto r = static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), j.x) - rows.begin());
            const auto c = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), j.y) - cols.begin());
            values[order[k]] = block[r * cols.size() + c];
        }
        begin = end;
    }

    grid.samples.reserve(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto& j = kept[k];
        const auto vx = ball_volume(space, j.x, std::sqrt(j.t));
        const auto vy = ball_volume(space, j.y, std::sqrt(j.t));
        KernelSample s;
        s.x = j.x;
        s.y = j.y;
        s.t = j.t;
        s.H = values[k];
        s.d = space.distance(j.x, j.y);
        s.Vx = vx.value;
        s.Vy = vy.value;
        s.A = stats.A;
        s.Aprime = stats.Aprime;
        s.kappa = kappa;
        s.clipped = vx.clipped || vy.clipped;
        grid.samples.push_back(s);
    }
    return grid;
}

} // namespace heatlab
