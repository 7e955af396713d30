#include "common.hpp"

#include "heatlab/kernels.hpp"
#include "heatlab/oracle.hpp"

#include <cmath>
#include <numbers>

using namespace heatlab;
using namespace heatlab::testing;

TEST(Spectral, IntervalNeumannSpectrum) {
    const auto spec = spectral_of(SpaceSpec::interval(0, std::numbers::pi, 512, PotentialSpec::zero()));
    EXPECT_NEAR(spec.eigenvalue(0), 0.0, 1e-10);
    for (int k = 1; k <= 4; ++k)
        EXPECT_NEAR(spec.eigenvalue(static_cast<std::size_t>(k)), k * k, 1e-3 * k * k);
}

TEST(Spectral, CircleSpectrumPairs) {
    const auto spec = spectral_of(SpaceSpec::circle(2.0 * std::numbers::pi, 512));
    const double expected[] = {0, 1, 1, 4, 4, 9, 9};
    for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(spec.eigenvalue(k), expected[k], 1e-3 * std::max(1.0, expected[k]));
}

TEST(Spectral, ConstantShiftKeepsSpectrum) {
    const auto a = spectral_of(SpaceSpec::interval(-3, 3, 128, PotentialSpec::quadratic(1.0)));
    const auto b = spectral_of(SpaceSpec::interval(-3, 3, 128, PotentialSpec::quadratic(1.0).shifted(3.0)));
    for (std::size_t k = 0; k < a.size(); ++k)
        EXPECT_NEAR(a.eigenvalue(k), b.eigenvalue(k), 1e-9 * std::max(1.0, a.eigenvalue(k)));
}

TEST(Spectral, OrthonormalAndResidual) {
    for (const auto& [name, sspec] : small_suite(96)) {
        const auto space = std::make_shared<const WeightedSpace>(sspec);
        const auto op = assemble(space);
        const auto spec = decompose(op);
        const std::size_t n = spec.size();
        const double top = spec.eigenvalue(n - 1);
        std::vector<std::vector<double>> vecs;
        for (std::size_t k = 0; k < n; ++k) vecs.push_back(spec.eigenvector(k));
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = j; k < n; ++k)
                EXPECT_NEAR(weighted_inner(*space, vecs[j], vecs[k]), j == k ? 1.0 : 0.0, 1e-10) << name;
            const auto Lphi = op.apply(vecs[j]);
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(-Lphi[i] - spec.eigenvalue(j) * vecs[j][i]));
            EXPECT_LE(res, 1e-9 * top) << name << " mode " << j;
        }
        EXPECT_GE(spec.eigenvalue(0), -1e-10 * top);
        EXPECT_NEAR(spec.eigenvalue(0), 0.0, 1e-10 * top) << name;
        const double c = 1.0 / std::sqrt(space->total_measure());
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(vecs[0][i]), c, 1e-8 * c) << name;
    }
}

TEST(Spectral, EigenvectorSignConvention) {
    const auto spec = spectral_of(SpaceSpec::interval(-2, 2, 64, PotentialSpec::linear(0.5)));
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const auto v = spec.eigenvector(k);
        const double scale = max_abs(v);
        for (double x : v)
            if (std::abs(x) > 1e-8 * scale) {
                EXPECT_GT(x, 0.0) << "mode " << k;
                break;
            }
    }
}

TEST(Spectral, KernelExamples) {
    const auto flat = spectral_of(SpaceSpec::interval(-12, 12, 1536, PotentialSpec::zero()));
    const auto& fs = flat.space();
    // Nodes sit at +-h/2 around 0; compare against the closed form at those nodes.
    const std::size_t i = fs.nearest_node(0.0);
    EXPECT_NEAR(heat_kernel(flat, i, i, 1.0), 1.0 / std::sqrt(4.0 * std::numbers::pi), 1e-4);
    const auto sol = spectral_of(SpaceSpec::interval(-12, 12, 1536, PotentialSpec::linear(1.0)));
    const std::size_t j = sol.space().nearest_node(0.0);
    const double xj = sol.space().node(j);
    EXPECT_NEAR(heat_kernel(sol, j, j, 1.0), oracle::soliton_kernel_1d(xj, xj, 1.0, 1), 1e-4);
    EXPECT_NEAR(oracle::soliton_kernel_1d(0, 0, 1, 1), 0.21970, 1e-5);
}

TEST(Spectral, LongTimeLimitIsUniform) {
    for (const auto& [name, sspec] : small_suite(64)) {
        const auto spec = spectral_of(sspec);
        const double target = 1.0 / spec.space().total_measure();
        const double t = 60.0 / spec.eigenvalue(1);
        for (std::size_t x : {std::size_t{0}, spec.size() / 2})
            for (std::size_t y : {std::size_t{3}, spec.size() - 1})
                EXPECT_NEAR(heat_kernel(spec, x, y, t), target, 1e-9 * target * 1e3) << name;
    }
}

TEST(Spectral, ChapmanKolmogorov) {
    std::mt19937_64 rng(21);
    for (const auto& [name, sspec] : small_suite(128)) {
        const auto spec = spectral_of(sspec);
        std::uniform_int_distribution<std::size_t> node(0, spec.size() - 1);
        std::uniform_real_distribution<double> time(0.05, 2.0);
        for (int k = 0; k < 10; ++k) {
            const std::size_t x = node(rng);
            const std::size_t y = node(rng);
            const double t = time(rng);
            const double s = time(rng);
            const double lhs = parallel::chapman_kolmogorov_sum(spec, x, y, t, s);
            const double rhs = heat_kernel(spec, x, y, t + s);
            EXPECT_NEAR(lhs, rhs, 1e-8 * std::abs(rhs) + 1e-300) << name;
        }
    }
}

TEST(Spectral, StochasticCompletenessPositivitySymmetry) {
    for (const auto& [name, sspec] : small_suite(128)) {
        const auto spec = spectral_of(sspec);
        const auto& s = spec.space();
        const auto mu = s.measure();
        std::vector<std::size_t> all(s.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        for (double t : {0.05, 0.5, 3.0}) {
            const auto K = parallel::kernel_matrix(spec, all, all, t);
            const std::size_t n = all.size();
            for (std::size_t x = 0; x < n; x += 7) {
                double mass = 0.0;
                // Far-tail entries sit at the round-off level of the row peak.
                const double floor = 1e-13 * K[x * n + x];
                for (std::size_t y = 0; y < n; ++y) {
                    mass += K[x * n + y] * mu[y];
                    EXPECT_GT(K[x * n + y], -floor) << name;
                    EXPECT_NEAR(K[x * n + y], K[y * n + x], 1e-12 * std::abs(K[x * n + y]) + floor) << name;
                }
                EXPECT_NEAR(mass, 1.0, 1e-10) << name;
            }
        }
    }
}

TEST(Spectral, DiagonalDecayIsMonotone) {
    const auto spec = spectral_of(SpaceSpec::interval(-5, 5, 128, PotentialSpec::quadratic(-0.5)));
    for (std::size_t x : {std::size_t{0}, std::size_t{40}, std::size_t{64}}) {
        double prev = heat_kernel(spec, x, x, 0.01);
        for (double t = 0.02; t < 20.0; t *= 1.25) {
            const double v = heat_kernel(spec, x, x, t);
            EXPECT_LE(v, prev * (1 + 1e-12));
            prev = v;
        }
    }
}

TEST(Spectral, SemigroupProperties) {
    const auto spec = spectral_of(SpaceSpec::interval(-4, 4, 128, PotentialSpec::linear(-1.0)));
    const auto& s = spec.space();
    const std::vector<double> one(s.size(), 1.0);
    for (double t : {0.0, 0.1, 5.0}) {
        const auto u = semigroup_apply(spec, one, t);
        for (double v : u) EXPECT_NEAR(v, 1.0, 1e-11);
    }
    std::mt19937_64 rng(8);
    auto u0 = random_vector(rng, s.size(), 0.0, 1.0);
    for (std::size_t i = 0; i < u0.size(); ++i)
        if (i % 5) u0[i] = 0.0;
    const auto back = semigroup_apply(spec, u0, 0.0);
    for (std::size_t i = 0; i < u0.size(); ++i) EXPECT_NEAR(back[i], u0[i], 1e-11);
    const double m0 = weighted_inner(s, u0, one);
    double lo_prev = 0.0;
    double hi_prev = max_abs(u0);
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
        const auto u = semigroup_apply(spec, u0, t);
        EXPECT_NEAR(weighted_inner(s, u, one), m0, 1e-12 * m0 * 10);
        const double lo = *std::min_element(u.begin(), u.end());
        const double hi = *std::max_element(u.begin(), u.end());
        EXPECT_GT(lo, 0.0);
        EXPECT_GE(lo, lo_prev - 1e-12);
        EXPECT_LE(hi, hi_prev + 1e-12);
        lo_prev = lo;
        hi_prev = hi;
    }
}

TEST(Spectral, SerialAndParallelKernelsAgreeExactly) {
    std::mt19937_64 rng(4);
    for (const auto& [name, sspec] : small_suite(96)) {
        const auto spec = spectral_of(sspec);
        std::vector<std::size_t> rows = {0, 5, 17, 40, spec.size() - 1};
        std::vector<std::size_t> cols = {1, 2, 30, 60, 95};
        EXPECT_EQ(serial::kernel_matrix(spec, rows, cols, 0.3), parallel::kernel_matrix(spec, rows, cols, 0.3)) << name;
        const auto u0 = random_vector(rng, spec.size());
        EXPECT_EQ(serial::semigroup_apply(spec, u0, 0.7), parallel::semigroup_apply(spec, u0, 0.7)) << name;
        EXPECT_EQ(semigroup_apply(spec, u0, 0.7), parallel::semigroup_apply(spec, u0, 0.7)) << name;
        const std::vector<double> radii = {0.1, 0.5, 1.0, 3.0};
        EXPECT_EQ(serial::ball_volume_profile(spec.space(), 10, radii),
                  parallel::ball_volume_profile(spec.space(), 10, radii))
            << name;
        EXPECT_EQ(serial::chapman_kolmogorov_sum(spec, 3, 50, 0.2, 0.4),
                  parallel::chapman_kolmogorov_sum(spec, 3, 50, 0.2, 0.4))
            << name;
    }
}

TEST(Spectral, GreenDivergesOnClosedSpaces) {
    const auto spec = spectral_of(SpaceSpec::interval(-3, 3, 64, PotentialSpec::zero()));
    EXPECT_TRUE(green_function(spec, 3, 10).divergent);
}

TEST(Spectral, NewtonianPotentialOnRadialSpace) {
    const auto spec = spectral_of(SpaceSpec::radial(3, 20, 1024, PotentialSpec::zero(), BoundaryKind::Dirichlet));
    const auto& s = spec.space();
    for (double r : {0.5, 1.0, 2.0, 3.0}) {
        const std::size_t y = s.nearest_node(r);
        const auto g = green_function_far_field(spec, 0, y);
        ASSERT_FALSE(g.divergent);
        const double exact = 1.0 / (4.0 * std::numbers::pi * s.node(y));
        EXPECT_NEAR(g.value / exact, 1.0, 0.01) << r;
        // The raw truncated value misses the exterior capacity, r/R.
        const double raw = green_function(spec, 0, y).value;
        EXPECT_NEAR(raw / exact, 1.0 - s.node(y) / 20.0, 0.01) << r;
    }
}

TEST(Spectral, SolitonDirichletGreenFinitePositive) {
    const auto spec = spectral_of(SpaceSpec::interval(-15, 15, 512, PotentialSpec::linear(1.0), BoundaryKind::Dirichlet));
    const auto g = green_function(spec, spec.space().nearest_node(0.0), spec.space().nearest_node(1.0));
    EXPECT_FALSE(g.divergent);
    EXPECT_GT(g.value, 0.0);
    EXPECT_TRUE(std::isfinite(g.value));
}

TEST(Spectral, GreenRoutesAgree) {
    const auto sspec = SpaceSpec::interval(-4, 4, 128, PotentialSpec::linear(0.5), BoundaryKind::Dirichlet);
    const auto space = std::make_shared<const WeightedSpace>(sspec);
    const auto op = assemble(space);
    const auto spec = decompose(op);
    const std::size_t x = 40;
    const std::size_t y = 70;
    const double g = green_function(spec, x, y).value;
    const auto direct = green_function_direct(op, y);
    EXPECT_NEAR(direct[x], g, 1e-9 * g);
    const auto q = green_function_time_quadrature(spec, x, y, 40.0);
    EXPECT_LE(std::abs(q.value - g), q.tail_bound + 1e-6 * g);
}

TEST(Spectral, CrankNicolsonCrossCheck) {
    const auto sspec = SpaceSpec::interval(-8, 8, 256, PotentialSpec::zero());
    const auto space = std::make_shared<const WeightedSpace>(sspec);
    const auto op = assemble(space);
    const auto spec = decompose(op);
    const std::vector<double> one(space->size(), 1.0);
    for (double v : crank_nicolson_evolve(op, one, 1.0, 10)) EXPECT_NEAR(v, 1.0, 1e-13);

    const std::size_t y = space->nearest_node(0.0);
    std::vector<double> delta(space->size(), 0.0);
    delta[y] = 1.0 / space->measure()[y];
    const auto u = crank_nicolson_evolve(op, delta, 1.0, 1000);
    double worst = 0.0;
    for (std::size_t x = 0; x < u.size(); ++x) {
        const double h = heat_kernel(spec, x, y, 1.0);
        if (h > 1e-6) worst = std::max(worst, std::abs(u[x] - h) / h);
    }
    EXPECT_LE(worst, 1e-4);
    EXPECT_NEAR(weighted_inner(*space, u, one), 1.0, 1e-12 * 1000);
}

TEST(Spectral, SampleGridBasics) {
    const auto spec = spectral_of(SpaceSpec::interval(-10, 10, 512, PotentialSpec::linear(1.0)));
    SamplePlan one;
    one.triples = {{0.5, -0.5, 1.0}};
    const auto g1 = kernel_sample_grid(spec, one);
    ASSERT_EQ(g1.samples.size(), 1u);
    EXPECT_GT(g1.samples[0].Vx, 0.0);

    SamplePlan sym;
    sym.xs = {-1.0, 0.0, 1.0};
    sym.ys = sym.xs;
    sym.ts = {0.5, 1.0};
    const auto g = kernel_sample_grid(spec, sym);
    for (const auto& a : g.samples)
        for (const auto& b : g.samples)
            if (a.x == b.y && a.y == b.x && a.t == b.t) {
                EXPECT_NEAR(a.H, b.H, 1e-12 * a.H);
            }
    const auto& s = spec.space();
    for (const auto& a : g.samples) {
        const double exact = oracle::soliton_kernel_1d(s.node(a.x), s.node(a.y), a.t, 1);
        EXPECT_NEAR(a.H / exact, 1.0, 2e-3);
    }
}

TEST(Spectral, SampleGridGuards) {
    const auto spec = spectral_of(SpaceSpec::interval(-10, 10, 128, PotentialSpec::zero()));
    SamplePlan plan;
    plan.triples = {{0.0, 0.0, 1e-4}, {0.0, 8.0, 0.1}, {0.0, 4.0, 0.5}, {0.0, 0.5, 1.0}};
    const auto g = kernel_sample_grid(spec, plan);
    EXPECT_EQ(g.samples.size(), 1u);
    EXPECT_EQ(g.skipped, 3u);
}

TEST(Spectral, ArgumentErrors) {
    const auto spec = spectral_of(SpaceSpec::interval(-1, 1, 16, PotentialSpec::zero()));
    EXPECT_HEATLAB_ERROR(heat_kernel(spec, 0, 1, 0.0), InvalidArgument);
    EXPECT_HEATLAB_ERROR(semigroup_apply(spec, std::vector<double>(3), 1.0), LengthMismatch);
    const WeightedSpace big(SpaceSpec::interval(-1, 1, 64, {}));
    EXPECT_HEATLAB_ERROR(decompose(assemble(big), SpectralConfig{32}), InvalidArgument);
    EXPECT_HEATLAB_ERROR(crank_nicolson_evolve(assemble(big), std::vector<double>(64), 1.0, 0), InvalidArgument);
}

TEST(Spectral, OracleConvergenceIsSecondOrder) {
    std::vector<double> err;
    for (int n : {128, 256, 512}) {
        const auto spec = spectral_of(SpaceSpec::interval(-8, 8, n, PotentialSpec::zero()));
        const auto& s = spec.space();
        double e = 0.0;
        for (double x : {-1.0, 0.0, 1.5})
            for (double y : {-0.5, 0.25, 2.0}) {
                const std::size_t i = s.nearest_node(x);
                const std::size_t j = s.nearest_node(y);
                const double exact = oracle::interval_image_kernel(s.node(i), s.node(j), 0.5, -8, 8, BoundaryKind::Neumann);
                e = std::max(e, std::abs(heat_kernel(spec, i, j, 0.5) - exact));
            }
        err.push_back(e);
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.3);
    EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.3);
}
