#include "common.hpp"

#include "heatlab/bounds.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

using namespace heatlab;
using namespace heatlab::testing;

namespace {

SamplePlan gaussian_plan() {
    SamplePlan plan;
    plan.xs = {-2.0, -1.0, 0.0, 1.0, 2.0};
    plan.ys = {-2.0, -1.0, 0.0, 1.0, 2.0};
    plan.ts = {0.25, 0.5, 1.0, 2.0, 4.0};
    return plan;
}

std::vector<KernelSample> samples_on(const SpectralData& spec, const SamplePlan& plan = gaussian_plan()) {
    auto grid = kernel_sample_grid(spec, plan);
    return grid.samples;
}

std::vector<std::size_t> all_nodes(const WeightedSpace& space) {
    std::vector<std::size_t> out(space.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

std::vector<double> constants_of(const BoundReport& r, std::initializer_list<const char*> names) {
    std::vector<double> out;
    for (const char* n : names) out.push_back(*r.constant(n));
    return out;
}

} // namespace

TEST(Stability, RelativeChangeOfSharedConstants) {
    BoundReport a;
    BoundReport b;
    a.constants = {{"c1", 1.0}, {"c2", 2.0}, {"only_a", 5.0}};
    b.constants = {{"c1", 1.1}, {"c2", 2.0}};
    EXPECT_NEAR(refinement_stability(a, b), 10.0, 1e-9);
    a.constants = {{"c", 1e-9}};
    b.constants = {{"c", 5e-9}};
    EXPECT_EQ(refinement_stability(a, b), 0.0);
}

// ---------------------------------------------------------------------------
// Gaussian bounds

TEST(GaussianUpper, FlatSpaceFitsPureGaussian) {
    const auto spec = spectral_of(SpaceSpec::interval(-12, 12, 512, PotentialSpec::zero()));
    const auto samples = samples_on(spec);
    ASSERT_GT(samples.size(), 50u);
    const auto r = gaussian_upper_check(samples);
    EXPECT_EQ(r.verdict, Verdict::HoldsWithFitted);
    EXPECT_LE(r.worst_deficit, 1e-9);
    // A = kappa = 0: the c2 and c3 columns vanish.
    EXPECT_TRUE(r.has_flag("Dropped:c2") || *r.constant("c2") == 0.0);
    EXPECT_GT(*r.constant("c1"), 0.0);
}

TEST(GaussianUpper, FittedConstantsVerifyAndDoubledKernelFails) {
    const auto spec = spectral_of(SpaceSpec::interval(-8, 8, 256, PotentialSpec::linear(1.0)));
    const auto samples = samples_on(spec);
    const auto fitted = gaussian_upper_check(samples);
    ASSERT_EQ(fitted.verdict, Verdict::HoldsWithFitted);
    GaussianOptions opt;
    opt.constants = constants_of(fitted, {"c1", "c2", "c3"});
    opt.margin = 1e-9;
    EXPECT_EQ(gaussian_upper_check(samples, opt).verdict, Verdict::Holds);
    opt.inflate = 2.0;
    const auto bad = gaussian_upper_check(samples, opt);
    EXPECT_EQ(bad.verdict, Verdict::Violated);
    EXPECT_NEAR(bad.worst_deficit, std::log(2.0), 1e-6);
}

TEST(GaussianUpper, GrowingExponentFailsShape) {
    const auto spec = spectral_of(SpaceSpec::interval(-12, 12, 512, PotentialSpec::zero()));
    auto samples = samples_on(spec);
    // H e^{d^2/(2t)} grows with d^2/t faster than any admissible Gaussian.
    for (auto& s : samples) s.H *= std::exp(s.d * s.d / (2.0 * s.t));
    EXPECT_EQ(gaussian_upper_check(samples).verdict, Verdict::Violated);
}

TEST(GaussianLower, FlatSpaceRecoversFour) {
    const auto spec = spectral_of(SpaceSpec::interval(-12, 12, 512, PotentialSpec::zero()));
    const auto r = gaussian_lower_check(samples_on(spec));
    EXPECT_EQ(r.verdict, Verdict::HoldsWithFitted);
    EXPECT_NEAR(*r.constant("c6"), 4.0, 0.1);
    EXPECT_NEAR(*r.constant("c5"), 0.0, 1e-9);
    EXPECT_GT(*r.constant("c4"), 0.0);
}

TEST(GaussianLower, ConstantKernelFailsShape) {
    const auto spec = spectral_of(SpaceSpec::interval(-12, 12, 512, PotentialSpec::zero()));
    auto samples = samples_on(spec);
    for (auto& s : samples) s.H = 1.0 / spec.space().total_measure();
    const auto r = gaussian_lower_check(samples);
    EXPECT_EQ(r.verdict, Verdict::Violated);
    EXPECT_GE(*r.extra("shape_slope"), 0.25);
}

TEST(GaussianLower, HalvedKernelViolatesFittedConstants) {
    const auto spec = spectral_of(SpaceSpec::interval(-4, 4, 256, PotentialSpec::quadratic(1.0)));
    const auto samples = samples_on(spec);
    const auto fitted = gaussian_lower_check(samples);
    ASSERT_EQ(fitted.verdict, Verdict::HoldsWithFitted);
    GaussianOptions opt;
    opt.constants = constants_of(fitted, {"c4", "c5", "c6"});
    opt.margin = 1e-9;
    EXPECT_EQ(gaussian_lower_check(samples, opt).verdict, Verdict::Holds);
    opt.inflate = 0.5;
    EXPECT_EQ(gaussian_lower_check(samples, opt).verdict, Verdict::Violated);
}

TEST(GaussianLower, ZeroKernelFlagged) {
    const auto spec = spectral_of(SpaceSpec::interval(-12, 12, 256, PotentialSpec::zero()));
    auto samples = samples_on(spec);
    samples.front().H = 0.0;
    const auto r = gaussian_lower_check(samples);
    EXPECT_TRUE(r.has_flag("NonPositiveKernel"));
    EXPECT_EQ(r.verdict, Verdict::Violated);
}

TEST(AltLower, MatchesLowerOnFlatSpace) {
    const auto spec = spectral_of(SpaceSpec::interval(-12, 12, 512, PotentialSpec::zero()));
    const auto samples = samples_on(spec);
    const auto lower = gaussian_lower_check(samples);
    const auto alt = alt_lower_check(samples);
    EXPECT_EQ(alt.verdict, Verdict::HoldsWithFitted);
    EXPECT_NEAR(*alt.constant("c3") / *lower.constant("c6"), 1.0, 0.1);
    EXPECT_NEAR(*alt.constant("c1") / *lower.constant("c4"), 1.0, 0.1);
}

TEST(AltLower, HalvedKernelViolates) {
    const auto spec = spectral_of(SpaceSpec::interval(-8, 8, 256, PotentialSpec::linear(-1.0)));
    const auto samples = samples_on(spec);
    const auto fitted = alt_lower_check(samples);
    ASSERT_EQ(fitted.verdict, Verdict::HoldsWithFitted);
    GaussianOptions opt;
    opt.constants = constants_of(fitted, {"c1", "c2", "c3", "K"});
    opt.margin = 1e-9;
    EXPECT_EQ(alt_lower_check(samples, opt).verdict, Verdict::Holds);
    opt.inflate = 0.5;
    EXPECT_EQ(alt_lower_check(samples, opt).verdict, Verdict::Violated);
}

TEST(GaussianChecks, RejectBadInput) {
    std::vector<KernelSample> none;
    EXPECT_HEATLAB_ERROR(gaussian_upper_check(none), EmptySamples);
    const auto spec = spectral_of(SpaceSpec::interval(-6, 6, 128, PotentialSpec::zero()));
    const auto samples = samples_on(spec);
    GaussianOptions opt;
    opt.epsilon = 0.0;
    EXPECT_HEATLAB_ERROR(gaussian_upper_check(samples, opt), InvalidArgument);
    opt = {};
    opt.constants = std::vector<double>{1.0, 0.0};
    EXPECT_HEATLAB_ERROR(gaussian_upper_check(samples, opt), InvalidArgument);
    EXPECT_HEATLAB_ERROR(gaussian_lower_check(samples, opt), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Harnack

TEST(Harnack, ConstantDataHasZeroRatio) {
    const auto spec = spectral_of(SpaceSpec::interval(-6, 6, 256, PotentialSpec::linear(1.0)));
    const std::vector<double> one(spec.size(), 1.0);
    const auto obs = harnack_observe(spec, ParabolicCylinders{}, one);
    EXPECT_NEAR(obs.log_ratio, 0.0, 1e-9);
    EXPECT_GT(obs.nodes, 0u);
}

TEST(Harnack, RatioIsScaleInvariant) {
    const auto spec = spectral_of(SpaceSpec::interval(-6, 6, 256, PotentialSpec::quadratic(1.0)));
    const auto u = random_positive_data(spec.space(), 3);
    auto u2 = u;
    for (auto& v : u2) v *= 2.0;
    const ParabolicCylinders cyl{0.5, 1.0, 2.0};
    const auto a = harnack_observe(spec, cyl, u);
    const auto b = harnack_observe(spec, cyl, u2);
    EXPECT_NEAR(a.log_ratio, b.log_ratio, 1e-12);
    EXPECT_NEAR(a.budget_arg, b.budget_arg, 1e-15);
}

TEST(Harnack, LocalisedDataMatchesGaussianRatio) {
    // A narrow bump at the centre: sup over Q- at the earliest time, inf over
    // Q+ at the edge of delta B and time s.
    const auto spec = spectral_of(SpaceSpec::interval(-20, 20, 1024, PotentialSpec::zero()));
    const auto& space = spec.space();
    std::vector<double> u(space.size(), 0.0);
    const std::size_t c = space.nearest_node(0.0);
    u[c] = 1.0 / space.measure()[c];
    ParabolicCylinders cyl{0.0, 1.0, 1.0};
    cyl.time_points = 32;
    const auto obs = harnack_observe(spec, cyl, u);
    auto gauss = [](double x, double t) { return std::exp(-x * x / (4 * t)) / std::sqrt(4 * std::numbers::pi * t); };
    const double r = cyl.delta;
    // Outermost node of delta B.
    double edge = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (std::abs(space.node(i)) <= r) edge = std::max(edge, std::abs(space.node(i)));
    const double t_lo = cyl.s - cyl.delta + (cyl.delta - cyl.eta) / (2.0 * cyl.time_points);
    const double expected = std::log(gauss(0.0, t_lo)) - std::log(gauss(edge, cyl.s));
    EXPECT_NEAR(obs.log_ratio, expected, 0.2 * expected);
}

TEST(Harnack, VerifyModeCatchesTinyConstants) {
    const auto spec = spectral_of(SpaceSpec::interval(-6, 6, 256, PotentialSpec::linear(1.0)));
    const auto u = random_positive_data(spec.space(), 11);
    const ParabolicCylinders cyl{0.0, 1.5, 3.0};
    const auto fitted = harnack_check(spec, cyl, u);
    EXPECT_EQ(fitted.verdict, Verdict::HoldsWithFitted);
    HarnackOptions opt;
    opt.constants = std::vector<double>{1.0, 0.0};
    const double lr = *fitted.extra("log_ratio");
    ASSERT_GT(lr, 0.0);
    EXPECT_EQ(harnack_check(spec, cyl, u, opt).verdict, Verdict::Violated);
    opt.constants = std::vector<double>{std::exp(lr) * 1.01, 0.0};
    EXPECT_EQ(harnack_check(spec, cyl, u, opt).verdict, Verdict::Holds);
}

TEST(Harnack, ArgumentErrors) {
    const auto spec = spectral_of(SpaceSpec::interval(-6, 6, 64, PotentialSpec::zero()));
    const std::vector<double> one(spec.size(), 1.0);
    ParabolicCylinders bad;
    bad.eta = 0.2;
    EXPECT_HEATLAB_ERROR(harnack_observe(spec, bad, one), InvalidArgument);
    ParabolicCylinders early;
    early.s = 0.5;
    EXPECT_HEATLAB_ERROR(early.validate(), InvalidArgument);
    // Nodes sit at odd multiples of h/2 = 0.09375; delta r = 0.075 around 0 holds none.
    ParabolicCylinders tiny{0.0, 0.1, 1.0};
    EXPECT_HEATLAB_ERROR(harnack_observe(spec, tiny, one), DegenerateCylinder);
    ParabolicCylinders outside{50.0, 1.0, 2.0};
    EXPECT_HEATLAB_ERROR(harnack_observe(spec, outside, one), DegenerateCylinder);
    std::vector<double> zero(spec.size(), 0.0);
    EXPECT_HEATLAB_ERROR(harnack_observe(spec, ParabolicCylinders{}, zero), InvalidArgument);
    std::vector<double> neg(spec.size(), 1.0);
    neg[3] = -1.0;
    EXPECT_HEATLAB_ERROR(harnack_observe(spec, ParabolicCylinders{}, neg), InvalidArgument);
    EXPECT_HEATLAB_ERROR(harnack_observe(spec, ParabolicCylinders{}, std::vector<double>(5, 1.0)), LengthMismatch);
}

TEST(Harnack, StudyCoversCalibration) {
    const auto spec = spectral_of(SpaceSpec::interval(-6, 6, 256, PotentialSpec::linear(1.0)));
    const std::vector<ParabolicCylinders> cyls = {{0.0, 0.5, 1.0}, {0.0, 1.0, 2.0}, {0.0, 2.0, 4.0}};
    HarnackStudyOptions opt;
    opt.calibration_trials = 12;
    opt.holdout_trials = 6;
    const auto study = harnack_study(spec, cyls, opt);
    EXPECT_EQ(study.calibration.size(), 36u);
    EXPECT_EQ(study.holdout.size(), 18u);
    EXPECT_EQ(study.report.verdict, Verdict::HoldsWithFitted);
    EXPECT_LE(study.report.worst_deficit, 1e-9);
    EXPECT_GE(*study.report.constant("c2"), 0.0);
    opt.holdout_trials = 0;
    EXPECT_HEATLAB_ERROR(harnack_study(spec, cyls, opt), EmptySamples);
}

TEST(Harnack, RandomDataIsPositiveAndSeeded) {
    const WeightedSpace space(SpaceSpec::circle(10, 128));
    const auto a = random_positive_data(space, 5);
    const auto b = random_positive_data(space, 5);
    const auto c = random_positive_data(space, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (double v : a) EXPECT_GE(v, 0.05);
}

// ---------------------------------------------------------------------------
// Davies

TEST(Davies, WholeSpaceIsEquality) {
    for (const auto& [name, spec] : small_suite()) {
        if (name == "radial3") continue;
        const auto data = spectral_of(spec);
        const auto all = all_nodes(data.space());
        const auto r = davies_check(data, all, all, 0.7);
        EXPECT_EQ(r.verdict, Verdict::Holds) << name;
        EXPECT_NEAR(r.worst_deficit, 0.0, 1e-9) << name;
    }
}

TEST(Davies, SeparatedBallsHaveSlack) {
    const auto spec = spectral_of(SpaceSpec::circle(12, 256));
    const auto& s = spec.space();
    const auto B1 = s.ball_nodes(s.nearest_node(0.5), 1.0);
    const auto B2 = s.ball_nodes(s.nearest_node(6.5), 1.0);
    const auto r = davies_check(spec, B1, B2, 1.0);
    EXPECT_EQ(r.verdict, Verdict::Holds);
    EXPECT_LT(r.worst_deficit, -1.0);
    EXPECT_NEAR(*r.extra("distance"), 4.0, 2 * s.h());
}

TEST(Davies, DoubledMassViolates) {
    const auto spec = spectral_of(SpaceSpec::interval(-10, 10, 256, PotentialSpec::zero()));
    const auto& s = spec.space();
    const auto B = s.ball_nodes(s.nearest_node(0.0), 2.0);
    EXPECT_EQ(davies_check(spec, B, B, 0.01).verdict, Verdict::Holds);
    EXPECT_EQ(davies_check(spec, B, B, 0.01, 2.0).verdict, Verdict::Violated);
}

TEST(Davies, FarTailIsRoundOffLimited) {
    const auto spec = spectral_of(SpaceSpec::interval(-10, 10, 256, PotentialSpec::zero()));
    const auto& s = spec.space();
    const auto B1 = s.ball_nodes(s.nearest_node(-8.0), 1.0);
    const auto B2 = s.ball_nodes(s.nearest_node(8.0), 1.0);
    const auto r = davies_check(spec, B1, B2, 0.05);
    EXPECT_TRUE(r.has_flag("RoundOffLimited"));
    EXPECT_EQ(r.verdict, Verdict::Holds);
    // Near the diagonal the allowance is far below the inflated excess.
    const auto B = s.ball_nodes(s.nearest_node(0.0), 2.0);
    const auto tight = davies_check(spec, B, B, 0.01, 2.0);
    EXPECT_FALSE(tight.has_flag("RoundOffLimited"));
    EXPECT_LT(*tight.extra("roundoff"), 1e-9 * *tight.extra("rhs"));
}

TEST(Davies, DirichletUsesBottomOfSpectrum) {
    const auto spec = spectral_of(SpaceSpec::interval(0, std::numbers::pi, 256, PotentialSpec::zero(), BoundaryKind::Dirichlet));
    const auto all = all_nodes(spec.space());
    const auto r = davies_check(spec, all, all, 1.0);
    EXPECT_NEAR(*r.extra("lambda_bottom"), 1.0, 1e-3);
    EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Davies, ArgumentErrors) {
    const auto spec = spectral_of(SpaceSpec::interval(-1, 1, 32, PotentialSpec::zero()));
    const std::vector<std::size_t> none;
    const std::vector<std::size_t> one = {3};
    const std::vector<std::size_t> out = {99};
    EXPECT_HEATLAB_ERROR(davies_check(spec, none, one, 1.0), EmptySet);
    EXPECT_HEATLAB_ERROR(davies_check(spec, one, one, 0.0), InvalidArgument);
    EXPECT_HEATLAB_ERROR(davies_check(spec, one, out, 1.0), InvalidArgument);
    EXPECT_EQ(davies_check(spec, one, one, 1.0).verdict, Verdict::Holds);
}

// ---------------------------------------------------------------------------
// Volume inequalities

TEST(Doubling, FlatLineIsEquality) {
    const WeightedSpace s(SpaceSpec::interval(-10, 10, 512, PotentialSpec::zero()));
    const auto r = doubling_check(s, s.nearest_node(0.0), 2.0);
    EXPECT_EQ(r.verdict, Verdict::Holds);
    EXPECT_NEAR(r.worst_deficit, 0.0, 1e-9);
    EXPECT_EQ(doubling_check(s, s.nearest_node(0.0), 2.0, 2.0).verdict, Verdict::Violated);
}

TEST(Doubling, HoldsAcrossSuite) {
    for (const auto& [name, spec] : small_suite(256)) {
        const WeightedSpace s(spec);
        const double centre = name == "radial3" ? 0.0 : 0.5 * (s.lo() + s.hi());
        const auto r = doubling_check(s, s.nearest_node(centre), 1.0);
        EXPECT_NE(r.verdict, Verdict::Violated) << name;
    }
}

TEST(Doubling, ClippedBallSkipped) {
    const WeightedSpace s(SpaceSpec::interval(-10, 10, 256, PotentialSpec::zero()));
    const auto r = doubling_check(s, s.nearest_node(9.0), 2.0);
    EXPECT_EQ(r.verdict, Verdict::Skipped);
    EXPECT_TRUE(r.has_flag("ClippedBall"));
    EXPECT_HEATLAB_ERROR(doubling_check(s, 0, 0.0), InvalidArgument);
}

TEST(Doubling, ValuesForm) {
    EXPECT_EQ(doubling_check_values(1.0, 2.0, 1, 0.0, 0.0, 1.0).verdict, Verdict::Holds);
    EXPECT_EQ(doubling_check_values(1.0, 2.01, 1, 0.0, 0.0, 1.0).verdict, Verdict::Violated);
    // 2^{n+4A} with A = 1/4 in dimension 1 gives 4.
    EXPECT_EQ(doubling_check_values(1.0, 3.99, 1, 0.25, 0.0, 1.0).verdict, Verdict::Holds);
    EXPECT_HEATLAB_ERROR(doubling_check_values(0.0, 1.0, 1, 0.0, 0.0, 1.0), InvalidArgument);
    EXPECT_HEATLAB_ERROR(doubling_check_values(1.0, 1.0, 1, -1.0, 0.0, 1.0), InvalidArgument);
}

TEST(Annulus, FlatLineIsEquality) {
    const WeightedSpace s(SpaceSpec::interval(-10, 10, 512, PotentialSpec::zero()));
    const auto r = annulus_comparison_check(s, s.nearest_node(0.0), 0.5, 1.0, 2.0, 4.0);
    EXPECT_EQ(r.verdict, Verdict::Holds);
    EXPECT_NEAR(r.worst_deficit, 0.0, 1e-9);
}

TEST(Annulus, HoldsWithPotential) {
    const WeightedSpace s(SpaceSpec::interval(-10, 10, 512, PotentialSpec::linear(1.0)));
    const auto r = annulus_comparison_check(s, s.nearest_node(0.0), 0.5, 1.0, 2.0, 3.0);
    EXPECT_EQ(r.verdict, Verdict::Holds);
    EXPECT_GT(*r.extra("m"), 1.0);
}

TEST(Annulus, CoincidentAnnuliAndErrors) {
    const WeightedSpace s(SpaceSpec::interval(-10, 10, 256, PotentialSpec::quadratic(0.1)));
    const auto r = annulus_comparison_check(s, s.nearest_node(0.0), 1.0, 2.0, 1.0, 2.0);
    EXPECT_EQ(r.verdict, Verdict::Holds);
    EXPECT_NEAR(*r.extra("lhs"), 1.0, 1e-12);
    EXPECT_HEATLAB_ERROR(annulus_comparison_check(s, 0, 2.0, 1.0, 3.0, 4.0), InvalidArgument);
    EXPECT_EQ(annulus_comparison_check(s, s.nearest_node(9.0), 0.5, 1.0, 2.0, 3.0).verdict, Verdict::Skipped);
}

TEST(BallShift, SameCentreHoldsForSmallRadius) {
    const WeightedSpace s(SpaceSpec::interval(-6, 6, 256, PotentialSpec::quadratic(-1.0)));
    const std::size_t x = s.nearest_node(0.0);
    EXPECT_EQ(ball_shift_check(s, x, x, 0.5).verdict, Verdict::Holds);
}

TEST(BallShift, ExpandingSolitonHolds) {
    const WeightedSpace s(SpaceSpec::interval(-6, 6, 256, PotentialSpec::quadratic(-1.0)));
    for (double y : {-1.0, 0.5, 2.0}) {
        const auto r = ball_shift_check(s, s.nearest_node(0.0), s.nearest_node(y), 1.0);
        EXPECT_EQ(r.verdict, Verdict::Holds) << y;
    }
}

TEST(BallShift, ZeroCurvatureSkipped) {
    const WeightedSpace s(SpaceSpec::interval(-6, 6, 128, PotentialSpec::linear(1.0)));
    const auto r = ball_shift_check(s, s.nearest_node(0.0), s.nearest_node(1.0), 1.0);
    EXPECT_EQ(r.verdict, Verdict::Skipped);
    EXPECT_TRUE(r.has_flag("KZero"));
}

// ---------------------------------------------------------------------------
// Spectrum and Green's function

TEST(EigenLower, UnitIntervalGivesQuarterPiSquared) {
    const auto spec = spectral_of(SpaceSpec::interval(0, std::numbers::pi, 512, PotentialSpec::zero()));
    const auto r = eigen_lower_check(spec);
    EXPECT_EQ(r.verdict, Verdict::HoldsWithFitted);
    EXPECT_NEAR(*r.constant("C"), std::numbers::pi * std::numbers::pi / 4.0, 0.02 * std::numbers::pi * std::numbers::pi / 4.0);
    EXPECT_EQ(*r.extra("argmin_k"), 1.0);
}

TEST(EigenLower, ShiftInvariantAndPositive) {
    const auto a = eigen_lower_check(spectral_of(SpaceSpec::circle(10, 256)));
    EXPECT_GT(*a.constant("C"), 0.0);
    const auto base = SpaceSpec::interval(-4, 4, 256, PotentialSpec::quadratic(1.0));
    auto shifted = base;
    shifted.potential = base.potential.shifted(3.0);
    const auto b = eigen_lower_check(spectral_of(base));
    const auto c = eigen_lower_check(spectral_of(shifted));
    EXPECT_NEAR(*b.constant("C"), *c.constant("C"), 1e-8 * *b.constant("C"));
}

TEST(EigenLower, VerifyMode) {
    const auto spec = spectral_of(SpaceSpec::interval(0, std::numbers::pi, 256, PotentialSpec::zero()));
    const double C = *eigen_lower_check(spec).constant("C");
    EigenOptions opt;
    opt.constant = C;
    EXPECT_EQ(eigen_lower_check(spec, opt).verdict, Verdict::Holds);
    opt.constant = 2.0 * C;
    const auto bad = eigen_lower_check(spec, opt);
    EXPECT_EQ(bad.verdict, Verdict::Violated);
    EXPECT_NEAR(bad.worst_deficit, std::log(2.0), 1e-9);
    opt.constant = -1.0;
    EXPECT_HEATLAB_ERROR(eigen_lower_check(spec, opt), InvalidArgument);
}

TEST(EigenLower, PositiveCurvatureUsesBranch) {
    const auto spec = spectral_of(SpaceSpec::interval(-4, 4, 256, PotentialSpec::quadratic(-1.0)));
    const auto r = eigen_lower_check(spec);
    EXPECT_NE(r.verdict, Verdict::Violated);
    EigenOptions opt;
    opt.constant = *r.constant("C");
    EXPECT_EQ(eigen_lower_check(spec, opt).verdict, Verdict::Holds);
}

TEST(EigenLower, DirichletRejected) {
    const auto spec = spectral_of(SpaceSpec::interval(0, 1, 64, PotentialSpec::zero(), BoundaryKind::Dirichlet));
    EXPECT_HEATLAB_ERROR(eigen_lower_check(spec), InvalidCombination);
}

TEST(GreenEnvelope, RadialThreeSpaceRatioIsOneSixth) {
    const auto spec = spectral_of(SpaceSpec::radial(3, 40, 1024, PotentialSpec::zero(), BoundaryKind::Dirichlet));
    const auto& s = spec.space();
    std::vector<std::size_t> ys;
    for (double y : {2.0, 3.0, 4.0, 5.0}) ys.push_back(s.nearest_node(y));
    const auto r = green_envelope_check(spec, s.nearest_node(0.0), ys);
    ASSERT_EQ(r.verdict, Verdict::HoldsWithFitted) << r.flags.size();
    EXPECT_NEAR(*r.constant("c1"), 1.0 / 6.0, 0.02 / 6.0);
    EXPECT_NEAR(*r.constant("c2"), 1.0 / 6.0, 0.02 / 6.0);

    GreenEnvelopeOptions opt;
    opt.constants = std::vector<double>{*r.constant("c1"), *r.constant("c2")};
    EXPECT_EQ(green_envelope_check(spec, s.nearest_node(0.0), ys, opt).verdict, Verdict::Holds);
    opt.constants = std::vector<double>{2.0 * *r.constant("c1"), 2.0 * *r.constant("c2")};
    EXPECT_EQ(green_envelope_check(spec, s.nearest_node(0.0), ys, opt).verdict, Verdict::Violated);
}

TEST(GreenEnvelope, FlatLineIsDivergent) {
    const auto spec = spectral_of(SpaceSpec::interval(-20, 20, 256, PotentialSpec::zero()));
    const auto& s = spec.space();
    const std::vector<std::size_t> ys = {s.nearest_node(1.0), s.nearest_node(2.0)};
    const auto r = green_envelope_check(spec, s.nearest_node(0.0), ys);
    EXPECT_TRUE(r.has_flag("DivergentGreen"));
    EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Parabolicity, LineParabolicThreeSpaceNot) {
    const WeightedSpace line(SpaceSpec::interval(-20, 20, 256, PotentialSpec::zero()));
    EXPECT_EQ(parabolicity_probe(line, line.nearest_node(0.0)).verdict, Parabolicity::Parabolic);
    const WeightedSpace r3(SpaceSpec::radial(3, 40, 512, PotentialSpec::zero()));
    const auto res = parabolicity_probe(r3, 0);
    EXPECT_EQ(res.verdict, Parabolicity::Nonparabolic);
    EXPECT_TRUE(res.cross_check_agrees);
    EXPECT_EQ(to_report(res).verdict, Verdict::Holds);
}
