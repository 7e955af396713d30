#pragma once

#include "heatlab/fit.hpp"
#include "heatlab/spectral.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heatlab {

/// Skipped marks a precondition gate (clipped ball, K = 0, inconclusive tail);
/// it never counts as a violation.
enum class Verdict { Holds, HoldsWithFitted, Violated, Skipped };

std::string to_string(Verdict v);

struct NamedValue {
    std::string name;
    double value = 0.0;
};

struct BoundReport {
    std::string id;
    std::size_t sample_count = 0;
    /// max over samples of (lhs - rhs) on a log scale with the constants in
    /// effect; <= 0 when the inequality holds.
    double worst_deficit = 0.0;
    std::vector<NamedValue> constants;
    std::string budget_form;
    std::vector<NamedValue> extras;
    std::vector<std::string> flags;
    Verdict verdict = Verdict::Holds;
    /// Filled by refinement_stability; NaN until then.
    double stability_pct = std::numeric_limits<double>::quiet_NaN();

    std::optional<double> constant(const std::string& name) const;
    std::optional<double> extra(const std::string& name) const;
    bool has_flag(const std::string& flag) const;
};

/// Largest relative change (percent) of the shared fitted constants between
/// a coarse report and its h/2 counterpart. Constants whose magnitudes stay
/// below `floor` on both levels count as unchanged.
double refinement_stability(const BoundReport& coarse, const BoundReport& fine, double floor = 1e-6);

// ---------------------------------------------------------------------------
// Gaussian kernel bounds

struct GaussianOptions {
    /// Upper bound only: the Gaussian exponent is d^2 / ((4 + epsilon) t).
    double epsilon = 1.0;
    /// Verify mode: check against these constants instead of fitting them.
    /// Upper: (c1, c2, c3); lower: (c4, c5, c6); alt: (c1, c2, c3) of the bounded form.
    std::optional<std::vector<double>> constants;
    /// Extra slack on a log scale, verify mode only.
    double margin = 0.0;
    /// Multiplies every H before checking (constructed counterexamples).
    double inflate = 1.0;
};

/// H <= c1 e^{c2 A + c3 (1+A) sqrt(kappa t)} (Vx Vy)^{-1/2} exp(-d^2/((4+eps) t)).
/// Shape test: Lambda must not grow with d^2/t.
BoundReport gaussian_upper_check(std::span<const KernelSample> samples, const GaussianOptions& opt = {});

/// H >= c4 e^{-c5 (A'^2 + kappa) t} Vx^{-1} exp(-d^2/(c6 t)).
/// Shape test: near the diagonal at small t, H Vx must not grow like a power of t.
BoundReport gaussian_lower_check(std::span<const KernelSample> samples, const GaussianOptions& opt = {});

/// Bounded-f form c1 e^{-c2 kappa t} Vx^{-1} exp(-d^2/(c3 t)) plus the
/// A-parameterised form exp[-K ((1+A^2) kappa t + 1 + d^2/t)] Vx^{-1}, K = c5 e^{c6 A}.
BoundReport alt_lower_check(std::span<const KernelSample> samples, const GaussianOptions& opt = {});

struct SharpnessFit {
    double c5 = 0.0;
    /// Least-squares coefficients on {1, t, sqrt t, log t}.
    std::vector<double> coefficients;
    double rms = 0.0;
};

/// Decay rate of H(x,x,t) V_f(B_x(sqrt t)) ~ e^{-c5 t} over the given times,
/// with sub-exponential factors absorbed by the nuisance terms.
SharpnessFit sharpness_decay_fit(const SpectralData& spec, std::size_t x, std::span<const double> ts);

// ---------------------------------------------------------------------------
// Harnack inequality

/// Q = B_x(r) x (s - r^2, s), Q- = delta B x (s - delta r^2, s - eta r^2),
/// Q+ = delta B x (s - eps r^2, s), with 0 < eps < eta < delta < 1.
struct ParabolicCylinders {
    double center = 0.0;
    double r = 1.0;
    double s = 2.0;
    double eps = 0.25;
    double eta = 0.5;
    double delta = 0.75;
    /// Sample times per sub-cylinder (midpoints of equal sub-intervals).
    int time_points = 8;

    /// Throws InvalidArgument unless 0 < eps < eta < delta < 1, r > 0, s > delta r^2.
    void validate() const;
};

struct HarnackObservation {
    double log_ratio = 0.0;   // log sup_{Q-} u - log inf_{Q+} u
    double budget_arg = 0.0;  // (A'^2 + kappa) r^2
    double sup_minus = 0.0;
    double inf_plus = 0.0;
    std::size_t nodes = 0;
    /// Smallest c with log(u(x,s)/u(y,t)) <= c [(A'^2+kappa+1/R^2+1/s)(t-s) + d^2/(t-s)]
    /// over pairs from Q- x Q+ (R = r).
    double two_point_c = 0.0;
};

/// Evolves u0 and tabulates both Harnack quantities. Throws DegenerateCylinder
/// when delta B holds no node, InvalidArgument for u0 < 0 or u0 == 0.
HarnackObservation harnack_observe(const SpectralData& spec, const ParabolicCylinders& cyl,
                                   std::span<const double> u0);

struct HarnackOptions {
    /// Verify mode: (c1, c2) of sup u <= c1 e^{c2 (A'^2+kappa) r^2} inf u.
    std::optional<std::vector<double>> constants;
    double margin = 0.0;
};

BoundReport harnack_check(const SpectralData& spec, const ParabolicCylinders& cyl,
                          std::span<const double> u0, const HarnackOptions& opt = {});

/// floor + three Gaussian bumps at random positions, heights and widths.
std::vector<double> random_positive_data(const WeightedSpace& space, std::uint64_t seed,
                                         double floor = 0.05);

struct HarnackStudyOptions {
    std::size_t calibration_trials = 60;
    std::size_t holdout_trials = 20;
    std::uint64_t seed = 1;
    /// Holdout ratios may exceed the calibrated budget by this factor at most.
    double holdout_factor = 1.2;
};

struct HarnackStudy {
    BoundReport report;
    std::vector<HarnackObservation> calibration;
    std::vector<HarnackObservation> holdout;
    /// max over holdout of log_ratio - log budget.
    double worst_holdout_excess = 0.0;
};

/// Fits (c1, c2) on calibration data (each trial a random u0 on every cylinder)
/// and checks a disjoint holdout set against the fit times holdout_factor.
HarnackStudy harnack_study(const SpectralData& spec, std::span<const ParabolicCylinders> cylinders,
                           const HarnackStudyOptions& opt = {});

// ---------------------------------------------------------------------------
// Constant-free and volume inequalities

/// sum_{B1} sum_{B2} H mu mu <= V(B1)^{1/2} V(B2)^{1/2} exp(-lambda t - d(B1,B2)^2/(4t)),
/// lambda the bottom of the spectrum. `inflate` scales the left side. Throws EmptySet.
/// The left side is compared up to the round-off of the spectral sum; when the
/// right side lies below that level the report carries RoundOffLimited.
BoundReport davies_check(const SpectralData& spec, std::span<const std::size_t> B1,
                         std::span<const std::size_t> B2, double t, double inflate = 1.0);

/// V(B_x(2r)) <= 2^{n+4A} e^{2(n-1+4A) sqrt(K) r} V(B_x(r)) with A = sup |f|
/// over B_x(2r) and K = kappa. Skipped (ClippedBall) when B_x(2r) leaves the domain.
/// `inflate` scales V(B_x(2r)).
BoundReport doubling_check(const WeightedSpace& space, std::size_t x, double r, double inflate = 1.0);

/// Same inequality on given volumes.
BoundReport doubling_check_values(double v_r, double v_2r, int n, double A, double K, double r);

/// Lemma-type relative annulus comparison
/// V(B(R2) \ B(R1)) / V(B(r2) \ B(r1)) <= [V^m(R2) - V^m(R1)] / [V^m(r2) - V^m(r1)],
/// m = n + 4A, model space of curvature -K, A = sup |f| over B_x(R2).
BoundReport annulus_comparison_check(const WeightedSpace& space, std::size_t x, double r1, double r2,
                                     double R1, double R2);

/// V(B_x(r)) <= e^{(n-1+4A) sqrt(K) (d+r)} r^{-(n+4A)} V(B_y(r)), A = sup |f| over
/// B_y(d+r). Skipped with KZero when kappa = 0.
BoundReport ball_shift_check(const WeightedSpace& space, std::size_t x, std::size_t y, double r);

// ---------------------------------------------------------------------------
// Spectrum and Green's function

struct EigenOptions {
    /// Largest mode used; 0 means N/4.
    std::size_t k_max = 0;
    /// Verify mode: check every mode against this C instead of fitting it.
    std::optional<double> constant;
};

/// kappa = 0: lambda_k >= C (k+1)^{2/n} / d^2. kappa > 0:
/// lambda_k >= (C/d^2) [(k+1) e^{-C sqrt(kappa) d}]^{2/(n+4B)}, B = max f.
/// C is fitted as the least value implied over k = 1..k_max.
BoundReport eigen_lower_check(const SpectralData& spec, const EigenOptions& opt = {});

struct VolumeTail {
    enum class Kind { Power, Exponential };
    Kind kind = Kind::Power;
    /// Power: V ~ c rho^p; exponential: V ~ c e^{beta rho}.
    double rate = 0.0;
    double log_c = 0.0;
    double rms = 0.0;
    /// Whether int^inf V(B(sqrt t))^{-1} dt converges for this tail.
    bool convergent = false;
};

struct TailAnalysis {
    std::vector<VolumeTail> candidates;
    /// Candidates with rms <= max(4 * best, 1e-4).
    std::vector<VolumeTail> accepted;
    bool conclusive = true;
    bool convergent = false;
    double rho_max = 0.0;
};

/// Fits both tails on the last decade of unclipped radii around `center`.
TailAnalysis analyze_volume_tail(const WeightedSpace& space, std::size_t center);

/// I(r) = int_{r^2}^inf V_f(B_x(sqrt t))^{-1} dt: quadrature up to the largest
/// unclipped radius, fitted tail beyond. Infinite when the tail diverges.
double envelope_integral(const WeightedSpace& space, std::size_t x, double r, const TailAnalysis& tail);

struct GreenEnvelopeOptions {
    /// Verify mode: (c1, c2) instead of the fitted ratio range.
    std::optional<std::vector<double>> constants;
};

/// c1 I(r) <= G(x, y) <= c2 I(r), r = d(x, y), over the given y nodes. G is the
/// far-field corrected Dirichlet Green's function. c1, c2 are the extreme ratios.
BoundReport green_envelope_check(const SpectralData& spec, std::size_t x, std::span<const std::size_t> ys,
                                 const GreenEnvelopeOptions& opt = {});

enum class Parabolicity { Parabolic, Nonparabolic, InconclusiveTail };

std::string to_string(Parabolicity p);

struct ParabolicityResult {
    Parabolicity verdict = Parabolicity::InconclusiveTail;
    TailAnalysis tail;
    /// G_D(x,x) on the domain widened twofold over G_D(x,x) on the original.
    double widening_ratio = 0.0;
    bool cross_check_agrees = true;
};

ParabolicityResult parabolicity_probe(const WeightedSpace& space, std::size_t center);

BoundReport to_report(const ParabolicityResult& result);

} // namespace heatlab
