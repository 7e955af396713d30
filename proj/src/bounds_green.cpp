#include "heatlab/bounds.hpp"

#include "heatlab/error.hpp"
#include "heatlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/lambert_w.hpp>
#include <fmt/format.h>

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kTailPoints = 64;
constexpr std::size_t kQuadraturePanels = 2048;

double unclipped_radius(const WeightedSpace& space, std::size_t center) {
    const double x = space.node(center);
    switch (space.kind()) {
    case GeometryKind::Interval: return std::min(x - space.lo(), space.hi() - x);
    case GeometryKind::Circle: return 0.5 * space.spec().extent();
    case GeometryKind::Radial: return space.hi() - x;
    }
    return 0.0;
}

VolumeTail fit_tail(VolumeTail::Kind kind, std::span<const double> rho, std::span<const double> vol) {
    std::vector<double> X;
    std::vector<double> y;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        X.push_back(1.0);
        X.push_back(kind == VolumeTail::Kind::Power ? std::log(rho[i]) : rho[i]);
        y.push_back(std::log(vol[i]));
    }
    const auto coef = least_squares(X, rho.size(), 2, y);
    VolumeTail tail;
    tail.kind = kind;
    tail.log_c = coef[0];
    tail.rate = coef[1];
    double ss = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double r = y[i] - coef[0] - coef[1] * X[2 * i + 1];
        ss += r * r;
    }
    tail.rms = std::sqrt(ss / static_cast<double>(rho.size()));
    // int^inf V(B(sqrt t))^{-1} dt = int^inf 2 rho / V(rho) d rho.
    tail.convergent = kind == VolumeTail::Kind::Power ? tail.rate > 2.0 + 1e-3 : tail.rate > 1e-3 / rho.back();
    return tail;
}

double tail_integral(const VolumeTail& tail, double rho, double volume) {
    if (!tail.convergent) return kInf;
    if (tail.kind == VolumeTail::Kind::Power) return 2.0 * rho * rho / (volume * (tail.rate - 2.0));
    const double b = tail.rate;
    return 2.0 / volume * (rho / b + 1.0 / (b * b));
}

} // namespace

BoundReport eigen_lower_check(const SpectralData& spec, const EigenOptions& opt) {
    const WeightedSpace& space = spec.space();
    if (space.boundary() == BoundaryKind::Dirichlet)
        throw Error(ErrorCode::InvalidCombination, "eigenvalue lower bound needs a closed (Neumann/periodic) space");
    const std::size_t N = spec.size();
    std::size_t k_max = opt.k_max == 0 ? N / 4 : opt.k_max;
    k_max = std::min(k_max, N - 1);
    const double n = space.dim();
    const double d = space.diameter();
    const double kappa = curvature_profile(space).kappa;
    const auto f = space.potential();
    const double B = *std::max_element(f.begin(), f.end());

    BoundReport report;
    report.id = "eigen_lower";
    report.sample_count = k_max;
    report.extras = {{"diameter", d}, {"kappa", kappa}, {"B", B}};

    if (kappa == 0.0) {
        report.budget_form = "C (k+1)^{2/n} / d^2";
    } else {
        report.budget_form = "(C/d^2) [(k+1) e^{-C sqrt(K) d}]^{2/(n+4B)}";
        if (!(n + 4.0 * B > 0.0)) {
            report.verdict = Verdict::Skipped;
            report.flags.push_back("ExponentUndefined");
            return report;
        }
    }
    const double p = kappa == 0.0 ? 2.0 / n : 2.0 / (n + 4.0 * B);
    const double a = p * std::sqrt(kappa) * d;

    if (opt.constant) {
        const double C = *opt.constant;
        if (!(C > 0.0)) throw Error(ErrorCode::InvalidArgument, "eigenvalue bound needs C > 0");
        double worst = -kInf;
        for (std::size_t k = 1; k <= k_max; ++k) {
            const double b = spec.eigenvalue(k) * d * d / std::pow(k + 1.0, p);
            // log of budget over eigenvalue: log C - a C - log b.
            worst = std::max(worst, std::log(C) - a * C - std::log(b));
        }
        report.constants = {{"C", C}};
        report.worst_deficit = worst;
        report.verdict = worst <= 1e-12 ? Verdict::Holds : Verdict::Violated;
        return report;
    }

    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double b = spec.eigenvalue(k) * d * d / std::pow(k + 1.0, p);
        double c = b;
        if (kappa > 0.0) {
            // Largest C on the increasing branch of C e^{-aC} <= b.
            if (a * b >= std::exp(-1.0)) continue;
            c = -boost::math::lambert_w0(-a * b) / a;
        }
        if (c < best) {
            best = c;
            arg = k;
        }
    }
    if (!std::isfinite(best)) {
        best = 1.0 / a;
        report.flags.push_back("UnconstrainedBranch");
    }
    report.constants = {{"C", best}};
    report.extras.push_back({"argmin_k", static_cast<double>(arg)});
    report.worst_deficit = 0.0;
    report.verdict = best > 0.0 ? Verdict::HoldsWithFitted : Verdict::Violated;
    return report;
}

TailAnalysis analyze_volume_tail(const WeightedSpace& space, std::size_t center) {
    TailAnalysis out;
    out.rho_max = unclipped_radius(space, center) * (1.0 - 1e-9);
    const double rho_min = out.rho_max / 10.0;
    if (!(rho_min >= 4.0 * space.h()))
        throw Error(ErrorCode::InvalidArgument, "domain too small for a decade of volume growth");
    std::vector<double> rho(kTailPoints);
    for (std::size_t i = 0; i < kTailPoints; ++i)
        rho[i] = rho_min * std::pow(10.0, static_cast<double>(i) / (kTailPoints - 1));
    rho.back() = out.rho_max;
    const auto vol = parallel::ball_volume_profile(space, center, rho);

    out.candidates.push_back(fit_tail(VolumeTail::Kind::Power, rho, vol));
    out.candidates.push_back(fit_tail(VolumeTail::Kind::Exponential, rho, vol));
    double best = kInf;
    for (const auto& c : out.candidates) best = std::min(best, c.rms);
    const double cut = std::max(4.0 * best, 1e-4);
    for (const auto& c : out.candidates)
        if (c.rms <= cut) out.accepted.push_back(c);
    std::sort(out.accepted.begin(), out.accepted.end(),
              [](const VolumeTail& a, const VolumeTail& b) { return a.rms < b.rms; });
    out.convergent = out.accepted.front().convergent;
    for (const auto& c : out.accepted) out.conclusive = out.conclusive && c.convergent == out.convergent;
    return out;
}

double envelope_integral(const WeightedSpace& space, std::size_t x, double r, const TailAnalysis& tail) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "envelope radius must be positive");
    if (!tail.convergent) return kInf;
    const double top = tail.rho_max;
    const double v_top = ball_volume(space, x, top).value;
    double body = 0.0;
    if (r < top) {
        // Simpson in u = log rho of 2 rho^2 / V(rho).
        const double u0 = std::log(r);
        const double du = (std::log(top) - u0) / kQuadraturePanels;
        std::vector<double> rho(kQuadraturePanels + 1);
        for (std::size_t i = 0; i <= kQuadraturePanels; ++i) rho[i] = std::exp(u0 + du * static_cast<double>(i));
        rho.back() = top;
        const auto vol = parallel::ball_volume_profile(space, x, rho);
        for (std::size_t i = 0; i <= kQuadraturePanels; ++i) {
            const double w = (i == 0 || i == kQuadraturePanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            body += w * 2.0 * rho[i] * rho[i] / vol[i];
        }
        body *= du / 3.0;
        return body + tail_integral(tail.accepted.front(), top, v_top);
    }
    return tail_integral(tail.accepted.front(), r, ball_volume(space, x, r).value);
}

BoundReport green_envelope_check(const SpectralData& spec, std::size_t x, std::span<const std::size_t> ys,
                                 const GreenEnvelopeOptions& opt) {
    if (ys.empty()) throw Error(ErrorCode::EmptySet, "Green's envelope check needs target nodes");
    const WeightedSpace& space = spec.space();
    BoundReport report;
    report.id = "green_envelope";
    report.budget_form = "c1 I(r) <= G <= c2 I(r), I(r) = int_{r^2}^inf V(B(sqrt t))^{-1} dt";
    report.sample_count = ys.size();

    const auto tail = analyze_volume_tail(space, x);
    report.extras = {{"tail_rate", tail.accepted.front().rate},
                     {"tail_exponential", tail.accepted.front().kind == VolumeTail::Kind::Exponential ? 1.0 : 0.0}};
    if (!tail.conclusive) {
        report.verdict = Verdict::Skipped;
        report.flags.push_back("InconclusiveTail");
        return report;
    }

    double lo = kInf;
    double hi = 0.0;
    bool divergent_green = false;
    bool finite_green = false;
    for (std::size_t y : ys) {
        if (y == x) throw Error(ErrorCode::InvalidArgument, "envelope needs y != x");
        const auto G = green_function_far_field(spec, x, y);
        divergent_green = divergent_green || G.divergent;
        finite_green = finite_green || !G.divergent;
        if (G.divergent || !tail.convergent) continue;
        const double I = envelope_integral(space, x, space.distance(x, y), tail);
        const double ratio = G.value / I;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }

    if (!tail.convergent) {
        report.flags.push_back("DivergentGreen");
        report.verdict = finite_green ? Verdict::Violated : Verdict::Holds;
        report.worst_deficit = 0.0;
        return report;
    }
    if (divergent_green) {
        report.flags.push_back("GreenDivergesWithFiniteEnvelope");
        report.verdict = Verdict::Violated;
        return report;
    }
    if (opt.constants) {
        const auto& c = *opt.constants;
        if (c.size() != 2 || !(c[0] > 0.0) || !(c[1] >= c[0]))
            throw Error(ErrorCode::InvalidArgument, "Green's envelope needs 0 < c1 <= c2");
        report.constants = {{"c1", c[0]}, {"c2", c[1]}};
        report.worst_deficit = std::max(std::log(c[0]) - std::log(lo), std::log(hi) - std::log(c[1]));
        report.verdict = report.worst_deficit <= 1e-12 ? Verdict::Holds : Verdict::Violated;
        return report;
    }
    report.constants = {{"c1", lo}, {"c2", hi}};
    report.extras.push_back({"ratio_spread", hi / lo});
    report.worst_deficit = 0.0;
    report.verdict = lo > 0.0 ? Verdict::HoldsWithFitted : Verdict::Violated;
    return report;
}

std::string to_string(Parabolicity p) {
    switch (p) {
    case Parabolicity::Parabolic: return "Parabolic";
    case Parabolicity::Nonparabolic: return "Nonparabolic";
    case Parabolicity::InconclusiveTail: return "InconclusiveTail";
    }
    return "?";
}

ParabolicityResult parabolicity_probe(const WeightedSpace& space, std::size_t center) {
    ParabolicityResult out;
    out.tail = analyze_volume_tail(space, center);
    if (!out.tail.conclusive) out.verdict = Parabolicity::InconclusiveTail;
    else out.verdict = out.tail.convergent ? Parabolicity::Nonparabolic : Parabolicity::Parabolic;

    if (space.kind() == GeometryKind::Circle || !space.spec().potential.analytic()) {
        out.widening_ratio = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    // Dirichlet Green's function at the centre before and after doubling the domain.
    auto diagonal_green = [&](const SpaceSpec& spec) {
        auto sp = std::make_shared<const WeightedSpace>(spec.with_boundary(BoundaryKind::Dirichlet));
        const auto op = assemble(sp);
        const std::size_t c = sp->nearest_node(space.node(center));
        return green_function_direct(op, c)[c];
    };
    const double base = diagonal_green(space.spec());
    const double wide = diagonal_green(space.spec().widened(2.0));
    out.widening_ratio = wide / base;
    const bool suggests_parabolic = out.widening_ratio > 1.25;
    if (out.verdict != Parabolicity::InconclusiveTail)
        out.cross_check_agrees = suggests_parabolic == (out.verdict == Parabolicity::Parabolic);
    return out;
}

BoundReport to_report(const ParabolicityResult& result) {
    BoundReport report;
    report.id = "parabolicity";
    report.budget_form = "int_1^inf V(B(sqrt t))^{-1} dt";
    report.sample_count = kTailPoints;
    report.flags.push_back(to_string(result.verdict));
    for (const auto& c : result.tail.candidates) {
        const std::string name = c.kind == VolumeTail::Kind::Power ? "power" : "exponential";
        report.extras.push_back({name + "_rate", c.rate});
        report.extras.push_back({name + "_rms", c.rms});
    }
    report.extras.push_back({"widening_ratio", result.widening_ratio});
    if (!result.cross_check_agrees) report.flags.push_back("CrossCheckDisagrees");
    report.verdict = result.verdict == Parabolicity::InconclusiveTail ? Verdict::Skipped : Verdict::Holds;
    return report;
}

} // namespace heatlab
