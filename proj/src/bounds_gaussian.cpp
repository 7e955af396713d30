#include "heatlab/bounds.hpp"

#include "heatlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_samples(std::span<const KernelSample> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "kernel check without samples");
}

void note_fit(BoundReport& report, const FitResult& fit) {
    if (fit.degenerate) report.flags.push_back("DegenerateFit");
    for (const auto& name : fit.dropped) report.flags.push_back("Dropped:" + name);
}

void note_clipping(BoundReport& report, std::span<const KernelSample> samples) {
    if (std::any_of(samples.begin(), samples.end(), [](const KernelSample& s) { return s.clipped; }))
        report.flags.push_back("ClippedBall");
}

double max_excess(const std::vector<DeficitSample>& data, const std::vector<double>& c) {
    double worst = -kInf;
    for (const auto& d : data) {
        double budget = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) budget += c[j] * d.basis[j];
        worst = std::max(worst, d.deficit - budget);
    }
    return worst;
}

// Slope of log(H Vx) against log t on near-diagonal samples in the lower half
// of the sampled times; NaN when fewer than two times are available.
double small_time_slope(std::span<const KernelSample> samples, double inflate) {
    std::map<double, std::vector<double>> by_time;
    for (const auto& s : samples) {
        if (s.d * s.d > s.t || !(s.H > 0.0)) continue;
        by_time[s.t].push_back(std::log(inflate * s.H * s.Vx));
    }
    if (by_time.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t keep = std::max<std::size_t>(2, (by_time.size() + 1) / 2);
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t taken = 0;
    for (const auto& [t, values] : by_time) {
        if (taken++ == keep) break;
        for (double v : values) {
            xs.push_back(std::log(t));
            ys.push_back(v);
        }
    }
    return ols_slope(xs, ys);
}

constexpr double kLowerShapeLimit = 0.25;

} // namespace

BoundReport gaussian_upper_check(std::span<const KernelSample> samples, const GaussianOptions& opt) {
    require_samples(samples);
    if (!(opt.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    BoundReport report;
    report.id = "gaussian_upper";
    report.budget_form = "log c1 + c2 A + c3 (1+A) sqrt(kappa t)";
    note_clipping(report, samples);

    std::vector<DeficitSample> data;
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t nonpositive = 0;
    for (const auto& s : samples) {
        const double H = opt.inflate * s.H;
        if (!(H > 0.0)) {
            ++nonpositive;
            continue;
        }
        const double g = s.d * s.d / s.t;
        const double lambda = std::log(H) + 0.5 * std::log(s.Vx * s.Vy) + g / (4.0 + opt.epsilon);
        data.push_back({lambda, {1.0, s.A, (1.0 + s.A) * std::sqrt(s.kappa * s.t)}});
        xs.push_back(g);
        ys.push_back(lambda);
    }
    report.sample_count = data.size();
    if (nonpositive > 0) report.extras.push_back({"nonpositive_kernel_values", double(nonpositive)});
    if (data.empty()) {
        report.verdict = Verdict::Holds;
        report.worst_deficit = -kInf;
        return report;
    }
    double sup_lambda = -kInf;
    for (const auto& d : data) sup_lambda = std::max(sup_lambda, d.deficit);
    report.extras.push_back({"sup_lambda", sup_lambda});

    if (opt.constants) {
        const auto& c = *opt.constants;
        if (c.size() != 3 || !(c[0] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "upper bound needs (c1 > 0, c2, c3)");
        report.constants = {{"c1", c[0]}, {"c2", c[1]}, {"c3", c[2]}};
        report.worst_deficit = max_excess(data, {std::log(c[0]), c[1], c[2]});
        report.verdict = report.worst_deficit <= opt.margin ? Verdict::Holds : Verdict::Violated;
        return report;
    }

    const auto fit = fit_constants(data, BudgetForm::with_intercept({"log_c1", "c2", "c3"}));
    note_fit(report, fit);
    report.constants = {{"c1", std::exp(fit.coefficients[0])},
                        {"c2", fit.coefficients[1]},
                        {"c3", fit.coefficients[2]}};
    report.worst_deficit = max_excess(data, fit.coefficients);

    bool shape_ok = std::isfinite(sup_lambda);
    std::set<double> distinct(xs.begin(), xs.end());
    if (distinct.size() >= 3) {
        const double slope = ols_slope(xs, ys);
        report.extras.push_back({"shape_slope", slope});
        shape_ok = shape_ok && slope <= 1e-6;
    } else {
        report.flags.push_back("ShapeUntested");
    }
    report.verdict = shape_ok ? Verdict::HoldsWithFitted : Verdict::Violated;
    return report;
}

BoundReport gaussian_lower_check(std::span<const KernelSample> samples, const GaussianOptions& opt) {
    require_samples(samples);
    BoundReport report;
    report.id = "gaussian_lower";
    report.budget_form = "-log c4 + c5 (A'^2 + kappa) t + d^2 / (c6 t)";
    note_clipping(report, samples);
    report.sample_count = samples.size();

    std::vector<DeficitSample> data;
    bool nonpositive = false;
    for (const auto& s : samples) {
        const double H = opt.inflate * s.H;
        if (!(H > 0.0)) {
            nonpositive = true;
            continue;
        }
        data.push_back({-std::log(H * s.Vx), {1.0, (s.Aprime * s.Aprime + s.kappa) * s.t, s.d * s.d / s.t}});
    }
    if (nonpositive) report.flags.push_back("NonPositiveKernel");

    const double slope = small_time_slope(samples, opt.inflate);
    if (std::isnan(slope)) report.flags.push_back("ShapeUntested");
    else report.extras.push_back({"shape_slope", slope});
    const bool shape_ok = !nonpositive && !(slope >= kLowerShapeLimit);

    if (opt.constants) {
        const auto& c = *opt.constants;
        if (c.size() != 3 || !(c[0] > 0.0) || !(c[2] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "lower bound needs (c4 > 0, c5, c6 > 0)");
        report.constants = {{"c4", c[0]}, {"c5", c[1]}, {"c6", c[2]}};
        report.worst_deficit = nonpositive ? kInf : max_excess(data, {-std::log(c[0]), c[1], 1.0 / c[2]});
        report.verdict = report.worst_deficit <= opt.margin ? Verdict::Holds : Verdict::Violated;
        return report;
    }
    if (data.empty()) {
        report.verdict = Verdict::Violated;
        report.worst_deficit = kInf;
        return report;
    }

    const auto fit = fit_constants(data, BudgetForm::with_intercept({"log_inv_c4", "c5", "inv_c6"}));
    note_fit(report, fit);
    const double inv_c6 = fit.coefficients[2];
    report.constants = {{"c4", std::exp(-fit.coefficients[0])},
                        {"c5", fit.coefficients[1]},
                        {"c6", inv_c6 > 0.0 ? 1.0 / inv_c6 : kInf}};
    report.worst_deficit = nonpositive ? kInf : max_excess(data, fit.coefficients);

    // Saturation of H Vx e^{c5 (A'^2+kappa) t} on the diagonal over the later half of the times.
    std::map<double, double> diag;
    for (const auto& s : samples)
        if (s.x == s.y && s.H > 0.0)
            diag[s.t] = std::log(opt.inflate * s.H * s.Vx) + fit.coefficients[1] * (s.Aprime * s.Aprime + s.kappa) * s.t;
    if (diag.size() >= 2) {
        double lo = kInf;
        double hi = -kInf;
        std::size_t index = 0;
        for (const auto& [t, v] : diag) {
            if (2 * index++ < diag.size()) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (std::isfinite(lo)) report.extras.push_back({"saturation_ratio", std::exp(hi - lo)});
    }
    report.verdict = shape_ok ? Verdict::HoldsWithFitted : Verdict::Violated;
    return report;
}

BoundReport alt_lower_check(std::span<const KernelSample> samples, const GaussianOptions& opt) {
    require_samples(samples);
    BoundReport report;
    report.id = "alt_lower";
    report.budget_form = "-log c1 + c2 kappa t + d^2 / (c3 t); K ((1+A^2) kappa t + 1 + d^2/t)";
    note_clipping(report, samples);
    report.sample_count = samples.size();

    std::vector<DeficitSample> bounded;
    std::vector<DeficitSample> parameterised;
    bool nonpositive = false;
    for (const auto& s : samples) {
        const double H = opt.inflate * s.H;
        if (!(H > 0.0)) {
            nonpositive = true;
            continue;
        }
        const double y = -std::log(H * s.Vx);
        const double g = s.d * s.d / s.t;
        bounded.push_back({y, {1.0, s.kappa * s.t, g}});
        parameterised.push_back({y, {(1.0 + s.A * s.A) * s.kappa * s.t + 1.0 + g}});
    }
    if (nonpositive) report.flags.push_back("NonPositiveKernel");
    const double slope = small_time_slope(samples, opt.inflate);
    if (std::isnan(slope)) report.flags.push_back("ShapeUntested");
    else report.extras.push_back({"shape_slope", slope});
    const bool shape_ok = !nonpositive && !(slope >= kLowerShapeLimit);

    if (opt.constants) {
        const auto& c = *opt.constants;
        if ((c.size() != 3 && c.size() != 4) || !(c[0] > 0.0) || !(c[2] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "alternate lower bound needs (c1 > 0, c2, c3 > 0[, K])");
        report.constants = {{"c1", c[0]}, {"c2", c[1]}, {"c3", c[2]}};
        double worst = nonpositive ? kInf : max_excess(bounded, {-std::log(c[0]), c[1], 1.0 / c[2]});
        if (c.size() == 4) {
            report.constants.push_back({"K", c[3]});
            if (!nonpositive) worst = std::max(worst, max_excess(parameterised, {c[3]}));
        }
        report.worst_deficit = worst;
        report.verdict = worst <= opt.margin ? Verdict::Holds : Verdict::Violated;
        return report;
    }
    if (bounded.empty()) {
        report.verdict = Verdict::Violated;
        report.worst_deficit = kInf;
        return report;
    }

    const auto fit = fit_constants(bounded, BudgetForm::with_intercept({"log_inv_c1", "c2", "inv_c3"}));
    note_fit(report, fit);
    BudgetForm single;
    single.names = {"K"};
    single.nonnegative = {true};
    const auto kfit = fit_constants(parameterised, single);
    const double inv_c3 = fit.coefficients[2];
    report.constants = {{"c1", std::exp(-fit.coefficients[0])},
                        {"c2", fit.coefficients[1]},
                        {"c3", inv_c3 > 0.0 ? 1.0 / inv_c3 : kInf},
                        {"K", kfit.coefficients[0]}};
    report.worst_deficit = nonpositive ? kInf
                                       : std::max(max_excess(bounded, fit.coefficients),
                                                  max_excess(parameterised, kfit.coefficients));
    report.verdict = shape_ok ? Verdict::HoldsWithFitted : Verdict::Violated;
    return report;
}

SharpnessFit sharpness_decay_fit(const SpectralData& spec, std::size_t x, std::span<const double> ts) {
    if (ts.size() < 5) throw Error(ErrorCode::EmptySamples, "sharpness fit needs at least five times");
    const WeightedSpace& space = spec.space();
    std::vector<double> X;
    std::vector<double> y;
    for (double t : ts) {
        const double H = heat_kernel(spec, x, x, t);
        const double V = ball_volume(space, x, std::sqrt(t)).value;
        if (!(H > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel underflow in sharpness fit");
        X.insert(X.end(), {1.0, t, std::sqrt(t), std::log(t)});
        y.push_back(std::log(H * V));
    }
    SharpnessFit out;
    out.coefficients = least_squares(X, ts.size(), 4, y);
    out.c5 = -out.coefficients[1];
    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double model = 0.0;
        for (std::size_t j = 0; j < 4; ++j) model += out.coefficients[j] * X[i * 4 + j];
        ss += (y[i] - model) * (y[i] - model);
    }
    out.rms = std::sqrt(ss / static_cast<double>(ts.size()));
    return out;
}

} // namespace heatlab
