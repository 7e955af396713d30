#include "heatlab/bounds.hpp"

#include "heatlab/error.hpp"
#include "heatlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kTwoPointNodes = 48;

std::vector<double> midpoints(double a, double b, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    const double step = (b - a) / count;
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = a + (k + 0.5) * step;
    return out;
}

} // namespace

void ParabolicCylinders::validate() const {
    if (!(0.0 < eps && eps < eta && eta < delta && delta < 1.0))
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("cylinder parameters need 0 < eps < eta < delta < 1, got {}, {}, {}", eps, eta, delta));
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "cylinder radius must be positive");
    if (!(s > delta * r * r))
        throw Error(ErrorCode::InvalidArgument, "lower cylinder starts before t = 0");
    if (time_points < 1) throw Error(ErrorCode::InvalidArgument, "need at least one time point");
}

HarnackObservation harnack_observe(const SpectralData& spec, const ParabolicCylinders& cyl,
                                   std::span<const double> u0) {
    cyl.validate();
    const WeightedSpace& space = spec.space();
    if (u0.size() != space.size()) throw Error(ErrorCode::LengthMismatch, "initial data size");
    bool positive_somewhere = false;
    for (double v : u0) {
        if (v < 0.0 || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "initial data must be finite and nonnegative");
        positive_somewhere = positive_somewhere || v > 0.0;
    }
    if (!positive_somewhere) throw Error(ErrorCode::InvalidArgument, "initial data vanishes identically");

    const std::size_t c = space.nearest_node(cyl.center);
    // A node belongs to delta B when its cell centre lies inside the ball around the true centre.
    std::vector<std::size_t> nodes;
    const double extent = space.hi() - space.lo();
    for (std::size_t i = 0; i < space.size(); ++i) {
        double d = std::abs(space.node(i) - cyl.center);
        if (space.kind() == GeometryKind::Circle) {
            d = std::fmod(d, extent);
            d = std::min(d, extent - d);
        }
        if (d <= cyl.delta * cyl.r) nodes.push_back(i);
    }
    if (nodes.empty()) throw Error(ErrorCode::DegenerateCylinder, "delta B contains no node");
    const double r2 = cyl.r * cyl.r;
    const auto t_minus = midpoints(cyl.s - cyl.delta * r2, cyl.s - cyl.eta * r2, cyl.time_points);
    const auto t_plus = midpoints(cyl.s - cyl.eps * r2, cyl.s, cyl.time_points);

    // Modal coefficients once; each time then only costs the cylinder nodes.
    const std::size_t N = spec.size();
    const auto mu = space.measure();
    std::vector<double> coef(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const double w = u0[i] * mu[i];
        if (w == 0.0) continue;
        const auto row = spec.row(i);
        for (std::size_t k = 0; k < N; ++k) coef[k] += w * row[k];
    }
    auto tabulate = [&](const std::vector<double>& times) {
        std::vector<std::vector<double>> values;
        for (double t : times) {
            const auto decay = decay_weights(spec, t);
            std::vector<double> row;
            row.reserve(nodes.size());
            for (std::size_t j : nodes) {
                const auto phi = spec.row(j);
                double sum = 0.0;
                for (std::size_t k = 0; k < N; ++k) sum += decay[k] * coef[k] * phi[k];
                row.push_back(sum);
            }
            values.push_back(std::move(row));
        }
        return values;
    };
    const auto u_minus = tabulate(t_minus);
    const auto u_plus = tabulate(t_plus);

    HarnackObservation obs;
    obs.nodes = nodes.size();
    obs.sup_minus = -kInf;
    obs.inf_plus = kInf;
    for (const auto& row : u_minus)
        for (double v : row) obs.sup_minus = std::max(obs.sup_minus, v);
    for (const auto& row : u_plus)
        for (double v : row) obs.inf_plus = std::min(obs.inf_plus, v);
    obs.log_ratio = obs.inf_plus > 0.0 ? std::log(obs.sup_minus) - std::log(obs.inf_plus) : kInf;

    const double Aprime = potential_stats(space, c, cyl.r).Aprime;
    const double kappa = curvature_profile(space).kappa;
    obs.budget_arg = (Aprime * Aprime + kappa) * r2;

    // Two-point form over an evenly thinned node subset.
    std::vector<std::size_t> pick;
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / kTwoPointNodes);
    for (std::size_t i = 0; i < nodes.size(); i += stride) pick.push_back(i);
    const double base = Aprime * Aprime + kappa + 1.0 / r2;
    double best = 0.0;
    for (std::size_t a = 0; a < t_minus.size(); ++a) {
        for (std::size_t b = 0; b < t_plus.size(); ++b) {
            const double gap = t_plus[b] - t_minus[a];
            for (std::size_t i : pick) {
                const double ux = u_minus[a][i];
                for (std::size_t j : pick) {
                    const double uy = u_plus[b][j];
                    if (!(uy > 0.0)) {
                        best = kInf;
                        continue;
                    }
                    const double d = space.distance(nodes[i], nodes[j]);
                    const double z = (base + 1.0 / t_minus[a]) * gap + d * d / gap;
                    best = std::max(best, std::log(ux / uy) / z);
                }
            }
        }
    }
    obs.two_point_c = best;
    return obs;
}

BoundReport harnack_check(const SpectralData& spec, const ParabolicCylinders& cyl,
                          std::span<const double> u0, const HarnackOptions& opt) {
    const auto obs = harnack_observe(spec, cyl, u0);
    BoundReport report;
    report.id = "harnack";
    report.budget_form = "log c1 + c2 (A'^2 + kappa) r^2";
    report.sample_count = 1;
    report.extras = {{"log_ratio", obs.log_ratio},
                     {"budget_arg", obs.budget_arg},
                     {"sup_minus", obs.sup_minus},
                     {"inf_plus", obs.inf_plus},
                     {"two_point_c", obs.two_point_c},
                     {"nodes", static_cast<double>(obs.nodes)}};
    if (opt.constants) {
        const auto& c = *opt.constants;
        if (c.size() != 2 || !(c[0] > 0.0))
            throw Error(ErrorCode::InvalidArgument, "Harnack budget needs (c1 > 0, c2)");
        report.constants = {{"c1", c[0]}, {"c2", c[1]}};
        report.worst_deficit = obs.log_ratio - (std::log(c[0]) + c[1] * obs.budget_arg);
        report.verdict = report.worst_deficit <= opt.margin ? Verdict::Holds : Verdict::Violated;
        return report;
    }
    report.flags.push_back("DegenerateFit");
    report.constants = {{"c1", std::exp(obs.log_ratio)}, {"c2", 0.0}};
    report.worst_deficit = 0.0;
    // A positive solution never reaches zero on the later cylinder.
    report.verdict = std::isfinite(obs.log_ratio) ? Verdict::HoldsWithFitted : Verdict::Violated;
    return report;
}

std::vector<double> random_positive_data(const WeightedSpace& space, std::uint64_t seed, double floor) {
    if (!(floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "floor must be positive");
    std::mt19937_64 rng(seed);
    const double lo = space.kind() == GeometryKind::Radial ? 0.0 : space.lo();
    const double hi = space.hi();
    const double extent = hi - lo;
    std::uniform_real_distribution<double> where(lo, hi);
    std::uniform_real_distribution<double> height(0.5, 2.0);
    std::uniform_real_distribution<double> width(0.03 * extent, 0.15 * extent);

    std::vector<double> u(space.size(), floor);
    for (int bump = 0; bump < 3; ++bump) {
        const double c = where(rng);
        const double a = height(rng);
        const double w = width(rng);
        for (std::size_t i = 0; i < u.size(); ++i) {
            double dx = std::abs(space.node(i) - c);
            if (space.kind() == GeometryKind::Circle) dx = std::min(dx, extent - dx);
            u[i] += a * std::exp(-0.5 * dx * dx / (w * w));
        }
    }
    return u;
}

HarnackStudy harnack_study(const SpectralData& spec, std::span<const ParabolicCylinders> cylinders,
                           const HarnackStudyOptions& opt) {
    if (cylinders.empty()) throw Error(ErrorCode::EmptySamples, "Harnack study without cylinders");
    if (opt.calibration_trials == 0 || opt.holdout_trials == 0)
        throw Error(ErrorCode::EmptySamples, "Harnack study needs calibration and holdout trials");
    const WeightedSpace& space = spec.space();
    HarnackStudy study;

    auto run_trials = [&](std::uint64_t first_seed, std::size_t count, std::vector<HarnackObservation>& out) {
        for (std::size_t trial = 0; trial < count; ++trial) {
            const auto u0 = random_positive_data(space, first_seed + trial);
            for (const auto& cyl : cylinders) out.push_back(harnack_observe(spec, cyl, u0));
        }
    };
    // Calibration and holdout draw from disjoint seed ranges.
    run_trials(opt.seed * 2, opt.calibration_trials, study.calibration);
    run_trials(opt.seed * 2 + 1 + (std::uint64_t{1} << 32), opt.holdout_trials, study.holdout);

    std::vector<DeficitSample> data;
    double two_point = 0.0;
    bool finite = true;
    for (const auto& o : study.calibration) {
        finite = finite && std::isfinite(o.log_ratio);
        data.push_back({o.log_ratio, {1.0, o.budget_arg}});
        two_point = std::max(two_point, o.two_point_c);
    }
    BoundReport& report = study.report;
    report.id = "harnack";
    report.budget_form = "log c1 + c2 (A'^2 + kappa) r^2";
    report.sample_count = data.size();
    if (!finite) {
        report.verdict = Verdict::Violated;
        report.worst_deficit = kInf;
        return study;
    }
    const auto fit = fit_constants(data, BudgetForm::with_intercept({"log_c1", "c2"}));
    if (fit.degenerate) report.flags.push_back("DegenerateFit");
    for (const auto& name : fit.dropped) report.flags.push_back("Dropped:" + name);
    report.constants = {{"c1", std::exp(fit.coefficients[0])},
                        {"c2", fit.coefficients[1]},
                        {"c_two_point", two_point}};

    double worst = -kInf;
    for (const auto& o : study.holdout)
        worst = std::max(worst, o.log_ratio - (fit.coefficients[0] + fit.coefficients[1] * o.budget_arg));
    study.worst_holdout_excess = worst;
    double calib_worst = -kInf;
    for (const auto& d : data) calib_worst = std::max(calib_worst, d.deficit - fit.evaluate(d.basis));
    report.worst_deficit = calib_worst;
    report.extras = {{"worst_holdout_excess", worst},
                     {"holdout_factor", opt.holdout_factor},
                     {"holdout_count", static_cast<double>(study.holdout.size())}};
    if (worst > std::log(opt.holdout_factor)) report.flags.push_back("HoldoutExceeded");
    report.verdict = std::isfinite(worst) ? Verdict::HoldsWithFitted : Verdict::Violated;
    return study;
}

} // namespace heatlab
