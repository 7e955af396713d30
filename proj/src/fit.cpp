#include "heatlab/fit.hpp"

#include "heatlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <lapacke.h>

namespace heatlab {

BudgetForm BudgetForm::with_intercept(std::vector<std::string> names) {
    BudgetForm form;
    form.nonnegative.assign(names.size(), true);
    if (!form.nonnegative.empty()) form.nonnegative[0] = false;
    form.names = std::move(names);
    return form;
}

double FitResult::evaluate(std::span<const double> basis) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < coefficients.size(); ++j) sum += coefficients[j] * basis[j];
    return sum;
}

namespace detail {

namespace {

struct Tableau {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // rows x cols
    std::vector<double> rhs;
    std::vector<std::size_t> basis;

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    void pivot(std::size_t r, std::size_t c) {
        const double p = at(r, c);
        for (std::size_t j = 0; j < cols; ++j) at(r, j) /= p;
        rhs[r] /= p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r) continue;
            const double factor = at(i, c);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) at(i, j) -= factor * at(r, j);
            rhs[i] -= factor * rhs[r];
        }
        basis[r] = c;
    }
};

constexpr double kPivotTol = 1e-11;

// Maximise cost.x over the current basic feasible solution with Bland's rule.
// Columns at or beyond `first_blocked` never enter. Returns false if unbounded.
bool run_simplex(Tableau& tab, const std::vector<double>& cost, std::size_t first_blocked) {
    double scale = 1.0;
    for (double c : cost) scale = std::max(scale, std::abs(c));
    const double tol = 1e-12 * scale;
    const std::size_t max_iter = 50 * (tab.rows + tab.cols) + 1000;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::size_t entering = first_blocked;
        for (std::size_t j = 0; j < first_blocked; ++j) {
            double reduced = cost[j];
            for (std::size_t i = 0; i < tab.rows; ++i) reduced -= cost[tab.basis[i]] * tab.at(i, j);
            if (reduced > tol) {
                entering = j;
                break;
            }
        }
        if (entering == first_blocked) return true;

        std::size_t leaving = tab.rows;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tab.rows; ++i) {
            const double coef = tab.at(i, entering);
            if (coef <= kPivotTol) continue;
            const double ratio = tab.rhs[i] / coef;
            const double slack = 1e-15 * std::max(1.0, std::abs(ratio));
            if (leaving == tab.rows || ratio < best - slack ||
                (std::abs(ratio - best) <= slack && tab.basis[i] < tab.basis[leaving])) {
                best = ratio;
                leaving = i;
            }
        }
        if (leaving == tab.rows) return false;
        tab.pivot(leaving, entering);
    }
    throw Error(ErrorCode::ConvergenceFailure, "simplex iteration limit reached");
}

} // namespace

LpResult lp_minimize(std::span<const double> g, std::span<const double> G, std::size_t m,
                     std::span<const double> rhs, const std::vector<bool>& nonnegative) {
    const std::size_t q = g.size();
    // Dual: max rhs.w  s.t. (G^T w)_j (= or <=) g_j, w >= 0.
    std::vector<std::size_t> slack_of(q, std::numeric_limits<std::size_t>::max());
    std::size_t n_slack = 0;
    for (std::size_t j = 0; j < q; ++j)
        if (nonnegative[j]) slack_of[j] = n_slack++;
    const std::size_t first_art = m + n_slack;

    Tableau tab;
    tab.rows = q;
    tab.cols = first_art + q;
    tab.a.assign(tab.rows * tab.cols, 0.0);
    tab.rhs.assign(q, 0.0);
    tab.basis.resize(q);
    std::vector<double> flip(q, 1.0);
    for (std::size_t j = 0; j < q; ++j) {
        flip[j] = g[j] < 0.0 ? -1.0 : 1.0;
        for (std::size_t s = 0; s < m; ++s) tab.at(j, s) = flip[j] * G[s * q + j];
        if (nonnegative[j]) tab.at(j, m + slack_of[j]) = flip[j];
        tab.at(j, first_art + j) = 1.0;
        tab.rhs[j] = flip[j] * g[j];
        tab.basis[j] = first_art + j;
    }

    // Phase 1: drive the artificials to zero.
    std::vector<double> cost(tab.cols, 0.0);
    for (std::size_t j = 0; j < q; ++j) cost[first_art + j] = -1.0;
    run_simplex(tab, cost, first_art);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < q; ++i)
        if (tab.basis[i] >= first_art) infeasibility += tab.rhs[i];
    double gscale = 1.0;
    for (double v : g) gscale = std::max(gscale, std::abs(v));
    LpResult result;
    if (infeasibility > 1e-9 * gscale) {
        // Dual infeasible: the primal is unbounded (or infeasible).
        result.status = LpStatus::Unbounded;
        return result;
    }
    for (std::size_t i = 0; i < q; ++i) {
        if (tab.basis[i] < first_art) continue;
        for (std::size_t j = 0; j < first_art; ++j) {
            if (std::abs(tab.at(i, j)) > kPivotTol) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    // Phase 2.
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t s = 0; s < m; ++s) cost[s] = rhs[s];
    if (!run_simplex(tab, cost, first_art)) {
        result.status = LpStatus::Infeasible;
        return result;
    }

    // Primal solution = simplex multipliers c_B B^{-1}; B^{-1} sits in the artificial columns.
    result.solution.assign(q, 0.0);
    for (std::size_t j = 0; j < q; ++j) {
        double pi = 0.0;
        for (std::size_t i = 0; i < q; ++i) pi += cost[tab.basis[i]] * tab.at(i, first_art + j);
        result.solution[j] = flip[j] * pi;
    }
    result.objective = 0.0;
    for (std::size_t j = 0; j < q; ++j) result.objective += g[j] * result.solution[j];
    result.status = LpStatus::Optimal;
    return result;
}

} // namespace detail

namespace {

// Keeps columns in priority order while they add rank.
std::vector<std::size_t> independent_columns(std::span<const DeficitSample> samples, std::size_t p) {
    const std::size_t s = samples.size();
    std::vector<std::vector<double>> kept_basis;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> col(s);
        for (std::size_t i = 0; i < s; ++i) col[i] = samples[i].basis[j];
        const double norm = std::sqrt(std::inner_product(col.begin(), col.end(), col.begin(), 0.0));
        if (!(norm > 0.0)) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : kept_basis) {
                const double proj = std::inner_product(col.begin(), col.end(), q.begin(), 0.0);
                for (std::size_t i = 0; i < s; ++i) col[i] -= proj * q[i];
            }
        }
        const double rest = std::sqrt(std::inner_product(col.begin(), col.end(), col.begin(), 0.0));
        if (rest <= 1e-9 * norm) continue;
        for (double& v : col) v /= rest;
        kept_basis.push_back(std::move(col));
        kept.push_back(j);
    }
    return kept;
}

} // namespace

FitResult fit_constants(std::span<const DeficitSample> samples, const BudgetForm& form) {
    if (samples.empty()) throw Error(ErrorCode::EmptySamples, "no samples to fit");
    const std::size_t p = form.names.size();
    if (form.nonnegative.size() != p)
        throw Error(ErrorCode::InvalidArgument, "budget form has mismatched sign constraints");
    for (const auto& s : samples) {
        if (s.basis.size() != p)
            throw Error(ErrorCode::LengthMismatch,
                        fmt::format("sample has {} basis values, budget has {}", s.basis.size(), p));
        if (!std::isfinite(s.deficit))
            throw Error(ErrorCode::InvalidArgument, "non-finite deficit");
    }

    FitResult out;
    out.sample_count = samples.size();
    out.coefficients.assign(p, 0.0);
    out.worst_deficit = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) out.worst_deficit = std::max(out.worst_deficit, s.deficit);

    const auto kept = independent_columns(samples, p);
    for (std::size_t j = 0; j < p; ++j)
        if (std::find(kept.begin(), kept.end(), j) == kept.end()) out.dropped.push_back(form.names[j]);
    out.degenerate = samples.size() <= kept.size();
    if (kept.empty()) {
        out.budget = 0.0;
        out.degenerate = true;
        return out;
    }

    const std::size_t S = samples.size();
    const double tol = 1e-10 * (1.0 + std::abs(out.worst_deficit));

    // Stage 0: smallest uniform gap tau with y_s <= z_s.c <= y_s + tau.
    {
        const std::size_t q = kept.size() + 1;
        std::vector<double> g(q, 0.0);
        g[q - 1] = 1.0;
        std::vector<double> G(2 * S * q, 0.0);
        std::vector<double> rhs(2 * S);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t k = 0; k < kept.size(); ++k) {
                G[s * q + k] = samples[s].basis[kept[k]];
                G[(S + s) * q + k] = -samples[s].basis[kept[k]];
            }
            G[(S + s) * q + q - 1] = 1.0;
            rhs[s] = samples[s].deficit;
            rhs[S + s] = -samples[s].deficit;
        }
        std::vector<bool> nonneg(q, false);
        for (std::size_t k = 0; k < kept.size(); ++k) nonneg[k] = form.nonnegative[kept[k]];
        const auto lp = detail::lp_minimize(g, G, 2 * S, rhs, nonneg);
        if (lp.status != detail::LpStatus::Optimal)
            throw Error(ErrorCode::ConvergenceFailure, "envelope fit has no bounded solution");
        out.max_gap = std::max(lp.objective, 0.0);
    }

    // Lexicographic stages: minimise each kept coefficient in turn. Each stage
    // loosens the envelope slightly so the values fixed earlier stay feasible.
    std::vector<double> fixed_part(S, 0.0);
    for (std::size_t stage = 0; stage < kept.size(); ++stage) {
        const std::size_t q = kept.size() - stage;
        std::vector<double> g(q, 0.0);
        g[0] = 1.0;
        std::vector<bool> nonneg(q);
        for (std::size_t k = 0; k < q; ++k) nonneg[k] = form.nonnegative[kept[stage + k]];
        detail::LpResult lp;
        for (int attempt = 0; attempt < 6; ++attempt) {
            const double slack = tol * std::pow(10.0, static_cast<double>(stage + 2 * attempt));
            std::vector<double> G(2 * S * q, 0.0);
            std::vector<double> rhs(2 * S);
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t k = 0; k < q; ++k) {
                    const double z = samples[s].basis[kept[stage + k]];
                    G[s * q + k] = z;
                    G[(S + s) * q + k] = -z;
                }
                rhs[s] = samples[s].deficit - fixed_part[s] - slack;
                rhs[S + s] = -(samples[s].deficit + out.max_gap + slack - fixed_part[s]);
            }
            lp = detail::lp_minimize(g, G, 2 * S, rhs, nonneg);
            if (lp.status == detail::LpStatus::Optimal) break;
        }
        if (lp.status != detail::LpStatus::Optimal)
            throw Error(ErrorCode::ConvergenceFailure, "lexicographic envelope stage failed");
        double value = lp.solution[0];
        if (form.nonnegative[kept[stage]]) value = std::max(value, 0.0);
        out.coefficients[kept[stage]] = value;
        for (std::size_t s = 0; s < S; ++s) fixed_part[s] += value * samples[s].basis[kept[stage]];
    }

    // Re-cover: round-off in the stages must not leave a sample uncovered.
    double shortfall = 0.0;
    for (std::size_t s = 0; s < S; ++s) shortfall = std::max(shortfall, samples[s].deficit - fixed_part[s]);
    const std::size_t lead = kept.front();
    const double lead_value = samples.front().basis[lead];
    const bool constant_lead = std::all_of(samples.begin(), samples.end(), [&](const DeficitSample& d) {
        return d.basis[lead] == lead_value;
    });
    if (shortfall > 0.0 && !form.nonnegative[lead] && constant_lead && lead_value > 0.0) {
        out.coefficients[lead] += shortfall / lead_value;
        for (double& v : fixed_part) v += shortfall;
    }
    out.budget = -std::numeric_limits<double>::infinity();
    out.max_gap = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        out.budget = std::max(out.budget, fixed_part[s]);
        out.max_gap = std::max(out.max_gap, fixed_part[s] - samples[s].deficit);
    }
    return out;
}

std::vector<double> least_squares(std::span<const double> X, std::size_t rows, std::size_t cols,
                                  std::span<const double> y) {
    if (X.size() != rows * cols || y.size() != rows)
        throw Error(ErrorCode::LengthMismatch, "least squares dimensions");
    if (rows < cols) throw Error(ErrorCode::InvalidArgument, "underdetermined least squares");
    std::vector<double> a(X.begin(), X.end());
    std::vector<double> b(y.begin(), y.end());
    const lapack_int info =
        LAPACKE_dgels(LAPACK_ROW_MAJOR, 'N', static_cast<lapack_int>(rows), static_cast<lapack_int>(cols),
                      1, a.data(), static_cast<lapack_int>(cols), b.data(), 1);
    if (info != 0)
        throw Error(ErrorCode::LinearSolveFailure, fmt::format("dgels failed with info={}", info));
    b.resize(cols);
    return b;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "slope needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

} // namespace heatlab
