#include "heatlab/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace heatlab {

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::HoldsWithFitted: return "HoldsWithFitted";
    case Verdict::Violated: return "Violated";
    case Verdict::Skipped: return "Skipped";
    }
    return "?";
}

std::optional<double> BoundReport::constant(const std::string& name) const {
    for (const auto& c : constants)
        if (c.name == name) return c.value;
    return std::nullopt;
}

std::optional<double> BoundReport::extra(const std::string& name) const {
    for (const auto& c : extras)
        if (c.name == name) return c.value;
    return std::nullopt;
}

bool BoundReport::has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

double refinement_stability(const BoundReport& coarse, const BoundReport& fine, double floor) {
    double worst = 0.0;
    for (const auto& c : coarse.constants) {
        const auto other = fine.constant(c.name);
        if (!other) continue;
        const double a = c.value;
        const double b = *other;
        if (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)) continue;
        if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
        const double scale = std::max(std::abs(a), std::abs(b));
        if (scale <= floor) continue;
        worst = std::max(worst, std::abs(b - a) / std::abs(a == 0.0 ? b : a));
    }
    return 100.0 * worst;
}

} // namespace heatlab
