#include "heatlab/kernels.hpp"

#include <cmath>

namespace heatlab {

std::vector<double> decay_weights(const SpectralData& spec, double t) {
    const auto lambda = spec.eigenvalues();
    std::vector<double> w(lambda.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(-lambda[k] * t);
    return w;
}

namespace detail {

double weighted_dot(std::span<const double> a, std::span<const double> b,
                    std::span<const double> w) {
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * a[k] * b[k];
    return sum;
}

} // namespace detail

namespace serial {

std::vector<double> kernel_matrix(const SpectralData& spec, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols, double t) {
    const auto w = decay_weights(spec, t);
    std::vector<double> out(rows.size() * cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out[r * cols.size() + c] = detail::weighted_dot(spec.row(rows[r]), spec.row(cols[c]), w);
    return out;
}

std::vector<double> semigroup_apply(const SpectralData& spec, std::span<const double> u0, double t) {
    const std::size_t n = spec.size();
    const auto mu = spec.space().measure();
    const auto w = decay_weights(spec, t);
    std::vector<double> coeff(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double ui = u0[i] * mu[i];
        const auto row = spec.row(i);
        for (std::size_t k = 0; k < n; ++k) coeff[k] += ui * row[k];
    }
    for (std::size_t k = 0; k < n; ++k) coeff[k] *= w[k];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = spec.row(i);
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += coeff[k] * row[k];
        out[i] = sum;
    }
    return out;
}

std::vector<double> ball_volume_profile(const WeightedSpace& space, std::size_t center,
                                        std::span<const double> radii) {
    std::vector<double> out(radii.size());
    for (std::size_t r = 0; r < radii.size(); ++r) out[r] = ball_volume(space, center, radii[r]).value;
    return out;
}

double chapman_kolmogorov_sum(const SpectralData& spec, std::size_t x, std::size_t y, double t,
                              double s) {
    const auto wt = decay_weights(spec, t);
    const auto ws = decay_weights(spec, s);
    const auto mu = spec.space().measure();
    double sum = 0.0;
    for (std::size_t z = 0; z < spec.size(); ++z) {
        const double left = detail::weighted_dot(spec.row(x), spec.row(z), wt);
        const double right = detail::weighted_dot(spec.row(z), spec.row(y), ws);
        sum += left * right * mu[z];
    }
    return sum;
}

} // namespace serial
} // namespace heatlab
