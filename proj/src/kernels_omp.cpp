#include "heatlab/kernels.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace heatlab {

namespace detail {
double weighted_dot(std::span<const double> a, std::span<const double> b,
                    std::span<const double> w);
}

namespace parallel {

std::vector<double> kernel_matrix(const SpectralData& spec, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols, double t) {
    const auto w = decay_weights(spec, t);
    std::vector<double> out(rows.size() * cols.size());
    const auto nr = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < nr; ++r) {
        const auto ri = static_cast<std::size_t>(r);
        for (std::size_t c = 0; c < cols.size(); ++c)
            out[ri * cols.size() + c] = detail::weighted_dot(spec.row(rows[ri]), spec.row(cols[c]), w);
    }
    return out;
}

std::vector<double> semigroup_apply(const SpectralData& spec, std::span<const double> u0, double t) {
    const std::size_t n = spec.size();
    const auto mu = spec.space().measure();
    const auto w = decay_weights(spec, t);
    const auto nn = static_cast<std::ptrdiff_t>(n);

    // Projection coefficients: each thread owns a block of modes and sums over
    // nodes in the same order as the serial loop.
    std::vector<double> coeff(n, 0.0);
#pragma omp parallel
    {
        const auto threads = static_cast<std::size_t>(omp_get_num_threads());
        const auto id = static_cast<std::size_t>(omp_get_thread_num());
        const std::size_t k0 = n * id / threads;
        const std::size_t k1 = n * (id + 1) / threads;
        // Rows are streamed; only this thread's slice of each row is touched.
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = u0[i] * mu[i];
            const auto row = spec.row(i);
            for (std::size_t k = k0; k < k1; ++k) coeff[k] += ui * row[k];
        }
        for (std::size_t k = k0; k < k1; ++k) coeff[k] *= w[k];
    }

    std::vector<double> out(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
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
    const auto nr = static_cast<std::ptrdiff_t>(radii.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t r = 0; r < nr; ++r) {
        const auto ri = static_cast<std::size_t>(r);
        out[ri] = ball_volume(space, center, radii[ri]).value;
    }
    return out;
}

double chapman_kolmogorov_sum(const SpectralData& spec, std::size_t x, std::size_t y, double t,
                              double s) {
    const auto wt = decay_weights(spec, t);
    const auto ws = decay_weights(spec, s);
    const auto mu = spec.space().measure();
    const auto n = static_cast<std::ptrdiff_t>(spec.size());
    std::vector<double> terms(spec.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t zz = 0; zz < n; ++zz) {
        const auto z = static_cast<std::size_t>(zz);
        const double left = detail::weighted_dot(spec.row(x), spec.row(z), wt);
        const double right = detail::weighted_dot(spec.row(z), spec.row(y), ws);
        terms[z] = left * right * mu[z];
    }
    double sum = 0.0;
    for (double v : terms) sum += v;
    return sum;
}

} // namespace parallel

int thread_cap_from_env() {
    const char* raw = std::getenv("MMS_HEATLAB_THREADS");
    if (raw == nullptr) return 0;
    try {
        const int v = std::stoi(raw);
        return v > 0 ? v : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

int configure_threads() {
    if (const int cap = thread_cap_from_env(); cap > 0 && cap < omp_get_max_threads())
        omp_set_num_threads(cap);
    return omp_get_max_threads();
}

} // namespace heatlab
