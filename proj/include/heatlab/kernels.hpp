#pragma once

// Data-parallel hot loops. `heatlab::parallel` is the OpenMP version used by
// the library; `heatlab::serial` is the plain reference kept for testing and
// benchmarking. Both compute bit-for-bit the same per-entry sums (identical
// summation order), so tests compare them exactly.

#include "heatlab/spectral.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace heatlab {

/// e^{-lambda_k t} for every mode.
std::vector<double> decay_weights(const SpectralData& spec, double t);

namespace serial {

/// Row-major |rows| x |cols| block of H(., ., t).
std::vector<double> kernel_matrix(const SpectralData& spec, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols, double t);
std::vector<double> semigroup_apply(const SpectralData& spec, std::span<const double> u0, double t);
std::vector<double> ball_volume_profile(const WeightedSpace& space, std::size_t center,
                                        std::span<const double> radii);
/// sum_z H(x,z,t) H(z,y,s) mu_z.
double chapman_kolmogorov_sum(const SpectralData& spec, std::size_t x, std::size_t y, double t,
                              double s);

} // namespace serial

namespace parallel {

std::vector<double> kernel_matrix(const SpectralData& spec, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols, double t);
std::vector<double> semigroup_apply(const SpectralData& spec, std::span<const double> u0, double t);
std::vector<double> ball_volume_profile(const WeightedSpace& space, std::size_t center,
                                        std::span<const double> radii);
double chapman_kolmogorov_sum(const SpectralData& spec, std::size_t x, std::size_t y, double t,
                              double s);

} // namespace parallel

/// Thread cap from MMS_HEATLAB_THREADS (0 when unset or invalid).
int thread_cap_from_env();
/// Applies the MMS_HEATLAB_THREADS cap to the OpenMP runtime; returns the
/// thread count in effect.
int configure_threads();

} // namespace heatlab
