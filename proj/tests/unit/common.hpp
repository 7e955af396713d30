#pragma once

#include "heatlab/error.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/space.hpp"
#include "heatlab/spectral.hpp"

#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace heatlab::testing {

inline SpectralData spectral_of(const SpaceSpec& spec) {
    return decompose(assemble(std::make_shared<const WeightedSpace>(spec)));
}

struct NamedSpace {
    std::string name;
    SpaceSpec spec;
};

// Small versions of the standard suite, cheap enough for property loops.
inline std::vector<NamedSpace> small_suite(int resolution = 128) {
    return {
        {"flat_interval", SpaceSpec::interval(-6, 6, resolution, PotentialSpec::zero())},
        {"flat_circle", SpaceSpec::circle(12, resolution)},
        {"soliton_plus", SpaceSpec::interval(-6, 6, resolution, PotentialSpec::linear(1.0))},
        {"soliton_minus", SpaceSpec::interval(-6, 6, resolution, PotentialSpec::linear(-1.0))},
        {"shrinking", SpaceSpec::interval(-4, 4, resolution, PotentialSpec::quadratic(1.0))},
        {"expanding", SpaceSpec::interval(-4, 4, resolution, PotentialSpec::quadratic(-1.0))},
        {"radial3", SpaceSpec::radial(3, 6, resolution, PotentialSpec::zero())},
    };
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

#define EXPECT_HEATLAB_ERROR(stmt, expected_code)                                                   \
    do {                                                                                            \
        try {                                                                                       \
            stmt;                                                                                   \
            ADD_FAILURE() << "expected " #expected_code;                                            \
        } catch (const ::heatlab::Error& e) {                                                       \
            EXPECT_EQ(e.code(), ::heatlab::ErrorCode::expected_code) << e.what();                   \
        }                                                                                           \
    } while (0)

} // namespace heatlab::testing
