#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Resampling kernels. Each has a serial reference implementation and an
// OpenMP version; iteration i always draws from the substream
// derive_seed(seed, i), so both return identical vectors for any thread count.
namespace plottwist::stats::kernels {

/// Means of `resamples` with-replacement resamples of `data`.
std::vector<double> bootstrap_means_serial(std::span<const double> data, std::size_t resamples,
                                           std::uint64_t seed);
std::vector<double> bootstrap_means_parallel(std::span<const double> data, std::size_t resamples,
                                             std::uint64_t seed);

/// For each run, mean of |minority| items drawn from `majority` without
/// replacement, minus mean(minority).
std::vector<double> subsample_diffs_serial(std::span<const double> minority,
                                           std::span<const double> majority, std::size_t runs,
                                           std::uint64_t seed);
std::vector<double> subsample_diffs_parallel(std::span<const double> minority,
                                             std::span<const double> majority, std::size_t runs,
                                             std::uint64_t seed);

}  // namespace plottwist::stats::kernels
