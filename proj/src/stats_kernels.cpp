#include "plottwist/stats_kernels.hpp"

#include <numeric>

#include "plottwist/rng.hpp"

namespace plottwist::stats::kernels {

namespace {

double one_bootstrap_mean(std::span<const double> data, std::uint64_t seed) {
  Rng rng(seed);
  const std::uint64_t n = data.size();
  double sum = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) sum += data[rng.below(n)];
  return sum / static_cast<double>(n);
}

// `scratch` must have majority.size() entries; it is reset on entry.
double one_subsample_mean(std::span<const double> majority, std::size_t k,
                          std::vector<std::size_t>& scratch, std::uint64_t seed) {
  Rng rng(seed);
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  const std::size_t m = majority.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(scratch[i], scratch[j]);
    sum += majority[scratch[i]];
  }
  return sum / static_cast<double>(k);
}

double plain_mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::vector<double> bootstrap_means_serial(std::span<const double> data, std::size_t resamples,
                                           std::uint64_t seed) {
  std::vector<double> out(resamples);
  for (std::size_t i = 0; i < resamples; ++i) out[i] = one_bootstrap_mean(data, derive_seed(seed, i));
  return out;
}

std::vector<double> bootstrap_means_parallel(std::span<const double> data, std::size_t resamples,
                                             std::uint64_t seed) {
  std::vector<double> out(resamples);
  const auto n = static_cast<std::ptrdiff_t>(resamples);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = one_bootstrap_mean(data, derive_seed(seed, static_cast<std::uint64_t>(i)));
  return out;
}

std::vector<double> subsample_diffs_serial(std::span<const double> minority,
                                           std::span<const double> majority, std::size_t runs,
                                           std::uint64_t seed) {
  const double base = plain_mean(minority);
  std::vector<std::size_t> scratch(majority.size());
  std::vector<double> out(runs);
  for (std::size_t r = 0; r < runs; ++r)
    out[r] = one_subsample_mean(majority, minority.size(), scratch, derive_seed(seed, r)) - base;
  return out;
}

std::vector<double> subsample_diffs_parallel(std::span<const double> minority,
                                             std::span<const double> majority, std::size_t runs,
                                             std::uint64_t seed) {
  const double base = plain_mean(minority);
  std::vector<double> out(runs);
  const auto n = static_cast<std::ptrdiff_t>(runs);
#pragma omp parallel
  {
    std::vector<std::size_t> scratch(majority.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r)
      out[r] = one_subsample_mean(majority, minority.size(), scratch,
                                  derive_seed(seed, static_cast<std::uint64_t>(r))) -
               base;
  }
  return out;
}

}  // namespace plottwist::stats::kernels
