#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "plottwist/errors.hpp"
#include "plottwist/jsonl.hpp"
#include "plottwist/rng.hpp"
#include "plottwist/stats.hpp"
#include "plottwist/stats_kernels.hpp"
#include "support.hpp"

using namespace plottwist;
using namespace plottwist::stats;

namespace {

using Vec = std::vector<double>;

Vec gaussian(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Vec out(n);
  for (double& x : out) x = rng.normal(mean, sd);
  return out;
}

// Welch statistic written out from the textbook formula.
double welch_t_by_hand(const Vec& a, const Vec& b) {
  auto mv = [](const Vec& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair{m, s / (x.size() - 1)};
  };
  auto [ma, va] = mv(a);
  auto [mb, vb] = mv(b);
  return (ma - mb) / std::sqrt(va / a.size() + vb / b.size());
}

// Percentile bootstrap of the mean with std::mt19937 and a sorted-index
// quantile, sharing nothing with the library code.
std::pair<double, double> reference_bootstrap(const Vec& d, int resamples, double level, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  Vec means;
  for (int r = 0; r < resamples; ++r) {
    double s = 0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[pick(gen)];
    means.push_back(s / d.size());
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1 - level) / 2;
  return {means[static_cast<std::size_t>(alpha * (resamples - 1))],
          means[static_cast<std::size_t>((1 - alpha) * (resamples - 1))]};
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("regularized incomplete beta against high-precision values") {
    CHECK(regularized_incomplete_beta(2, 3, 0.5) == doctest::Approx(0.6875).epsilon(1e-14));
    CHECK(regularized_incomplete_beta(0.5, 0.5, 0.3) == doctest::Approx(0.369010119565545375).epsilon(1e-13));
    CHECK(regularized_incomplete_beta(30, 40, 0.45) == doctest::Approx(0.644748008558568113).epsilon(1e-13));
    CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
    CHECK(student_t_two_sided_p(2.0, 10.0) == doctest::Approx(0.0733880347707403751).epsilon(1e-13));
    CHECK(student_t_two_sided_p(0.0, 7.0) == 1.0);
  }

  TEST_CASE("hand-derived Welch example") {
    const Vec a = {1, 2, 3, 4, 5}, b = {2, 4, 6, 8, 10};
    const auto w = welch_t(a, b);
    CHECK(w.t == doctest::Approx(-1.8974).epsilon(1e-4));
    CHECK(w.dof == doctest::Approx(5.882).epsilon(1e-3));
    CHECK(std::abs(w.t - (-3.0 / std::sqrt(2.5))) < 1e-12);
    CHECK(std::abs(w.dof - 100.0 / 17.0) < 1e-12);
  }

  TEST_CASE("identical samples give t = 0 and p = 1") {
    const Vec a = {3.1, 4.7, 5.2, 6.0};
    const auto w = welch_t(a, a);
    CHECK(std::abs(w.t) < 1e-12);
    CHECK(std::abs(w.p - 1.0) < 1e-12);
  }

  TEST_CASE("shifting one sample grows |t| as the formula says") {
    const Vec a = gaussian(20, 5, 1, 1);
    double last = 0;
    for (double c : {0.1, 1.0, 10.0}) {
      Vec shifted = a;
      for (double& x : shifted) x += c;
      const double t = welch_t(shifted, a).t;
      CHECK(t == doctest::Approx(welch_t_by_hand(shifted, a)).epsilon(1e-12));
      CHECK(std::abs(t) > last);
      last = std::abs(t);
    }
  }

  TEST_CASE("Welch t is antisymmetric") {
    const Vec a = gaussian(12, 5, 1, 2), b = gaussian(30, 5.5, 2, 3);
    const auto ab = welch_t(a, b), ba = welch_t(b, a);
    CHECK(ab.t == -ba.t);
    CHECK(ab.p == ba.p);
    CHECK(ab.dof == ba.dof);
  }

  TEST_CASE("Welch t and Cohen's d agree with the committed oracle") {
    const auto oracle = json::parse(jsonl::read_text(testing::kFixtures / "stats_oracle.json"));
    for (const auto& c : oracle.at("cases")) {
      const auto a = c.at("a").get<Vec>(), b = c.at("b").get<Vec>();
      const auto w = welch_t(a, b);
      CHECK(std::abs(w.t - c.at("t").get<double>()) < 1e-9);
      CHECK(std::abs(w.dof - c.at("dof").get<double>()) < 1e-9);
      CHECK(std::abs(w.p - c.at("p").get<double>()) < 1e-9);
      CHECK(std::abs(cohens_d(a, b) - c.at("d").get<double>()) < 1e-9);
    }
  }

  TEST_CASE("degenerate inputs are refused") {
    CHECK_THROWS_AS(welch_t(Vec{1}, Vec{1, 2}), DegenerateInputError);
    CHECK_THROWS_AS(welch_t(Vec{1, 1, 1}, Vec{2, 2}), DegenerateInputError);
    CHECK_THROWS_AS(cohens_d(Vec{1, 1}, Vec{1, 1}), DegenerateInputError);
    CHECK_THROWS_AS(paired_cohens_d(Vec{0.5, 0.5}), DegenerateInputError);
    CHECK_THROWS_AS(sample_variance(Vec{1}), DegenerateInputError);
  }

  TEST_CASE("Cohen's d") {
    const Vec a = {1, 2, 3, 4, 5}, b = {2, 4, 6, 8, 10};
    CHECK(std::abs(cohens_d(a, b) - (-1.2)) < 1e-12);
    CHECK(cohens_d(a, a) == 0.0);
    for (double k : {0.5, 3.0, 100.0}) {
      Vec ka = a, kb = b;
      for (double& x : ka) x *= k;
      for (double& x : kb) x *= k;
      CHECK(cohens_d(ka, kb) == doctest::Approx(-1.2).epsilon(1e-12));
    }
    CHECK(paired_cohens_d(Vec{1, 2, 3}) == doctest::Approx(2.0));
  }

  TEST_CASE("type-7 quantiles") {
    const Vec s = {1, 2, 3, 4};
    CHECK(quantile_sorted(s, 0.5) == 2.5);
    CHECK(quantile_sorted(s, 0.25) == 1.75);
    CHECK(quantile_sorted(s, 0.0) == 1.0);
    CHECK(quantile_sorted(s, 1.0) == 4.0);
  }

  TEST_CASE("bootstrap CI of constant differences is a point") {
    const Vec d(40, 0.5);
    const auto ci = bootstrap_ci_paired(d, 1000, 0.95, 9);
    CHECK(ci.low == 0.5);
    CHECK(ci.high == 0.5);
  }

  TEST_CASE("bootstrap CI of symmetric differences straddles zero") {
    Vec d;
    for (int i = 0; i < 50; ++i) {
      d.push_back(-1);
      d.push_back(1);
    }
    const auto ci = bootstrap_ci_paired(d, 4000, 0.95, 9);
    const auto [lo, hi] = reference_bootstrap(d, 4000, 0.95, 12345);
    CHECK(ci.low < 0);
    CHECK(ci.high > 0);
    CHECK(std::abs(ci.low + ci.high) < 0.05);
    CHECK(std::abs(ci.low - lo) < 0.05);
    CHECK(std::abs(ci.high - hi) < 0.05);
    const auto again = bootstrap_ci_paired(d, 4000, 0.95, 9);
    CHECK(again.low == ci.low);
    CHECK(again.high == ci.high);
    CHECK_THROWS_AS(bootstrap_ci_paired(d, 999, 0.95, 9), DomainError);
  }

  TEST_CASE("bootstrap CI narrows as the sample grows") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const Vec all = gaussian(400, 0.3, 1.0, 100 + trial);
      const Vec small(all.begin(), all.begin() + 100);
      const auto wide = bootstrap_ci_paired(small, 1000, 0.95, trial);
      const auto narrow = bootstrap_ci_paired(all, 1000, 0.95, trial);
      CHECK(narrow.high - narrow.low < wide.high - wide.low);
    }
  }

  TEST_CASE("serial and parallel kernels return identical draws") {
    const Vec data = gaussian(123, 7, 1, 4);
    const Vec majority = gaussian(300, 8, 1, 5);
    CHECK(kernels::bootstrap_means_serial(data, 1500, 77) == kernels::bootstrap_means_parallel(data, 1500, 77));
    CHECK(kernels::subsample_diffs_serial(data, majority, 700, 78) ==
          kernels::subsample_diffs_parallel(data, majority, 700, 78));
    CHECK(kernels::bootstrap_means_serial(data, 10, 1) != kernels::bootstrap_means_serial(data, 10, 2));
  }

  TEST_CASE("subsample draws are without replacement") {
    // A majority of distinct powers of two: any repeated draw would produce a
    // subset sum that no set of distinct members can reach.
    Vec majority;
    for (int i = 0; i < 20; ++i) majority.push_back(std::ldexp(1.0, i));
    const Vec minority(20, 0.0);
    for (double d : kernels::subsample_diffs_serial(minority, majority, 50, 3))
      CHECK(d * 20 == doctest::Approx(std::ldexp(1.0, 20) - 1));
  }

  TEST_CASE("balanced subsampling of two constant groups") {
    const ScoredSample low{"low", Vec(37, 7.0)}, high{"high", Vec(94, 8.0)};
    const auto r = balanced_subsample_compare(low, high, 1000, 7);
    CHECK(r.mean_diff == 1.0);
    CHECK(r.directional_consistency == 1.0);
    CHECK(r.n_a == 94);
    CHECK(r.n_b == 37);
    CHECK_FALSE(r.t_stat.has_value());  // zero variance: no t statistic
    CHECK_FALSE(r.cohens_d.has_value());
    const auto j = to_json(r);
    CHECK(j["t_stat"].is_null());
    CHECK(j["mean_diff"] == 1.0);
  }

  TEST_CASE("balanced subsampling is reproducible from the seed") {
    const ScoredSample low{"low", gaussian(37, 7.2, 0.5, 1)}, high{"high", gaussian(94, 8.3, 0.5, 2)};
    CHECK(to_json(balanced_subsample_compare(low, high, 1000, 5)) ==
          to_json(balanced_subsample_compare(low, high, 1000, 5)));
  }

  TEST_CASE("groups with the same distribution split about evenly") {
    // Both samples are rescaled to identical moments so only subsampling noise remains.
    auto standardized = [](Vec x) {
      const double m = mean(x), s = std::sqrt(sample_variance(x));
      for (double& v : x) v = 7.5 + 0.5 * (v - m) / s;
      return x;
    };
    const ScoredSample a{"a", standardized(gaussian(37, 0, 1, 21))};
    const ScoredSample b{"b", standardized(gaussian(94, 0, 1, 22))};
    const auto r = balanced_subsample_compare(a, b, 1000, 3);
    CHECK(std::abs(r.directional_consistency - 0.5) <= 0.1);
  }

  TEST_CASE("dominance uses strict comparison") {
    using P = std::pair<double, double>;
    CHECK(dominance_probability(std::vector<P>{{1, 2}, {3, 4}}) == 1.0);
    CHECK(dominance_probability(std::vector<P>{{5, 5}, {6, 6}}) == 0.0);
    std::vector<P> mixed = {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 8}, {9, 1}, {2, 1}};
    CHECK(dominance_probability(mixed) == doctest::Approx(0.7));
    CHECK_THROWS_AS(dominance_probability(std::vector<P>{}), DomainError);
  }
}
