#include <doctest.h>

#include <algorithm>
#include <set>

#include "linggen/errors.hpp"
#include "linggen/pmask.hpp"

using namespace linggen;

namespace {

// Composite Simpson integration of the density on [0, x].
double integrate_density(double x, double b, int n = 2000) {
  const double h = x / n;
  double s = pmask_density(0.0, b) + pmask_density(x, b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pmask_density(i * h, b);
  return s * h / 3.0;
}

double ks_statistic(std::vector<double> xs, double b) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = pmask_cdf(xs[i], b);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

}  // namespace

TEST_CASE("density integrates to one and matches the CDF") {
  for (double b : {0.5, 1.0, 2.7, 3.0, 8.0}) {
    CHECK(integrate_density(1.0, b) == doctest::Approx(1.0).epsilon(1e-9));
    for (double x : {0.1, 0.3, 0.77}) {
      CHECK(integrate_density(x, b) == doctest::Approx(pmask_cdf(x, b)).epsilon(1e-9));
    }
  }
  CHECK(pmask_cdf(0.0, 3.0) == 0.0);
  CHECK(pmask_cdf(1.0, 3.0) == doctest::Approx(1.0));
  CHECK(pmask_cdf(0.3, 3.0) == doctest::Approx(0.62267).epsilon(1e-4));
  CHECK_THROWS_AS(pmask_density(1.5, 3.0), Error);
  CHECK_THROWS_AS(pmask_cdf(0.5, 0.0), Error);
}

TEST_CASE("quantile inverts the CDF") {
  CHECK(pmask_quantile(0.0, 3.0) == 0.0);
  CHECK(pmask_quantile(1.0, 3.0) == doctest::Approx(1.0));
  CHECK(std::abs(pmask_quantile(0.5, 3.0) - 0.2114) < 1e-3);
  for (double u = 0.05; u < 1.0; u += 0.1) CHECK(pmask_cdf(pmask_quantile(u, 2.0), 2.0) == doctest::Approx(u));
}

TEST_CASE("sampler matches the analytic law") {
  Rng rng(2024);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_rate(rng, {3.0});
  CHECK(ks_statistic(xs, 3.0) < 0.01);
  const double below = static_cast<double>(std::count_if(xs.begin(), xs.end(), [](double x) { return x <= 0.3; })) / xs.size();
  CHECK(below >= 0.61);
  CHECK(below <= 0.64);
  CHECK(*std::min_element(xs.begin(), xs.end()) >= 0.0);
  CHECK(*std::max_element(xs.begin(), xs.end()) <= 1.0);
}

TEST_CASE("shape calibration") {
  const auto r = calibrate_shape(0.3, 0.6);
  CHECK(r.b >= 2.69);
  CHECK(r.b <= 2.72);
  CHECK(r.achieved_mass >= 0.6);
  CHECK(r.achieved_mass <= 0.60001);
  CHECK(pmask_cdf(0.3, r.b - 1e-5) < 0.6);
  CHECK(pmask_cdf(0.3, 3.0) > 0.6);
  try {
    calibrate_shape(0.3, 0.999999, 1.0, 4.0);
    FAIL("expected NoRoot");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNoRoot);
  }
  CHECK_THROWS_AS(calibrate_shape(0.0, 0.5), Error);
}

TEST_CASE("masked count rounds half up") {
  CHECK(masked_count(0.0, 9) == 0);
  CHECK(masked_count(1.0, 7) == 7);
  CHECK(masked_count(0.34, 10) == 3);
  CHECK(masked_count(0.35, 10) == 4);
  CHECK(masked_count(0.25, 2) == 1);
}

TEST_CASE("mask draws per strategy") {
  Rng rng(9);
  CHECK(draw_mask(rng, 16, NoMasking{}).masked.empty());
  for (int i = 0; i < 200; ++i) {
    const auto d = draw_mask(rng, 10, FixedRateMasking{0.34});
    CHECK(d.masked.size() == 3);
    CHECK(std::is_sorted(d.masked.begin(), d.masked.end()));
    CHECK(std::set<int>(d.masked.begin(), d.masked.end()).size() == d.masked.size());
    const auto p = draw_mask(rng, 16, ParetoMasking{});
    CHECK(p.masked.size() == static_cast<std::size_t>(masked_count(p.rate, 16)));
    CHECK(p.masked.size() <= 16);
  }

  double frac = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) frac += draw_mask(rng, 40, DropoutMasking{0.3}).masked.size() / 40.0;
  CHECK(std::abs(frac / n - 0.3) < 0.01);

  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) CHECK(draw_mask(a, 16, ParetoMasking{}).masked == draw_mask(b, 16, ParetoMasking{}).masked);

  const auto c = mask_complement(5, {1, 3});
  CHECK(c.masked == std::vector<int>{0, 2, 4});
}

TEST_CASE("strategy keys") {
  CHECK(strategy_key(parse_strategy("pmask", 2.5)) == "pmask");
  CHECK(std::get<ParetoMasking>(parse_strategy("pmask", 2.5)).cfg.b == 2.5);
  CHECK(strategy_key(parse_strategy("fixed")) == "fixed");
  CHECK(strategy_key(parse_strategy("dropout")) == "dropout");
  CHECK(strategy_key(parse_strategy("none")) == "none");
  CHECK_THROWS_AS(parse_strategy("bogus"), Error);
  CHECK_THROWS_AS(parse_strategy("fixed", 1.5), Error);
}
