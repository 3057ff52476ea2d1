#include "doctest.h"

#include <cmath>
#include <vector>

#include "landloc/rng.hpp"
#include "landloc/stats.hpp"

using namespace landloc;

TEST_CASE("wilson interval: textbook values") {
  // 8 of 10 at 95%: center (0.8 + 1.92/10) / 1.384.
  const auto ci = wilson_interval(8, 10);
  CHECK(ci.low == doctest::Approx(0.4901625).epsilon(1e-6));
  CHECK(ci.high == doctest::Approx(0.9433178).epsilon(1e-6));
  CHECK(wilson_interval(0, 10).low == 0.0);
  CHECK(wilson_interval(10, 10).high == 1.0);
  CHECK_THROWS(wilson_interval(1, 0));
  CHECK_THROWS(wilson_interval(3, 2));
}

TEST_CASE("linear fit recovers an exact line") {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.max_abs_residual() < 1e-12);
}

TEST_CASE("bootstrap intervals bracket the estimate and are seed-deterministic") {
  Rng rng(5);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i);
    y.push_back(0.5 * i + rng.normal());
  }
  const auto a = bootstrap_slope(x, y, 300, 11);
  const auto b = bootstrap_slope(x, y, 300, 11);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.contains(linear_fit(x, y).slope));
  const auto m = bootstrap_mean(y, 300, 3);
  CHECK(m.contains(mean(y)));
}

TEST_CASE("rng: streams are reproducible and uniform has the right mean") {
  Rng a(stream_seed(1, 7)), b(stream_seed(1, 7)), c(stream_seed(1, 8));
  CHECK(a() == b());
  CHECK(a() != c());
  Rng r(42);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += r.uniform();
  CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}
