#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "onebit/dist.hpp"
#include "onebit/quadrature.hpp"

using namespace onebit;

TEST_CASE("rng determinism and uniformity basics") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  CHECK(a.next_u64() != c.next_u64());

  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("built-in moments and closed-form cdf/pdf") {
  auto expo = ServiceDistribution::exponential();
  auto weib = ServiceDistribution::weibull();
  CHECK(expo.mean() == 1.0);
  CHECK(weib.mean() == 1.0);
  CHECK(expo.second_moment() == 2.0);
  CHECK(weib.second_moment() == 6.0);
  CHECK(expo.cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(weib.cdf(2.0) == doctest::Approx(1.0 - std::exp(-2.0)));
  CHECK(weib.pdf(2.0) == doctest::Approx(std::exp(-2.0) / 2.0));
  CHECK(expo.cdf(0.0) == 0.0);
  CHECK(weib.cdf(0.0) == 0.0);

  // quadrature agrees with the closed-form moments
  QuadOptions opt;
  opt.abs_tol = 1e-12;
  for (auto &dist : {expo, weib}) {
    CHECK(dist.expect([](double x) { return x; }, opt) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(dist.expect([](double x) { return x * x; }, opt) ==
          doctest::Approx(dist.second_moment()).epsilon(1e-10));
  }
}

TEST_CASE("partial_load examples and properties") {
  auto expo = ServiceDistribution::exponential();
  auto weib = ServiceDistribution::weibull();

  CHECK(partial_load(expo, 0.9, 1e4) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(partial_load(expo, 0.5, 0.0) == 0.0);
  CHECK(partial_load(weib, 0.8, 2.0) ==
        doctest::Approx(0.8 * (1.0 - std::exp(-2.0) * 5.0)).epsilon(1e-12));

  CHECK_THROWS_AS(partial_load(expo, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(partial_load(expo, 0.5, -1.0), std::domain_error);

  // nondecreasing in T and converging to the mean (the weibull tail is
  // heavy, so the limit needs a large T)
  for (auto &dist : {expo, weib}) {
    double prev = 0.0;
    for (double t = 0.0; t <= 40.0; t += 0.25) {
      const double v = dist.partial_load_integral(t);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    CHECK(dist.partial_load_integral(5000.0) ==
          doctest::Approx(dist.mean()).epsilon(1e-9));
  }

  // closed form vs quadrature through the complementary integral
  QuadOptions opt;
  opt.abs_tol = 1e-12;
  for (auto &dist : {expo, weib}) {
    for (double t : {0.3, 1.0, 2.5, 7.0}) {
      const double upper =
          dist.expect([t](double x) { return x > t ? x : 0.0; }, opt);
      CHECK(dist.partial_load_integral(t) ==
            doctest::Approx(dist.mean() - upper).epsilon(1e-10));
    }
  }
}

TEST_CASE("residual_work examples") {
  CHECK(residual_work(ServiceDistribution::exponential(), 0.9) == doctest::Approx(0.9));
  CHECK(residual_work(ServiceDistribution::weibull(), 0.8) == doctest::Approx(2.4));
  CHECK(residual_work(ServiceDistribution::weibull(), 0.0) == 0.0);
  CHECK_THROWS_AS(residual_work(ServiceDistribution::exponential(), 1.0),
                  std::domain_error);
}

TEST_CASE("inverse-cdf sampler inversion points") {
  auto expo = ServiceDistribution::exponential();
  auto weib = ServiceDistribution::weibull();
  CHECK(expo.quantile_from_survival(std::exp(-1.0)) == doctest::Approx(1.0));
  CHECK(weib.quantile_from_survival(std::exp(-2.0)) == doctest::Approx(2.0));
}

TEST_CASE("sampler matches its distribution") {
  Rng rng(2024);
  for (auto &dist : {ServiceDistribution::exponential(), ServiceDistribution::weibull()}) {
    double sum = 0.0, sum2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double x = sample_service(dist, rng);
      sum += x;
      sum2 += x * x;
    }
    CHECK(std::abs(sum / n - dist.mean()) < 0.005);
    if (dist.kind() == DistKind::Weibull)
      CHECK(sum2 / n == doctest::Approx(6.0).epsilon(0.05));

    // Kolmogorov-Smirnov against the cdf
    const int m = 100000;
    std::vector<double> xs(m);
    for (int i = 0; i < m; ++i) xs[i] = dist.sample(rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < m; ++i) {
      const double f = dist.cdf(xs[i]);
      ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / m));
      ks = std::max(ks, std::abs(f - static_cast<double>(i) / m));
    }
    CHECK(ks < 0.01);
  }
}

TEST_CASE("custom distribution falls back to quadrature and inversion") {
  auto custom = ServiceDistribution::custom(
      [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); },
      [](double x) { return x < 0.0 ? 0.0 : std::exp(-x); });
  CHECK(custom.mean() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(custom.second_moment() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(custom.partial_load_integral(1.0) ==
        doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-8));
  Rng rng(5);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += custom.sample(rng);
  CHECK(std::abs(sum / 20000 - 1.0) < 0.03);
}

TEST_CASE("prediction model g and labeling") {
  auto perfect = PredictionModel::perfect();
  auto expo = PredictionModel::exponential();
  Rng rng(11);

  CHECK(perfect.g(1.0, 0.5) == 1.0);
  CHECK(perfect.g(1.0, 1.5) == 0.0);
  CHECK(label_job(perfect, 1.0, 0.5, rng));
  CHECK_FALSE(label_job(perfect, 1.0, 1.5, rng));

  CHECK(expo.g(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(expo.g(0.0, 3.0) == 0.0);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(label_job(expo, 0.0, 2.0, rng));

  // g in [0,1], nondecreasing in T
  for (double x : {0.25, 1.0, 4.0}) {
    double prev = 0.0;
    for (double t = 0.0; t <= 20.0; t += 0.5) {
      const double g = expo.g(t, x);
      CHECK(g >= prev - 1e-15);
      CHECK(g <= 1.0);
      prev = g;
    }
  }

  // empirical label frequency matches g
  int below = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i)
    if (label_job(expo, 1.0, 1.0, rng)) ++below;
  CHECK(static_cast<double>(below) / n ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.01));

  CHECK_THROWS_AS(label_job(expo, -1.0, 1.0, rng), std::domain_error);
}

TEST_CASE("predicted sizes are unbiased for the exponential model") {
  auto model = PredictionModel::exponential();
  Rng rng(33);
  for (double x : {0.5, 2.0}) {
    double sum = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) sum += model.sample_predicted_size(x, rng);
    CHECK(sum / n == doctest::Approx(x).epsilon(0.01));
  }
  CHECK(PredictionModel::perfect().sample_predicted_size(1.7, rng) == 1.7);
}
