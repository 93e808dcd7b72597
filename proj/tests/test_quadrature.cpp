#include <doctest.h>

#include <cmath>

#include "onebit/bessel.hpp"
#include "onebit/quadrature.hpp"

using namespace onebit;

namespace {

// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt, evaluated independently
// of the series/asymptotic implementation.
double bessel_k_oracle(int nu, double z) {
  auto f = [nu, z](double t) {
    const double e = -z * std::cosh(t);
    if (e < -740.0) return 0.0;
    return std::exp(e) * std::cosh(nu * t);
  };
  QuadOptions opt;
  opt.abs_tol = 1e-300;
  opt.rel_tol = 1e-13;
  opt.max_intervals = 8000;
  const double hi = std::acosh(745.0 / z) + 1.0;
  return integrate(f, 0.0, hi, opt).value;
}

}  // namespace

TEST_CASE("finite integrals of polynomials are near exact") {
  auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  auto degenerate = integrate([](double x) { return x; }, 2.0, 2.0);
  CHECK(degenerate.value == 0.0);
}

TEST_CASE("semi-infinite gamma moments") {
  QuadOptions opt;
  opt.abs_tol = 1e-13;
  auto one = integrate_to_inf([](double x) { return std::exp(-x); }, 0.0, opt);
  CHECK(one.converged);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));

  auto third = integrate_to_inf([](double x) { return x * x * x * std::exp(-x); },
                                0.0, opt);
  CHECK(third.value == doctest::Approx(6.0).epsilon(1e-12));

  // shifted lower limit
  auto tail = integrate_to_inf([](double x) { return std::exp(-x); }, 2.0, opt);
  CHECK(tail.value == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("non-integrable singularity hits the interval cap") {
  QuadOptions opt;
  opt.max_intervals = 200;
  auto r = integrate([](double x) { return x > 0.0 ? 1.0 / x : 1e308; }, 0.0, 1.0,
                     opt);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(integrate_checked([](double x) { return x > 0.0 ? 1.0 / x : 1e308; },
                                    0.0, 1.0, opt, "harmonic"),
                  NumericError);
}

TEST_CASE("integrable endpoint singularity converges") {
  auto r = integrate([](double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; },
                     0.0, 1.0, QuadOptions{1e-7, 1e-7, 4000});
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("bessel spot values") {
  // reference values from standard tables
  CHECK(bessel_k1(0.1) == doctest::Approx(9.85384478087175).epsilon(1e-12));
  CHECK(bessel_k1(2.0) == doctest::Approx(0.139865881816522).epsilon(1e-12));
  CHECK(bessel_k2(2.0) == doctest::Approx(0.253759754566056).epsilon(1e-12));
  CHECK(bessel_k1(10.0) == doctest::Approx(1.86487734538256e-05).epsilon(1e-11));
  CHECK_THROWS_AS(bessel_k1(0.0), NumericError);
  CHECK_THROWS_AS(bessel_k1(-1.0), NumericError);
}

TEST_CASE("bessel matches the cosh-integral oracle across the range") {
  for (double z = 0.05; z <= 30.0; z *= 1.31) {
    const double o1 = bessel_k_oracle(1, z);
    const double o2 = bessel_k_oracle(2, z);
    CHECK(bessel_k1(z) == doctest::Approx(o1).epsilon(1e-9));
    CHECK(bessel_k2(z) == doctest::Approx(o2).epsilon(1e-9));
  }
}

TEST_CASE("series and asymptotic branches agree at the switchover") {
  const double z = detail::kBesselBranchSwitch;
  for (int order : {1, 2}) {
    const long double series = detail::bessel_k_series(order, z);
    const long double asym = detail::bessel_k_asymptotic(order, z);
    CHECK(std::fabs(static_cast<double>(series - asym) /
                    static_cast<double>(asym)) < 1e-10);
  }
}

TEST_CASE("wronskian identity ties K to an independent I series") {
  // I1(z) K2(z) + I2(z) K1(z) = 1/z
  for (double z : {0.2, 0.7, 1.5, 3.0, 5.0, 8.0}) {
    const double w = bessel_i(1, z) * bessel_k2(z) + bessel_i(2, z) * bessel_k1(z);
    CHECK(w == doctest::Approx(1.0 / z).epsilon(1e-11));
  }
}
