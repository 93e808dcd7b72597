#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "onebit/errors.hpp"

namespace onebit {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
  bool converged = false;
};

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss, abscissae for [-1,1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
inline void gauss_kronrod_15(const F &f, double a, double b, double &value,
                             double &error) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double f_mid = f(mid);
  double kronrod = kKronrodWeights[7] * f_mid;
  double gauss = kGaussWeights[3] * f_mid;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double fsum = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[j] * fsum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * fsum;
  }
  value = kronrod * half;
  const double diff = std::fabs((kronrod - gauss) * half);
  // QUADPACK-style damping: the raw difference badly overestimates the error
  // once the rule is nearly exact.
  error = diff;
  if (diff > 0.0 && std::fabs(value) > 0.0) {
    const double scaled = std::pow(200.0 * diff / std::fabs(value), 1.5);
    if (scaled < 1.0) error = std::fabs(value) * scaled;
  }
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment &other) const { return error < other.error; }
};

template <typename F>
inline QuadResult adaptive(const F &f, double a, double b,
                           const QuadOptions &opt) {
  QuadResult result;
  std::priority_queue<Segment> segments;
  Segment first{a, b, 0.0, 0.0};
  gauss_kronrod_15(f, a, b, first.value, first.error);
  segments.push(first);
  double total_value = first.value;
  double total_error = first.error;
  int count = 1;
  const double min_width = 1e-14 * (std::fabs(b - a) + std::fabs(a));
  while (total_error > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total_value))) {
    if (count >= opt.max_intervals) break;
    Segment worst = segments.top();
    if (worst.b - worst.a < min_width) break;  // roundoff floor
    segments.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left{worst.a, mid, 0.0, 0.0};
    Segment right{mid, worst.b, 0.0, 0.0};
    gauss_kronrod_15(f, left.a, left.b, left.value, left.error);
    gauss_kronrod_15(f, right.a, right.b, right.value, right.error);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    segments.push(left);
    segments.push(right);
    ++count;
  }
  result.value = total_value;
  result.error_estimate = total_error;
  result.intervals = count;
  result.converged =
      total_error <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(total_value));
  return result;
}

}  // namespace detail

// Integral of f over the finite interval [a,b].
template <typename F>
inline QuadResult integrate(const F &f, double a, double b,
                            const QuadOptions &opt = {}) {
  if (a == b) return {0.0, 0.0, 0, true};
  return detail::adaptive(f, a, b, opt);
}

// Integral of f over [a, infinity), mapped through x = a + t/(1-t).
template <typename F>
inline QuadResult integrate_to_inf(const F &f, double a,
                                   const QuadOptions &opt = {}) {
  auto mapped = [&f, a](double t) {
    const double one_minus = 1.0 - t;
    const double x = a + t / one_minus;
    const double fx = f(x);
    if (fx == 0.0) return 0.0;
    return fx / (one_minus * one_minus);
  };
  return detail::adaptive(mapped, 0.0, 1.0, opt);
}

// Like integrate(), but a non-converged result is a hard error.
template <typename F>
inline double integrate_checked(const F &f, double a, double b,
                                const QuadOptions &opt, const char *context) {
  const QuadResult r =
      std::isinf(b) ? integrate_to_inf(f, a, opt) : integrate(f, a, b, opt);
  if (!r.converged) {
    std::ostringstream msg;
    msg << context << ": quadrature did not converge (value=" << r.value
        << ", error=" << r.error_estimate << ", intervals=" << r.intervals
        << ")";
    throw NumericError(msg.str());
  }
  return r.value;
}

}  // namespace onebit
