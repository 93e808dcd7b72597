#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "onebit/errors.hpp"
#include "onebit/quadrature.hpp"
#include "onebit/rng.hpp"

namespace onebit {

enum class DistKind { Exponential, Weibull, Custom };

// Service-time distribution. The two built-ins are scaled to mean 1:
//   Exponential: F(x) = 1 - exp(-x)
//   Weibull:     F(x) = 1 - exp(-sqrt(2x))   (shape 1/2, second moment 6)
// Custom distributions supply F and f; moments fall back to adaptive
// quadrature and sampling to numeric cdf inversion.
//
// Immutable after construction and safe to share across threads.
class ServiceDistribution {
 public:
  static ServiceDistribution exponential() {
    return ServiceDistribution(DistKind::Exponential);
  }

  static ServiceDistribution weibull() {
    return ServiceDistribution(DistKind::Weibull);
  }

  static ServiceDistribution custom(std::function<double(double)> cdf,
                                    std::function<double(double)> pdf) {
    ServiceDistribution d(DistKind::Custom);
    d.custom_cdf_ = std::move(cdf);
    d.custom_pdf_ = std::move(pdf);
    QuadOptions opt;
    d.custom_mean_ = integrate_checked(
        [&d](double x) { return x * d.custom_pdf_(x); }, 0.0,
        std::numeric_limits<double>::infinity(), opt, "custom mean");
    d.custom_second_moment_ = integrate_checked(
        [&d](double x) { return x * x * d.custom_pdf_(x); }, 0.0,
        std::numeric_limits<double>::infinity(), opt, "custom second moment");
    return d;
  }

  DistKind kind() const { return kind_; }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
      case DistKind::Exponential: return -std::expm1(-x);
      case DistKind::Weibull: return -std::expm1(-std::sqrt(2.0 * x));
      case DistKind::Custom: return custom_cdf_(x);
    }
    return 0.0;
  }

  double pdf(double x) const {
    if (x < 0.0) return 0.0;
    switch (kind_) {
      case DistKind::Exponential: return std::exp(-x);
      case DistKind::Weibull: {
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        const double s = std::sqrt(2.0 * x);
        return std::exp(-s) / s;
      }
      case DistKind::Custom: return custom_pdf_(x);
    }
    return 0.0;
  }

  double mean() const {
    switch (kind_) {
      case DistKind::Exponential: return 1.0;
      case DistKind::Weibull: return 1.0;
      case DistKind::Custom: return custom_mean_;
    }
    return 0.0;
  }

  double second_moment() const {
    switch (kind_) {
      case DistKind::Exponential: return 2.0;
      case DistKind::Weibull: return 6.0;
      case DistKind::Custom: return custom_second_moment_;
    }
    return 0.0;
  }

  // int_0^t x f(x) dx, the mean work brought by jobs of size at most t.
  double partial_load_integral(double t) const {
    if (t < 0.0) throw std::domain_error("partial_load_integral: t < 0");
    if (t == 0.0) return 0.0;
    switch (kind_) {
      case DistKind::Exponential:
        if (t > 745.0) return 1.0;
        return 1.0 - (t + 1.0) * std::exp(-t);
      case DistKind::Weibull: {
        const double s = std::sqrt(2.0 * t);
        if (s > 745.0) return 1.0;
        return 1.0 - std::exp(-s) * (t + s + 1.0);
      }
      case DistKind::Custom:
        return integrate_checked([this](double x) { return x * custom_pdf_(x); },
                                 0.0, t, QuadOptions{}, "partial load integral");
    }
    return 0.0;
  }

  // Inverse-cdf value for a survival draw u in (0,1): solves 1 - F(x) = u.
  double quantile_from_survival(double u) const {
    switch (kind_) {
      case DistKind::Exponential: return -std::log(u);
      case DistKind::Weibull: {
        const double l = std::log(1.0 / u);
        return 0.5 * l * l;
      }
      case DistKind::Custom: return invert_custom_cdf(1.0 - u);
    }
    return 0.0;
  }

  double sample(Rng &rng) const { return quantile_from_survival(rng.uniform01()); }

  // int_0^inf h(x) f(x) dx. Built-ins substitute away the density so the
  // integrand stays smooth (the Weibull density blows up at 0).
  template <typename H>
  double expect(const H &h, const QuadOptions &opt = {}) const {
    switch (kind_) {
      case DistKind::Exponential:
        return integrate_checked(
            [&h](double u) { return std::exp(-u) * h(u); }, 0.0,
            std::numeric_limits<double>::infinity(), opt, "expectation");
      case DistKind::Weibull:
        return integrate_checked(
            [&h](double u) { return std::exp(-u) * h(0.5 * u * u); }, 0.0,
            std::numeric_limits<double>::infinity(), opt, "expectation");
      case DistKind::Custom:
        return integrate_checked(
            [&h, this](double x) { return custom_pdf_(x) * h(x); }, 0.0,
            std::numeric_limits<double>::infinity(), opt, "expectation");
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind_) {
      case DistKind::Exponential: return "exponential";
      case DistKind::Weibull: return "weibull";
      case DistKind::Custom: return "custom";
    }
    return "?";
  }

 private:
  explicit ServiceDistribution(DistKind kind) : kind_(kind) {}

  double invert_custom_cdf(double p) const {
    // bracket then bisect; fine for the occasional custom sampler
    double lo = 0.0, hi = 1.0;
    while (custom_cdf_(hi) < p && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (custom_cdf_(mid) < p) lo = mid; else hi = mid;
      if (hi - lo < 1e-13 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
  }

  DistKind kind_;
  std::function<double(double)> custom_cdf_;
  std::function<double(double)> custom_pdf_;
  double custom_mean_ = 0.0;
  double custom_second_moment_ = 0.0;
};

// rho(T) = lambda * int_0^T x f(x) dx, the load from jobs of size at most T.
inline double partial_load(const ServiceDistribution &dist, double lambda,
                           double threshold) {
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::domain_error("partial_load: lambda must be in [0,1)");
  if (threshold < 0.0) throw std::domain_error("partial_load: negative threshold");
  return lambda * dist.partial_load_integral(threshold);
}

// V = lambda E[F^2] / 2, the mean residual service seen by a Poisson arrival.
inline double residual_work(const ServiceDistribution &dist, double lambda) {
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::domain_error("residual_work: lambda must be in [0,1)");
  return 0.5 * lambda * dist.second_moment();
}

inline double sample_service(const ServiceDistribution &dist, Rng &rng) {
  return dist.sample(rng);
}

enum class PredictionKind { Perfect, Exponential };

// One-bit advice source. g(T,x) is the probability that a job of actual
// size x is labeled "below T". The exponential model draws a predicted size
// that is exponential with mean equal to the actual size, giving
// g(T,x) = 1 - exp(-T/x).
class PredictionModel {
 public:
  static PredictionModel perfect() { return PredictionModel(PredictionKind::Perfect); }
  static PredictionModel exponential() {
    return PredictionModel(PredictionKind::Exponential);
  }

  PredictionKind kind() const { return kind_; }

  double g(double threshold, double x) const {
    switch (kind_) {
      case PredictionKind::Perfect: return x <= threshold ? 1.0 : 0.0;
      case PredictionKind::Exponential:
        if (threshold <= 0.0) return 0.0;
        return -std::expm1(-threshold / x);
    }
    return 0.0;
  }

  double sample_predicted_size(double x, Rng &rng) const {
    switch (kind_) {
      case PredictionKind::Perfect: return x;
      case PredictionKind::Exponential: return x * rng.exponential(1.0);
    }
    return x;
  }

  // True with probability g(threshold, x). The perfect model consumes no
  // randomness, so exact-advice and perfect-prediction runs share sample paths.
  bool label_below(double threshold, double x, Rng &rng) const {
    if (kind_ == PredictionKind::Perfect) return x <= threshold;
    return rng.bernoulli(g(threshold, x));
  }

  std::string name() const {
    return kind_ == PredictionKind::Perfect ? "perfect" : "exponential";
  }

 private:
  explicit PredictionModel(PredictionKind kind) : kind_(kind) {}
  PredictionKind kind_;
};

inline bool label_job(const PredictionModel &model, double threshold, double x,
                      Rng &rng) {
  if (threshold < 0.0) throw std::domain_error("label_job: negative threshold");
  return model.label_below(threshold, x, rng);
}

}  // namespace onebit
