#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "onebit/bessel.hpp"
#include "onebit/dist.hpp"
#include "onebit/errors.hpp"
#include "onebit/quadrature.hpp"

namespace onebit {

// Class-conditional waits and sojourns for one policy configuration.
// "below"/"above" is the advice bit, not the actual size, so under
// prediction models the classes mix sizes.
struct SojournBreakdown {
  double w_below = 0.0;
  double w_above = 0.0;
  double s_below = 0.0;
  double s_above = 0.0;
  double w_total = 0.0;
  double s_total = 0.0;
  double class_fraction_below = 0.0;
};

enum class AdviceKind { Exact, Predicted };

struct PolicyConfig {
  bool preemptive = false;
  AdviceKind advice = AdviceKind::Exact;
  PredictionModel model = PredictionModel::perfect();  // used when Predicted
  double threshold = 0.0;
  double lambda = 0.0;
  ServiceDistribution dist = ServiceDistribution::exponential();
};

// L(1 - rho) = V; L is constructed from the other two, so the identity is
// exact and the struct mostly documents which numbers belong together.
struct ConservationCheck {
  double expected_load;
  double residual;
  double total_rate;
};

inline ConservationCheck conservation_check(const ServiceDistribution &dist,
                                            double lambda) {
  const double rho = lambda * dist.mean();
  if (rho >= 1.0) throw InstabilityError("conservation_check: rho >= 1");
  const double v = residual_work(dist, lambda);
  return ConservationCheck{v / (1.0 - rho), v, rho};
}

// Mean equilibrium sojourn of the plain FIFO queue (Pollaczek-Khinchine).
inline double fifo_sojourn(const ServiceDistribution &dist, double lambda) {
  if (lambda < 0.0) throw std::domain_error("fifo_sojourn: negative lambda");
  const double rho = lambda * dist.mean();
  if (lambda >= 1.0 || rho >= 1.0)
    throw InstabilityError("fifo_sojourn: unstable (load >= 1)");
  return dist.mean() + residual_work(dist, lambda) / (1.0 - rho);
}

namespace detail {

// Shared final assembly once the label fractions and per-class mean sizes
// are known. q = fraction labeled below, rho_below = load from that class,
// mean_in/mean_out = mean actual size conditioned on the label.
inline SojournBreakdown assemble_breakdown(bool preemptive, double lambda,
                                           double mean, double second_moment,
                                           double q, double rho_below,
                                           double mean_below_class,
                                           double mean_above_class) {
  const double rho = lambda * mean;
  if (lambda >= 1.0 || rho >= 1.0)
    throw InstabilityError("threshold policy: unstable (load >= 1)");
  if (rho_below >= 1.0)
    throw InstabilityError("threshold policy: below-class load >= 1");
  const double v = 0.5 * lambda * second_moment;
  const double denom = 1.0 - rho_below;

  SojournBreakdown out;
  out.class_fraction_below = q;
  out.w_above = v / ((1.0 - rho) * denom);
  if (preemptive) {
    out.w_below = 0.0;
    out.s_below = mean_below_class / denom;
    out.s_above = out.w_above + mean_above_class / denom;
    out.w_total = (1.0 - q) * out.w_above;
    out.s_total = out.w_total + mean / denom;
  } else {
    out.w_below = v / denom;
    out.s_below = out.w_below + mean_below_class;
    out.s_above = out.w_above + mean_above_class;
    out.w_total = q * out.w_below + (1.0 - q) * out.w_above;
    out.s_total = out.w_total + mean;
  }
  return out;
}

}  // namespace detail

// One-bit threshold policy with exact advice (label = actual size <= T).
inline SojournBreakdown threshold_exact(const PolicyConfig &config) {
  if (config.threshold < 0.0)
    throw std::domain_error("threshold_exact: negative threshold");
  const ServiceDistribution &dist = config.dist;
  const double q = dist.cdf(config.threshold);
  const double below_mass = dist.partial_load_integral(config.threshold);
  const double rho_below = config.lambda * below_mass;
  const double mean_below = q > 0.0 ? below_mass / q : 0.0;
  const double mean_above =
      q < 1.0 ? (dist.mean() - below_mass) / (1.0 - q) : 0.0;
  return detail::assemble_breakdown(config.preemptive, config.lambda,
                                    dist.mean(), dist.second_moment(), q,
                                    rho_below, mean_below, mean_above);
}

// Q(T) = int f(x) g_T(x) dx, the fraction of jobs labeled below T.
inline double q_fraction(const PredictionModel &model,
                         const ServiceDistribution &dist, double threshold,
                         const QuadOptions &opt = {}) {
  if (threshold < 0.0) throw std::domain_error("q_fraction: negative threshold");
  if (threshold == 0.0) return 0.0;
  if (model.kind() == PredictionKind::Perfect) return dist.cdf(threshold);
  return dist.expect(
      [&model, threshold](double x) { return model.g(threshold, x); }, opt);
}

// rho'(T) = lambda int x f(x) g_T(x) dx, the load labeled below T.
inline double rho_prime(const PredictionModel &model,
                        const ServiceDistribution &dist, double lambda,
                        double threshold, const QuadOptions &opt = {}) {
  if (lambda < 0.0 || lambda >= 1.0)
    throw std::domain_error("rho_prime: lambda must be in [0,1)");
  if (threshold < 0.0) throw std::domain_error("rho_prime: negative threshold");
  if (threshold == 0.0) return 0.0;
  if (model.kind() == PredictionKind::Perfect)
    return lambda * dist.partial_load_integral(threshold);
  return lambda * dist.expect([&model, threshold](double x) {
    return x * model.g(threshold, x);
  }, opt);
}

// Threshold policy with predicted advice: Q(T) replaces F(T) and rho'(T)
// replaces rho(T) in the exact-advice formulas.
inline SojournBreakdown threshold_predicted(const PolicyConfig &config) {
  if (config.threshold < 0.0)
    throw std::domain_error("threshold_predicted: negative threshold");
  const ServiceDistribution &dist = config.dist;
  const PredictionModel &model = config.model;
  const double q = q_fraction(model, dist, config.threshold);
  double below_mass;  // E[x ; labeled below] = rho'(T)/lambda
  if (model.kind() == PredictionKind::Perfect) {
    below_mass = dist.partial_load_integral(config.threshold);
  } else if (config.threshold == 0.0) {
    below_mass = 0.0;
  } else {
    below_mass = dist.expect([&model, t = config.threshold](double x) {
      return x * model.g(t, x);
    });
  }
  const double rho_below = config.lambda * below_mass;
  const double mean_below = q > 0.0 ? below_mass / q : 0.0;
  const double mean_above =
      q < 1.0 ? (dist.mean() - below_mass) / (1.0 - q) : 0.0;
  return detail::assemble_breakdown(config.preemptive, config.lambda,
                                    dist.mean(), dist.second_moment(), q,
                                    rho_below, mean_below, mean_above);
}

inline SojournBreakdown threshold_sojourn(const PolicyConfig &config) {
  return config.advice == AdviceKind::Exact ? threshold_exact(config)
                                            : threshold_predicted(config);
}

// Closed forms for the exponential-service / exponential-prediction pairing.
inline double q_fraction_bessel(double threshold) {
  if (threshold < 0.0) throw std::domain_error("q_fraction_bessel: negative threshold");
  if (threshold == 0.0) return 0.0;
  const double s = 2.0 * std::sqrt(threshold);
  return 1.0 - s * bessel_k1(s);
}

inline double rho_prime_bessel(double lambda, double threshold) {
  if (threshold < 0.0) throw std::domain_error("rho_prime_bessel: negative threshold");
  if (threshold == 0.0) return 0.0;
  return lambda * (1.0 - 2.0 * threshold * bessel_k2(2.0 * std::sqrt(threshold)));
}

struct OptimalThreshold {
  double threshold = 0.0;
  double sojourn = 0.0;
  // set when the 64-point pre-scan minimum disagrees with the refined
  // search value by more than 1e-3 (would suggest a multimodal objective)
  bool grid_mismatch = false;
};

// Numeric minimizer of s_total over the threshold: coarse pre-scan with
// doubling bracket expansion, then golden-section.
template <typename Objective>
inline OptimalThreshold minimize_threshold(const Objective &objective) {
  constexpr int kGridPoints = 64;
  constexpr double kExpandCap = 1.0e7;
  double hi = 8.0;
  int best = 0;
  double grid_best_value = 0.0;
  double grid_step = 0.0;
  for (;;) {
    grid_step = hi / (kGridPoints - 1);
    best = 0;
    grid_best_value = objective(0.0);
    for (int i = 1; i < kGridPoints; ++i) {
      const double value = objective(i * grid_step);
      if (value < grid_best_value) {
        grid_best_value = value;
        best = i;
      }
    }
    if (best < kGridPoints - 2) break;
    hi *= 2.0;
    if (hi > kExpandCap)
      throw SearchError("minimize_threshold: bracket expansion cap reached");
  }
  double a = best > 0 ? (best - 1) * grid_step : 0.0;
  double b = (best + 1) * grid_step;

  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > 1e-10 * (1.0 + b)) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
  }
  OptimalThreshold result;
  result.threshold = 0.5 * (a + b);
  result.sojourn = objective(result.threshold);
  result.grid_mismatch = grid_best_value < result.sojourn - 1e-3;
  return result;
}

// Minimizes the mean sojourn of `config` over the threshold.
inline OptimalThreshold optimal_threshold(const PolicyConfig &config_template) {
  if (config_template.lambda <= 0.0 || config_template.lambda >= 1.0)
    throw std::domain_error("optimal_threshold: lambda must be in (0,1)");
  PolicyConfig config = config_template;
  return minimize_threshold([&config](double t) {
    config.threshold = t;
    return threshold_sojourn(config).s_total;
  });
}

// Root of lambda = (T-1)/(exp(-T)+T-1) on T in (1, inf): the stationarity
// condition for the optimal threshold with exponential service and exact
// advice (same condition with and without preemption). The left side is
// increasing in T, so bisection applies.
inline double exp_optimal_threshold_root(double lambda) {
  if (lambda <= 0.0 || lambda >= 1.0)
    throw std::domain_error("exp_optimal_threshold_root: lambda must be in (0,1)");
  auto h = [](double t) { return (t - 1.0) / (std::exp(-t) + t - 1.0); };
  double lo = 1.0;
  double hi = 2.0;
  while (h(hi) < lambda) {
    hi *= 2.0;
    if (hi > 1e9)
      throw SearchError("exp_optimal_threshold_root: bracket cap reached");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < lambda) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace onebit
