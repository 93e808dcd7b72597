#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "onebit/errors.hpp"
#include "onebit/sim_cluster.hpp"

namespace onebit {

struct MfParams {
  double lambda_long = 0.0;
  double lambda_short = 0.0;
  double p_long = 1.0;
  double p_short = 1.0;
  double rate_long = 0.0;   // 1 / mean service of a long job
  double rate_short = 0.0;  // 1 / mean service of a short job
  int d = 2;
  int s_max = 40;
  int l_max = 40;
};

inline MfParams mf_params(const ClusterConfig &config, int s_max = 40,
                          int l_max = 40) {
  config.validate();
  const DerivedRates r = derived_rates(config);
  MfParams p;
  p.lambda_long = r.lambda_long;
  p.lambda_short = r.lambda_short;
  p.p_long = r.p_long;
  p.p_short = r.p_short;
  p.rate_long = 1.0 / config.mean1;
  p.rate_short = 1.0 / config.mean2;
  p.d = config.d;
  p.s_max = s_max;
  p.l_max = l_max;
  return p;
}

// Occupancy fractions over queue states (s, l, c): s queued labeled-short
// jobs, l queued labeled-long jobs, and the job in service actually long
// (c=0) or short (c=1). `empty` holds the fully empty state.
struct MfState {
  int s_max = 0;
  int l_max = 0;
  std::vector<double> x;  // (s_max+1) * (l_max+1) * 2 entries
  double empty = 1.0;

  MfState() = default;
  MfState(int s_hi, int l_hi)
      : s_max(s_hi), l_max(l_hi),
        x(static_cast<std::size_t>(s_hi + 1) * (l_hi + 1) * 2, 0.0) {}

  std::size_t idx(int s, int l, int c) const {
    return (static_cast<std::size_t>(s) * (l_max + 1) + l) * 2 + c;
  }
  double &at(int s, int l, int c) { return x[idx(s, l, c)]; }
  double at(int s, int l, int c) const { return x[idx(s, l, c)]; }

  double mass() const {
    double total = empty;
    for (double v : x) total += v;
    return total;
  }
};

// z and w tables for one state snapshot. Index 0 is the labeled-long
// arrival's view, index 1 the labeled-short arrival's view.
struct ChoiceTables {
  int s_max = 0;
  int l_max = 0;
  std::vector<double> z[2];  // per (s,l): mass of strictly worse queues
  std::vector<double> w[2];  // per (s,l,c): selection probability
  double w_empty = 0.0;

  void resize(int s_hi, int l_hi) {
    s_max = s_hi;
    l_max = l_hi;
    const std::size_t cells = static_cast<std::size_t>(s_hi + 1) * (l_hi + 1);
    for (int a = 0; a < 2; ++a) {
      z[a].assign(cells, 0.0);
      w[a].assign(cells * 2, 0.0);
    }
  }
  std::size_t zidx(int s, int l) const {
    return static_cast<std::size_t>(s) * (l_max + 1) + l;
  }
  std::size_t widx(int s, int l, int c) const { return zidx(s, l) * 2 + c; }
};

// Fraction of queues a sampled arrival ranks strictly below each state.
// Labeled-short arrivals order states lexicographically by (s, l), labeled
// long by (l, s); the empty state outranks everything and never appears.
inline void compute_z(const MfState &state, ChoiceTables &tables) {
  tables.resize(state.s_max, state.l_max);
  // labeled short: reverse lexicographic sweep in (s, l)
  double acc = 0.0;
  for (int s = state.s_max; s >= 0; --s)
    for (int l = state.l_max; l >= 0; --l) {
      tables.z[1][tables.zidx(s, l)] = acc;
      acc += state.at(s, l, 0) + state.at(s, l, 1);
    }
  // labeled long: reverse lexicographic sweep in (l, s)
  acc = 0.0;
  for (int l = state.l_max; l >= 0; --l)
    for (int s = state.s_max; s >= 0; --s) {
      tables.z[0][tables.zidx(s, l)] = acc;
      acc += state.at(s, l, 0) + state.at(s, l, 1);
    }
}

namespace detail {
inline double pow_int(double base, int n) {
  double out = 1.0;
  for (int i = 0; i < n; ++i) out *= base;
  return out;
}
}  // namespace detail

// Probability that an arrival picks a queue in each state: the best of d
// samples lands in the state's priority class, split between c values in
// proportion to their mass.
inline void compute_w(const MfState &state, ChoiceTables &tables, int d) {
  for (int s = 0; s <= state.s_max; ++s)
    for (int l = 0; l <= state.l_max; ++l) {
      const double m0 = state.at(s, l, 0);
      const double m1 = state.at(s, l, 1);
      const double m = m0 + m1;
      for (int a = 0; a < 2; ++a) {
        const std::size_t wi = tables.widx(s, l, 0);
        if (m <= 0.0) {
          tables.w[a][wi] = 0.0;
          tables.w[a][wi + 1] = 0.0;
          continue;
        }
        const double z = tables.z[a][tables.zidx(s, l)];
        const double selected =
            d == 2 ? m * (2.0 * z + m)
                   : detail::pow_int(z + m, d) - detail::pow_int(z, d);
        tables.w[a][wi] = selected * m0 / m;
        tables.w[a][wi + 1] = selected * m1 / m;
      }
    }
  tables.w_empty = 1.0 - detail::pow_int(1.0 - state.empty, d);
}

struct MfDerivative {
  std::vector<double> x;  // same layout as MfState::x
  double empty = 0.0;
  double truncation_flux = 0.0;  // suppressed arrival flux at the boundary
  double max_norm = 0.0;
};

// Right-hand side of the mean-field system. Arrivals that would push a
// queue past the truncation boundary leave it unchanged; their rate is
// reported as the truncation diagnostic.
inline void derivative(const MfState &state, const MfParams &params,
                       ChoiceTables &tables, MfDerivative &out) {
  compute_z(state, tables);
  compute_w(state, tables, params.d);
  out.x.assign(state.x.size(), 0.0);
  out.truncation_flux = 0.0;
  const double lam_s = params.lambda_short;
  const double lam_l = params.lambda_long;
  const double rates[2] = {params.rate_long, params.rate_short};
  const double p_l = params.p_long;
  const double p_s = params.p_short;

  for (int s = 0; s <= state.s_max; ++s)
    for (int l = 0; l <= state.l_max; ++l) {
      const double completion_flux_here =
          (s + 1 <= state.s_max)
              ? rates[0] * state.at(s + 1, l, 0) + rates[1] * state.at(s + 1, l, 1)
              : 0.0;
      const double completion_flux_long =
          (s == 0 && l + 1 <= state.l_max)
              ? rates[0] * state.at(0, l + 1, 0) + rates[1] * state.at(0, l + 1, 1)
              : 0.0;
      for (int c = 0; c < 2; ++c) {
        double rate = 0.0;
        if (s > 0) rate += lam_s * tables.w[1][tables.widx(s - 1, l, c)];
        if (l > 0) rate += lam_l * tables.w[0][tables.widx(s, l - 1, c)];
        // a completing queue starts its next labeled-short job, which is
        // actually short with probability p_short
        rate += completion_flux_here * (c == 0 ? 1.0 - p_s : p_s);
        // with no labeled-short jobs left, the next is labeled long
        rate += completion_flux_long * (c == 0 ? p_l : 1.0 - p_l);
        if (s == 0 && l == 0) {
          const double into_service =
              c == 0 ? lam_l * p_l + lam_s * (1.0 - p_s)
                     : lam_s * p_s + lam_l * (1.0 - p_l);
          rate += into_service * tables.w_empty;
        }
        const double x_here = state.at(s, l, c);
        rate -= rates[c] * x_here;
        const double out_short = lam_s * tables.w[1][tables.widx(s, l, c)];
        if (s < state.s_max) rate -= out_short;
        else out.truncation_flux += out_short;
        const double out_long = lam_l * tables.w[0][tables.widx(s, l, c)];
        if (l < state.l_max) rate -= out_long;
        else out.truncation_flux += out_long;
        out.x[state.idx(s, l, c)] = rate;
      }
    }
  out.empty = rates[0] * state.at(0, 0, 0) + rates[1] * state.at(0, 0, 1) -
              (lam_s + lam_l) * tables.w_empty;

  double mx = std::fabs(out.empty);
  for (double v : out.x) mx = std::max(mx, std::fabs(v));
  out.max_norm = mx;
}

inline MfDerivative derivative(const MfState &state, const MfParams &params) {
  ChoiceTables tables;
  MfDerivative out;
  derivative(state, params, tables, out);
  return out;
}

struct MfDiagnostics {
  long steps = 0;
  double elapsed_time = 0.0;       // integrated model time
  double final_residual = 0.0;     // max-norm of the derivative at exit
  double truncation_integral = 0.0;
  double clamped_mass = 0.0;
  int renormalizations = 0;
  bool reached_tolerance = false;
};

struct MfSolution {
  MfState state;
  MfDiagnostics diagnostics;
};

struct MfIntegrationOptions {
  double dt = 1e-3;
  double horizon = 1e4;
  double stop_tol = 1e-9;
  double truncation_limit = 1e-6;
  double clamp_limit = 1e-6;
};

// Forward Euler from the all-empty state until the derivative max-norm
// drops below stop_tol (or the horizon runs out). The fixed point itself
// does not depend on dt; dt only has to keep Euler stable.
inline MfSolution integrate_to_fixed_point(const MfParams &params,
                                           const MfIntegrationOptions &opt = {}) {
  if (opt.dt <= 0.0) throw std::domain_error("integrate_to_fixed_point: dt <= 0");
  MfSolution sol;
  sol.state = MfState(params.s_max, params.l_max);
  sol.state.empty = 1.0;
  ChoiceTables tables;
  MfDerivative deriv;
  MfDiagnostics &diag = sol.diagnostics;

  const long max_steps = static_cast<long>(opt.horizon / opt.dt);
  for (long step = 0; step < max_steps; ++step) {
    derivative(sol.state, params, tables, deriv);
    diag.final_residual = deriv.max_norm;
    if (deriv.max_norm < opt.stop_tol) {
      diag.reached_tolerance = true;
      break;
    }
    for (std::size_t i = 0; i < sol.state.x.size(); ++i) {
      double v = sol.state.x[i] + opt.dt * deriv.x[i];
      if (v < 0.0) {
        diag.clamped_mass += -v;
        v = 0.0;
      }
      sol.state.x[i] = v;
    }
    sol.state.empty = std::max(0.0, sol.state.empty + opt.dt * deriv.empty);
    diag.truncation_integral += opt.dt * deriv.truncation_flux;
    ++diag.steps;
    diag.elapsed_time += opt.dt;
    if ((step & 1023) == 0) {
      const double mass = sol.state.mass();
      if (std::fabs(mass - 1.0) > 1e-9) {
        const double scale = 1.0 / mass;
        for (double &v : sol.state.x) v *= scale;
        sol.state.empty *= scale;
        ++diag.renormalizations;
      }
    }
  }

  if (diag.truncation_integral > opt.truncation_limit ||
      diag.clamped_mass > opt.clamp_limit) {
    std::ostringstream msg;
    msg << "integrate_to_fixed_point: poor integration quality (truncation="
        << diag.truncation_integral << ", clamped=" << diag.clamped_mass
        << "); raise s_max/l_max or shrink dt";
    throw NumericError(msg.str());
  }
  return sol;
}

// Little's law on the equilibrium state: jobs in system over arrival rate.
inline double mean_sojourn(const MfState &state, const MfParams &params) {
  const double arrival_rate = params.lambda_long + params.lambda_short;
  if (arrival_rate <= 0.0) return 0.0;
  double jobs = 0.0;
  for (int s = 0; s <= state.s_max; ++s)
    for (int l = 0; l <= state.l_max; ++l)
      jobs += (s + l + 1) * (state.at(s, l, 0) + state.at(s, l, 1));
  return jobs / arrival_rate;
}

}  // namespace onebit
