#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

#include "onebit/analytic.hpp"
#include "onebit/dist.hpp"
#include "onebit/rng.hpp"
#include "onebit/stats.hpp"

namespace onebit {

enum class PolicyKind { Fifo, Srpt, Sprpt, ThresholdExact, ThresholdPredicted };

struct SchedulingPolicy {
  PolicyKind kind = PolicyKind::Fifo;
  double threshold = 0.0;
  bool preemptive = false;
  PredictionModel model = PredictionModel::perfect();

  static SchedulingPolicy fifo() { return {}; }
  static SchedulingPolicy srpt() { return {PolicyKind::Srpt, 0.0, true,
                                           PredictionModel::perfect()}; }
  static SchedulingPolicy sprpt(PredictionModel m = PredictionModel::exponential()) {
    return {PolicyKind::Sprpt, 0.0, true, m};
  }
  static SchedulingPolicy threshold_exact(double t, bool preemptive) {
    if (t < 0.0) throw std::domain_error("threshold_exact: negative threshold");
    return {PolicyKind::ThresholdExact, t, preemptive, PredictionModel::perfect()};
  }
  static SchedulingPolicy threshold_predicted(double t, bool preemptive,
                                              PredictionModel m) {
    if (t < 0.0) throw std::domain_error("threshold_predicted: negative threshold");
    return {PolicyKind::ThresholdPredicted, t, preemptive, m};
  }

  const char *name() const {
    switch (kind) {
      case PolicyKind::Fifo: return "fifo";
      case PolicyKind::Srpt: return "srpt";
      case PolicyKind::Sprpt: return "sprpt";
      case PolicyKind::ThresholdExact:
        return preemptive ? "threshold-preempt" : "threshold";
      case PolicyKind::ThresholdPredicted:
        return preemptive ? "prediction-preempt" : "prediction";
    }
    return "?";
  }
};

struct SimConfig {
  double lambda = 0.9;
  double horizon = 2e5;
  double warmup = 2e4;
  std::uint64_t seed = 1;
  ServiceDistribution dist = ServiceDistribution::exponential();
};

struct SimStats {
  long completed_count = 0;
  double mean_sojourn = 0.0;
  double mean_wait = 0.0;
  double sample_variance = 0.0;
  double time_avg_workload = 0.0;
  double ci95_halfwidth = 0.0;  // aggregates only
  bool is_aggregate = false;
  double rep_min = 0.0;  // spread of per-replication means
  double rep_max = 0.0;
  double service_accounting_error = 0.0;  // max |delivered - size|, diagnostic
};

namespace detail {

struct SimJob {
  double arrival = 0.0;
  double size = 0.0;
  double remaining = 0.0;
  double served = 0.0;
  double predicted = 0.0;    // SPRPT key, drawn once on arrival
  double first_start = -1.0;
  std::uint64_t id = 0;
  bool below = false;
};

// min-heap order on (key, arrival, id)
struct RemainingOrder {
  bool operator()(const SimJob &a, const SimJob &b) const {
    if (a.remaining != b.remaining) return a.remaining > b.remaining;
    if (a.arrival != b.arrival) return a.arrival > b.arrival;
    return a.id > b.id;
  }
};

struct PredictedOrder {
  bool operator()(const SimJob &a, const SimJob &b) const {
    const double ka = a.predicted - a.served;
    const double kb = b.predicted - b.served;
    if (ka != kb) return ka > kb;
    if (a.arrival != b.arrival) return a.arrival > b.arrival;
    return a.id > b.id;
  }
};

class SingleQueueRun {
 public:
  SingleQueueRun(const SimConfig &config, const SchedulingPolicy &policy)
      : config_(config), policy_(policy), rng_(config.seed) {
    if (!(config.warmup > 0.0 && config.warmup < config.horizon))
      throw std::domain_error("SimConfig: need 0 < warmup < horizon");
    if (config.lambda < 0.0 || config.lambda >= 1.0)
      throw std::domain_error("SimConfig: lambda must be in [0,1)");
  }

  SimStats run() {
    const double inf = std::numeric_limits<double>::infinity();
    double next_arrival =
        config_.lambda > 0.0 ? rng_.exponential(config_.lambda) : inf;
    for (;;) {
      const double next_completion = busy_ ? completion_ : inf;
      const double t = std::min(next_arrival, next_completion);
      if (t > config_.horizon || t == inf) {
        advance_to(config_.horizon);
        break;
      }
      advance_to(t);
      if (next_completion <= next_arrival) {
        complete();
      } else {
        handle_arrival(t);
        next_arrival = t + rng_.exponential(config_.lambda);
      }
    }

    SimStats stats;
    stats.completed_count = counted_;
    if (counted_ > 0) {
      stats.mean_sojourn = sojourn_sum_ / counted_;
      stats.mean_wait = wait_sum_ / counted_;
      if (counted_ > 1)
        stats.sample_variance =
            (sojourn_sq_sum_ - sojourn_sum_ * sojourn_sum_ / counted_) /
            (counted_ - 1);
    }
    stats.time_avg_workload =
        workload_integral_ / (config_.horizon - config_.warmup);
    stats.service_accounting_error = accounting_error_;
    return stats;
  }

 private:
  void advance_to(double t) {
    const double dt = t - now_;
    if (dt > 0.0) {
      const double lo = std::max(now_, config_.warmup);
      if (t > lo) {
        const double len = t - lo;
        const double work_at_lo = total_work_ - (busy_ ? lo - now_ : 0.0);
        workload_integral_ += work_at_lo * len - (busy_ ? 0.5 * len * len : 0.0);
      }
      if (busy_) total_work_ -= dt;
      now_ = t;
    }
  }

  void handle_arrival(double t) {
    SimJob job;
    job.arrival = t;
    job.id = next_id_++;
    job.size = config_.dist.sample(rng_);
    job.remaining = job.size;
    total_work_ += job.size;
    switch (policy_.kind) {
      case PolicyKind::Fifo:
        fifo_.push_back(job);
        if (!busy_) dispatch();
        break;
      case PolicyKind::Srpt:
        if (!busy_) {
          start(job);
        } else if (job.size < live_remaining()) {
          preempt_into_heap(srpt_);
          start(job);
        } else {
          srpt_.push(job);
        }
        break;
      case PolicyKind::Sprpt:
        job.predicted = policy_.model.sample_predicted_size(job.size, rng_);
        if (!busy_) {
          start(job);
        } else if (job.predicted < live_predicted_remaining()) {
          preempt_into_heap(sprpt_);
          start(job);
        } else {
          sprpt_.push(job);
        }
        break;
      case PolicyKind::ThresholdExact:
      case PolicyKind::ThresholdPredicted:
        job.below = policy_.kind == PolicyKind::ThresholdExact
                        ? job.size <= policy_.threshold
                        : policy_.model.label_below(policy_.threshold, job.size,
                                                    rng_);
        if (job.below) {
          if (policy_.preemptive) {
            // below arrivals jump straight into service; whatever was
            // running resumes later with no work lost
            if (busy_) preempt_current();
            start(job);
          } else {
            below_.push_back(job);
            if (!busy_) dispatch();
          }
        } else {
          above_.push_back(job);
          if (!busy_) dispatch();
        }
        break;
    }
  }

  double live_remaining() const { return completion_ - now_; }

  double live_predicted_remaining() const {
    return current_.predicted - current_.served - (now_ - serve_begin_);
  }

  template <typename Heap>
  void preempt_into_heap(Heap &heap) {
    pause_current();
    heap.push(current_);
    busy_ = false;
  }

  void preempt_current() {
    pause_current();
    if (current_.below) {
      below_.push_back(current_);  // LIFO resume stack
    } else {
      above_.push_front(current_);
    }
    busy_ = false;
  }

  void pause_current() {
    const double elapsed = now_ - serve_begin_;
    current_.served += elapsed;
    current_.remaining -= elapsed;
  }

  void start(SimJob job) {
    current_ = job;
    if (current_.first_start < 0.0) current_.first_start = now_;
    serve_begin_ = now_;
    completion_ = now_ + current_.remaining;
    busy_ = true;
  }

  void dispatch() {
    switch (policy_.kind) {
      case PolicyKind::Fifo:
        if (!fifo_.empty()) { start(fifo_.front()); fifo_.pop_front(); }
        break;
      case PolicyKind::Srpt:
        if (!srpt_.empty()) { start(srpt_.top()); srpt_.pop(); }
        break;
      case PolicyKind::Sprpt:
        if (!sprpt_.empty()) { start(sprpt_.top()); sprpt_.pop(); }
        break;
      case PolicyKind::ThresholdExact:
      case PolicyKind::ThresholdPredicted:
        if (!below_.empty()) {
          if (policy_.preemptive) {
            start(below_.back());
            below_.pop_back();
          } else {
            start(below_.front());
            below_.pop_front();
          }
        } else if (!above_.empty()) {
          start(above_.front());
          above_.pop_front();
        }
        break;
    }
  }

  void complete() {
    current_.served += current_.remaining;
    current_.remaining = 0.0;
    busy_ = false;
    accounting_error_ = std::max(
        accounting_error_, std::abs(current_.served - current_.size));
    if (now_ > config_.warmup) {
      const double sojourn = now_ - current_.arrival;
      sojourn_sum_ += sojourn;
      sojourn_sq_sum_ += sojourn * sojourn;
      wait_sum_ += current_.first_start - current_.arrival;
      ++counted_;
    }
    dispatch();
  }

  SimConfig config_;
  SchedulingPolicy policy_;
  Rng rng_;

  double now_ = 0.0;
  bool busy_ = false;
  double completion_ = 0.0;
  double serve_begin_ = 0.0;
  SimJob current_;
  std::uint64_t next_id_ = 0;

  std::deque<SimJob> fifo_;
  std::deque<SimJob> below_;  // LIFO stack when preemptive, FIFO otherwise
  std::deque<SimJob> above_;
  std::priority_queue<SimJob, std::vector<SimJob>, RemainingOrder> srpt_;
  std::priority_queue<SimJob, std::vector<SimJob>, PredictedOrder> sprpt_;

  double total_work_ = 0.0;
  double workload_integral_ = 0.0;
  double sojourn_sum_ = 0.0;
  double sojourn_sq_sum_ = 0.0;
  double wait_sum_ = 0.0;
  long counted_ = 0;
  double accounting_error_ = 0.0;
};

template <typename F>
inline void parallel_for(int n, const F &body) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> cursor{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&cursor, n, &body] {
      for (;;) {
        const int i = cursor.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto &t : pool) t.join();
}

}  // namespace detail

inline SimStats run_single(const SimConfig &config,
                           const SchedulingPolicy &policy) {
  detail::SingleQueueRun engine(config, policy);
  return engine.run();
}

inline SimStats aggregate(const std::vector<SimStats> &runs) {
  std::vector<double> sojourns, waits;
  sojourns.reserve(runs.size());
  waits.reserve(runs.size());
  SimStats out;
  out.is_aggregate = true;
  double workload = 0.0;
  for (const SimStats &r : runs) {
    out.completed_count += r.completed_count;
    sojourns.push_back(r.mean_sojourn);
    waits.push_back(r.mean_wait);
    workload += r.time_avg_workload;
    out.service_accounting_error =
        std::max(out.service_accounting_error, r.service_accounting_error);
  }
  const SampleSummary s = summarize(sojourns);
  const SampleSummary w = summarize(waits);
  out.mean_sojourn = s.mean;
  out.mean_wait = w.mean;
  out.sample_variance = s.variance;
  out.ci95_halfwidth = ci95_halfwidth(s);
  out.rep_min = s.min;
  out.rep_max = s.max;
  out.time_avg_workload = runs.empty() ? 0.0 : workload / runs.size();
  return out;
}

// Averages `reps` independent runs; per-rep seeds derive from config.seed.
inline SimStats replicate(const SimConfig &config,
                          const SchedulingPolicy &policy, int reps) {
  if (reps < 2) throw std::domain_error("replicate: need reps >= 2");
  std::vector<SimStats> runs(reps);
  detail::parallel_for(reps, [&](int i) {
    SimConfig c = config;
    c.seed = Rng::derive_seed(config.seed, static_cast<std::uint64_t>(i));
    runs[i] = run_single(c, policy);
  });
  return aggregate(runs);
}

// Relative gap between the simulated time-average workload and the
// conservation-law value V/(1-rho).
inline double workload_conservation_check(const SimStats &stats,
                                          const ServiceDistribution &dist,
                                          double lambda) {
  const double expected = conservation_check(dist, lambda).expected_load;
  if (expected == 0.0) return std::abs(stats.time_avg_workload);
  return std::abs(stats.time_avg_workload - expected) / expected;
}

}  // namespace onebit
