#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "onebit/rng.hpp"
#include "onebit/sim_single.hpp"
#include "onebit/stats.hpp"

namespace onebit {

// Two job types with exponential service; type 1 is "long", type 2 "short".
// mean1/mean2 are mean service times; labels flip with probability q1/q2.
struct ClusterConfig {
  int n = 200;
  int d = 2;
  double lambda1 = 0.225;   // per-queue arrival rate of long jobs
  double lambda2 = 0.90;    // per-queue arrival rate of short jobs
  double mean1 = 3.2;
  double mean2 = 0.20;
  double q1 = 0.0;          // P(long labeled short)
  double q2 = 0.0;          // P(short labeled long)
  double horizon = 2e4;
  double warmup = 2e3;
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1) throw std::domain_error("ClusterConfig: n < 1");
    if (d < 1) throw std::domain_error("ClusterConfig: d < 1");
    if (!(mean1 > mean2 && mean2 > 0.0))
      throw std::domain_error("ClusterConfig: need mean1 > mean2 > 0");
    if (q1 < 0.0 || q1 > 1.0 || q2 < 0.0 || q2 > 1.0)
      throw std::domain_error("ClusterConfig: q1,q2 must be in [0,1]");
    if (lambda1 * mean1 + lambda2 * mean2 >= 1.0)
      throw InstabilityError("ClusterConfig: per-queue load >= 1");
    if (!(warmup > 0.0 && warmup < horizon))
      throw std::domain_error("ClusterConfig: need 0 < warmup < horizon");
  }
};

struct DerivedRates {
  double p_long = 1.0;    // P(actually long | labeled long)
  double p_short = 1.0;   // P(actually short | labeled short)
  double lambda_long = 0.0;
  double lambda_short = 0.0;
};

inline DerivedRates derived_rates(const ClusterConfig &c) {
  DerivedRates r;
  r.lambda_long = c.lambda1 * (1.0 - c.q1) + c.lambda2 * c.q2;
  r.lambda_short = c.lambda2 * (1.0 - c.q2) + c.lambda1 * c.q1;
  // a label that never occurs carries probability 1 by convention
  r.p_long = r.lambda_long > 0.0 ? c.lambda1 * (1.0 - c.q1) / r.lambda_long : 1.0;
  r.p_short = r.lambda_short > 0.0 ? c.lambda2 * (1.0 - c.q2) / r.lambda_short : 1.0;
  return r;
}

enum class ClusterPolicy { OneBit, OneChoiceFifo, ShorterOfTwoFifo, LeastLoadedSrpt };

inline const char *cluster_policy_name(ClusterPolicy p) {
  switch (p) {
    case ClusterPolicy::OneBit: return "one-bit";
    case ClusterPolicy::OneChoiceFifo: return "one-choice-fifo";
    case ClusterPolicy::ShorterOfTwoFifo: return "shorter-of-two-fifo";
    case ClusterPolicy::LeastLoadedSrpt: return "least-loaded-srpt";
  }
  return "?";
}

// Snapshot of what an arrival is allowed to see when ranking a sampled
// queue: queued label counts only, never the job in service.
struct QueueView {
  bool empty = false;
  int queued_short = 0;
  int queued_long = 0;
};

// Ranking rule for the one-bit policy. Empty queues win outright; otherwise
// a labeled-short arrival orders by (queued short, queued long) and a
// labeled-long arrival by (queued long, queued short); remaining ties are
// uniform random. Returns an index into `sampled`.
inline int choose_queue(const std::vector<QueueView> &sampled, bool labeled_short,
                        Rng &rng) {
  if (sampled.empty()) throw std::domain_error("choose_queue: no samples");
  int best = 0;
  int ties = 1;
  auto better = [labeled_short](const QueueView &a, const QueueView &b) {
    // returns -1 if a better, 0 tie, 1 if b better
    if (a.empty != b.empty) return a.empty ? -1 : 1;
    if (a.empty) return 0;
    const int a1 = labeled_short ? a.queued_short : a.queued_long;
    const int b1 = labeled_short ? b.queued_short : b.queued_long;
    if (a1 != b1) return a1 < b1 ? -1 : 1;
    const int a2 = labeled_short ? a.queued_long : a.queued_short;
    const int b2 = labeled_short ? b.queued_long : b.queued_short;
    if (a2 != b2) return a2 < b2 ? -1 : 1;
    return 0;
  };
  for (int i = 1; i < static_cast<int>(sampled.size()); ++i) {
    const int cmp = better(sampled[i], sampled[best]);
    if (cmp < 0) {
      best = i;
      ties = 1;
    } else if (cmp == 0) {
      // reservoir pick keeps every tied sample equally likely
      ++ties;
      if (rng.bounded(static_cast<std::uint64_t>(ties)) == 0) best = i;
    }
  }
  return best;
}

namespace detail {

struct ClusterJob {
  double arrival = 0.0;
  double size = 0.0;  // remaining work once service has started
  double first_start = -1.0;
  bool actually_long = false;
  bool labeled_long = false;
};

struct HeapOrder {  // SRPT within a queue
  bool operator()(const ClusterJob &a, const ClusterJob &b) const {
    if (a.size != b.size) return a.size > b.size;
    return a.arrival > b.arrival;
  }
};

struct Node {
  std::deque<ClusterJob> short_list;
  std::deque<ClusterJob> long_list;
  std::deque<ClusterJob> fifo;                     // baselines
  std::priority_queue<ClusterJob, std::vector<ClusterJob>, HeapOrder> srpt;
  bool busy = false;
  ClusterJob in_service;
  double completion = 0.0;
  double serve_begin = 0.0;
  std::uint64_t epoch = 0;   // invalidates stale completion events
  double work = 0.0;         // unfinished work as of work_time
  double work_time = 0.0;

  int total_jobs() const {
    return static_cast<int>(short_list.size() + long_list.size() + fifo.size() +
                            srpt.size()) +
           (busy ? 1 : 0);
  }

  double current_work(double now) {
    if (work > 0.0) {
      work = std::max(0.0, work - (now - work_time));
    }
    work_time = now;
    return work;
  }
};

struct ClusterEvent {
  double time;
  std::uint64_t seq;
  std::int32_t queue;   // -1: long arrival, -2: short arrival, else completion
  std::uint64_t epoch;
  bool operator>(const ClusterEvent &other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

class ClusterRun {
 public:
  ClusterRun(const ClusterConfig &config, ClusterPolicy policy)
      : config_(config), policy_(policy), rng_(config.seed) {
    config.validate();
  }

  SimStats run() {
    nodes_.assign(config_.n, Node());
    const double arr_rate1 = config_.lambda1 * config_.n;
    const double arr_rate2 = config_.lambda2 * config_.n;
    if (arr_rate1 > 0.0) push_event(rng_.exponential(arr_rate1), -1, 0);
    if (arr_rate2 > 0.0) push_event(rng_.exponential(arr_rate2), -2, 0);

    while (!events_.empty()) {
      const ClusterEvent ev = events_.top();
      if (ev.time > config_.horizon) break;
      events_.pop();
      now_ = ev.time;
      if (ev.queue == -1) {
        handle_arrival(true);
        push_event(now_ + rng_.exponential(arr_rate1), -1, 0);
      } else if (ev.queue == -2) {
        handle_arrival(false);
        push_event(now_ + rng_.exponential(arr_rate2), -2, 0);
      } else {
        Node &node = nodes_[ev.queue];
        if (node.busy && ev.epoch == node.epoch && ev.time == node.completion)
          handle_completion(node);
      }
    }

    SimStats stats;
    stats.completed_count = counted_;
    if (counted_ > 0) {
      stats.mean_sojourn = sojourn_sum_ / counted_;
      stats.mean_wait = wait_sum_ / counted_;
      if (counted_ > 1)
        stats.sample_variance =
            (sojourn_sq_ - sojourn_sum_ * sojourn_sum_ / counted_) / (counted_ - 1);
    }
    return stats;
  }

 private:
  void push_event(double time, std::int32_t queue, std::uint64_t epoch) {
    events_.push(ClusterEvent{time, seq_++, queue, epoch});
  }

  int sample_queue_onebit(bool labeled_long) {
    sampled_idx_.clear();
    views_.clear();
    for (int k = 0; k < config_.d; ++k) {
      const int idx = static_cast<int>(rng_.bounded(config_.n));
      sampled_idx_.push_back(idx);
      const Node &node = nodes_[idx];
      views_.push_back(QueueView{node.total_jobs() == 0,
                                 static_cast<int>(node.short_list.size()),
                                 static_cast<int>(node.long_list.size())});
    }
    return sampled_idx_[choose_queue(views_, !labeled_long, rng_)];
  }

  int sample_queue_baseline() {
    switch (policy_) {
      case ClusterPolicy::OneChoiceFifo:
        return static_cast<int>(rng_.bounded(config_.n));
      case ClusterPolicy::ShorterOfTwoFifo: {
        int best = -1, best_len = 0, ties = 0;
        for (int k = 0; k < 2; ++k) {
          const int idx = static_cast<int>(rng_.bounded(config_.n));
          const int len = nodes_[idx].total_jobs();
          if (best < 0 || len < best_len) {
            best = idx; best_len = len; ties = 1;
          } else if (len == best_len) {
            ++ties;
            if (rng_.bounded(static_cast<std::uint64_t>(ties)) == 0) best = idx;
          }
        }
        return best;
      }
      case ClusterPolicy::LeastLoadedSrpt: {
        int best = -1; double best_work = 0.0; int ties = 0;
        for (int k = 0; k < config_.d; ++k) {
          const int idx = static_cast<int>(rng_.bounded(config_.n));
          const double w = nodes_[idx].current_work(now_);
          if (best < 0 || w < best_work) {
            best = idx; best_work = w; ties = 1;
          } else if (w == best_work) {
            ++ties;
            if (rng_.bounded(static_cast<std::uint64_t>(ties)) == 0) best = idx;
          }
        }
        return best;
      }
      case ClusterPolicy::OneBit: break;
    }
    return 0;
  }

  void handle_arrival(bool is_long) {
    ClusterJob job;
    job.arrival = now_;
    job.actually_long = is_long;
    const double flip = is_long ? config_.q1 : config_.q2;
    job.labeled_long = is_long ? !rng_.bernoulli(flip) : rng_.bernoulli(flip);
    const double mean = is_long ? config_.mean1 : config_.mean2;
    job.size = mean * rng_.exponential(1.0);

    const int target = policy_ == ClusterPolicy::OneBit
                           ? sample_queue_onebit(job.labeled_long)
                           : sample_queue_baseline();
    Node &node = nodes_[target];
    node.current_work(now_);
    node.work += job.size;

    switch (policy_) {
      case ClusterPolicy::OneBit:
        if (!node.busy) {
          begin_service(node, target, job);
        } else if (job.labeled_long) {
          node.long_list.push_back(job);
        } else {
          node.short_list.push_back(job);
        }
        break;
      case ClusterPolicy::OneChoiceFifo:
      case ClusterPolicy::ShorterOfTwoFifo:
        if (!node.busy) begin_service(node, target, job);
        else node.fifo.push_back(job);
        break;
      case ClusterPolicy::LeastLoadedSrpt:
        if (!node.busy) {
          begin_service(node, target, job);
        } else {
          const double live_remaining = node.completion - now_;
          if (job.size < live_remaining) {
            ClusterJob paused = node.in_service;
            paused.size = live_remaining;  // remaining work carries forward
            node.srpt.push(paused);
            ++node.epoch;
            begin_service(node, target, job);
          } else {
            node.srpt.push(job);
          }
        }
        break;
    }
  }

  void begin_service(Node &node, int index, ClusterJob job) {
    if (job.first_start < 0.0) job.first_start = now_;
    node.busy = true;
    node.in_service = job;
    node.serve_begin = now_;
    node.completion = now_ + job.size;
    push_event(node.completion, index, node.epoch);
  }

  void handle_completion(Node &node) {
    if (now_ > config_.warmup) {
      const double sojourn = now_ - node.in_service.arrival;
      sojourn_sum_ += sojourn;
      sojourn_sq_ += sojourn * sojourn;
      wait_sum_ += node.in_service.first_start - node.in_service.arrival;
      ++counted_;
    }
    node.busy = false;
    node.current_work(now_);

    const int index = static_cast<int>(&node - nodes_.data());
    switch (policy_) {
      case ClusterPolicy::OneBit:
        if (!node.short_list.empty()) {
          begin_service(node, index, node.short_list.front());
          node.short_list.pop_front();
        } else if (!node.long_list.empty()) {
          begin_service(node, index, node.long_list.front());
          node.long_list.pop_front();
        }
        break;
      case ClusterPolicy::OneChoiceFifo:
      case ClusterPolicy::ShorterOfTwoFifo:
        if (!node.fifo.empty()) {
          begin_service(node, index, node.fifo.front());
          node.fifo.pop_front();
        }
        break;
      case ClusterPolicy::LeastLoadedSrpt:
        if (!node.srpt.empty()) {
          begin_service(node, index, node.srpt.top());
          node.srpt.pop();
        }
        break;
    }
  }

  ClusterConfig config_;
  ClusterPolicy policy_;
  Rng rng_;
  std::vector<Node> nodes_;
  std::priority_queue<ClusterEvent, std::vector<ClusterEvent>,
                      std::greater<ClusterEvent>>
      events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;

  std::vector<int> sampled_idx_;
  std::vector<QueueView> views_;

  double sojourn_sum_ = 0.0;
  double sojourn_sq_ = 0.0;
  double wait_sum_ = 0.0;
  long counted_ = 0;
};

}  // namespace detail

inline SimStats run_cluster(const ClusterConfig &config, ClusterPolicy policy) {
  detail::ClusterRun engine(config, policy);
  return engine.run();
}

inline SimStats replicate_cluster(const ClusterConfig &config,
                                  ClusterPolicy policy, int reps) {
  if (reps < 2) throw std::domain_error("replicate_cluster: need reps >= 2");
  std::vector<SimStats> runs(reps);
  detail::parallel_for(reps, [&](int i) {
    ClusterConfig c = config;
    c.seed = Rng::derive_seed(config.seed, static_cast<std::uint64_t>(i));
    runs[i] = run_cluster(c, policy);
  });
  return aggregate(runs);
}

}  // namespace onebit
