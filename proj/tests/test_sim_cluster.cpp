#include <doctest.h>

#include <cmath>

#include "onebit/sim_cluster.hpp"

using namespace onebit;

TEST_CASE("derived rates") {
  ClusterConfig c;  // default benchmark parameters, q1 = q2 = 0
  DerivedRates r = derived_rates(c);
  CHECK(r.p_long == 1.0);
  CHECK(r.p_short == 1.0);
  CHECK(r.lambda_long == doctest::Approx(0.225));
  CHECK(r.lambda_short == doctest::Approx(0.90));

  c.q1 = 0.2;
  c.q2 = 0.2;
  r = derived_rates(c);
  CHECK(r.lambda_long == doctest::Approx(0.225 * 0.8 + 0.90 * 0.2));  // 0.36
  CHECK(r.lambda_long + r.lambda_short == doctest::Approx(1.125));
  CHECK(r.p_long == doctest::Approx(0.18 / 0.36));

  c.q1 = 1.0;
  c.q2 = 0.0;
  r = derived_rates(c);
  CHECK(r.lambda_long == 0.0);
  CHECK(r.lambda_short == doctest::Approx(1.125));
  CHECK(r.p_long == 1.0);  // convention for a label that never occurs
}

TEST_CASE("config validation") {
  ClusterConfig c;
  c.q1 = 1.5;
  CHECK_THROWS_AS(c.validate(), std::domain_error);
  c.q1 = 0.0;
  c.lambda2 = 4.0;  // load 0.225*3.2 + 4*0.2 = 1.52
  CHECK_THROWS_AS(c.validate(), InstabilityError);
  c.lambda2 = 0.9;
  c.mean2 = 5.0;  // mean1 > mean2 violated
  CHECK_THROWS_AS(c.validate(), std::domain_error);
}

TEST_CASE("choose_queue rules") {
  Rng rng(17);
  // an empty queue always wins
  CHECK(choose_queue({{false, 3, 0}, {true, 0, 0}}, true, rng) == 1);
  CHECK(choose_queue({{true, 0, 0}, {false, 0, 0}}, false, rng) == 0);
  // labeled-short arrival: lexicographic on (short, long)
  CHECK(choose_queue({{false, 1, 5}, {false, 2, 0}}, true, rng) == 0);
  CHECK(choose_queue({{false, 2, 5}, {false, 2, 0}}, true, rng) == 1);
  // labeled-long arrival: lexicographic on (long, short)
  CHECK(choose_queue({{false, 1, 5}, {false, 2, 0}}, false, rng) == 1);
  CHECK(choose_queue({{false, 9, 2}, {false, 0, 2}}, false, rng) == 1);
  CHECK_THROWS_AS(choose_queue({}, true, rng), std::domain_error);
}

TEST_CASE("tie-break is uniform") {
  Rng rng(29);
  const std::vector<QueueView> tied{{false, 1, 1}, {false, 1, 1}};
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (choose_queue(tied, true, rng) == 0) ++first;
  CHECK(static_cast<double>(first) / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("determinism and replication aggregation") {
  ClusterConfig c;
  c.n = 20;
  c.horizon = 2e3;
  c.warmup = 2e2;
  c.seed = 404;
  const SimStats a = run_cluster(c, ClusterPolicy::OneBit);
  const SimStats b = run_cluster(c, ClusterPolicy::OneBit);
  CHECK(a.mean_sojourn == b.mean_sojourn);
  CHECK(a.completed_count == b.completed_count);

  const SimStats agg = replicate_cluster(c, ClusterPolicy::OneBit, 4);
  CHECK(agg.is_aggregate);
  CHECK(agg.completed_count > 0);
  CHECK(agg.rep_min <= agg.mean_sojourn);
  CHECK(agg.mean_sojourn <= agg.rep_max);
}

TEST_CASE("independent seeds stay within joint confidence bounds") {
  ClusterConfig c;
  c.n = 100;
  c.horizon = 5e3;
  c.warmup = 5e2;
  c.seed = 11;
  const SimStats a = replicate_cluster(c, ClusterPolicy::OneBit, 6);
  c.seed = 12;
  const SimStats b = replicate_cluster(c, ClusterPolicy::OneBit, 6);
  CHECK(std::abs(a.mean_sojourn - b.mean_sojourn) <
        3.0 * (a.ci95_halfwidth + b.ci95_halfwidth));
}

TEST_CASE("single random choice reduces to the M/G/1 fifo closed form") {
  // with one choice each queue is an independent M/G/1 with a hyperexponential
  // service mix: S = V/(1-rho) + E[X]; V = 2.34, rho = 0.9 -> S = 24.2
  ClusterConfig c;
  c.n = 50;
  c.horizon = 3e4;
  c.warmup = 3e3;
  c.seed = 2025;
  const SimStats st = replicate_cluster(c, ClusterPolicy::OneChoiceFifo, 8);
  CHECK(st.mean_sojourn == doctest::Approx(24.2).epsilon(0.06));
  CHECK(st.mean_wait == doctest::Approx(23.4).epsilon(0.07));
}

TEST_CASE("label noise degrades the one-bit policy") {
  ClusterConfig c;
  c.n = 100;
  c.horizon = 1e4;
  c.warmup = 1e3;
  c.seed = 7;
  const SimStats clean = replicate_cluster(c, ClusterPolicy::OneBit, 6);
  c.q1 = 0.5;
  c.q2 = 0.5;
  const SimStats noisy = replicate_cluster(c, ClusterPolicy::OneBit, 6);
  CHECK(clean.mean_sojourn + clean.ci95_halfwidth <
        noisy.mean_sojourn - noisy.ci95_halfwidth);
}

TEST_CASE("least-loaded srpt beats the fifo baselines") {
  ClusterConfig c;
  c.n = 100;
  c.horizon = 1e4;
  c.warmup = 1e3;
  c.seed = 3;
  const SimStats srpt = replicate_cluster(c, ClusterPolicy::LeastLoadedSrpt, 6);
  const SimStats shorter = replicate_cluster(c, ClusterPolicy::ShorterOfTwoFifo, 6);
  CHECK(srpt.mean_sojourn + srpt.ci95_halfwidth <
        shorter.mean_sojourn - shorter.ci95_halfwidth);
}

TEST_CASE("shorter-of-two reference cell at desk scale") {
  ClusterConfig c;
  c.n = 200;
  c.horizon = 2e4;
  c.warmup = 2e3;
  c.seed = 1611;
  const SimStats st = replicate_cluster(c, ClusterPolicy::ShorterOfTwoFifo, 10);
  CHECK(st.mean_sojourn == doctest::Approx(4.967).epsilon(0.03));
}
