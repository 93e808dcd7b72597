// onebit: analytic calculators, simulators, and mean-field solver for
// M/G/1 scheduling with one-bit advice, plus reproduction of the
// reference benchmark tables.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "onebit/analytic.hpp"
#include "onebit/dist.hpp"
#include "onebit/meanfield.hpp"
#include "onebit/sim_cluster.hpp"
#include "onebit/sim_single.hpp"

namespace {

using namespace onebit;

constexpr std::uint64_t kDefaultSeed = 20260807ULL;

struct ResultRow {
  std::string scenario;
  double lambda = 0.0;
  double threshold = 0.0;
  std::string policy;
  std::string source;  // analytic | simulation | ode
  double mean_sojourn = 0.0;
  double ci95 = 0.0;
  std::string extra;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_rows(const std::vector<ResultRow> &rows, const std::string &path,
                const std::string &format) {
  std::ostream *out = &std::cout;
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    out = &file;
  }
  if (format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto &r : rows) {
      j.push_back({{"scenario", r.scenario},
                   {"lambda", r.lambda},
                   {"T", r.threshold},
                   {"policy", r.policy},
                   {"source", r.source},
                   {"mean_sojourn", r.mean_sojourn},
                   {"ci95", r.ci95},
                   {"extra", r.extra}});
    }
    *out << j.dump(2) << "\n";
  } else {
    *out << "scenario,lambda,T,policy,source,mean_sojourn,ci95,extra\n";
    for (const auto &r : rows) {
      *out << r.scenario << ',' << num(r.lambda) << ',' << num(r.threshold)
           << ',' << r.policy << ',' << r.source << ',' << num(r.mean_sojourn)
           << ',' << num(r.ci95) << ',' << r.extra << '\n';
    }
  }
}

struct Protocol {
  double horizon, warmup;
  int reps;
  int n;
  double cluster_horizon, cluster_warmup;
  int cluster_reps;
};

Protocol protocol_for(const std::string &scale) {
  if (scale == "paper") return {1e6, 1e5, 100, 1000, 1e5, 1e4, 100};
  return {2e5, 2e4, 20, 200, 2e4, 2e3, 10};
}

ServiceDistribution dist_by_name(const std::string &name) {
  if (name == "exp" || name == "exponential") return ServiceDistribution::exponential();
  if (name == "weibull") return ServiceDistribution::weibull();
  throw CLI::ValidationError("--dist", "unknown distribution: " + name);
}

PredictionModel model_by_name(const std::string &name) {
  if (name == "perfect") return PredictionModel::perfect();
  if (name == "exp" || name == "exponential") return PredictionModel::exponential();
  throw CLI::ValidationError("--model", "unknown prediction model: " + name);
}

// ---- published reference values -------------------------------------------

constexpr double kTableLambdas[7] = {0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.98};

struct RefTable {
  const char *columns[7];
  double cells[7][7];  // [lambda][column]
};

const RefTable kRefTable1 = {
    {"FIFO", "THRESHOLD NO PREEMPT", "THRESHOLD PREEMPT", "SRPT",
     "PREDICTION NO PREEMPT", "PREDICTION PREEMPT", "SPRPT"},
    {{2.000, 1.783, 1.564, 1.425, 1.850, 1.698, 1.659},
     {2.500, 2.089, 1.814, 1.604, 2.209, 2.013, 1.940},
     {3.333, 2.542, 2.203, 1.875, 2.761, 2.517, 2.369},
     {5.000, 3.329, 2.910, 2.355, 3.757, 3.451, 3.143},
     {10.00, 5.278, 4.755, 3.552, 6.366, 5.960, 5.097},
     {20.00, 8.535, 7.914, 5.532, 10.848, 10.372, 8.424},
     {50.00, 16.495, 15.735, 10.436, 22.418, 21.909, 16.696}}};

const RefTable kRefTable2 = {
    {"FIFO", "THRESHOLD NO PREEMPT", "THRESHOLD PREEMPT", "SRPT",
     "PREDICTION NO PREEMPT", "PREDICTION PREEMPT", "SPRPT"},
    {{4.000, 3.012, 1.608, 1.411, 3.155, 1.736, 1.940},
     {5.500, 3.676, 1.867, 1.574, 3.918, 2.062, 2.280},
     {8.000, 4.565, 2.258, 1.813, 4.983, 2.568, 2.750},
     {13.00, 5.955, 2.951, 2.217, 6.721, 3.481, 3.519},
     {29.00, 8.940, 4.649, 3.154, 10.630, 5.790, 5.224},
     {58.00, 13.223, 7.448, 4.517, 16.546, 9.846, 7.788},
     {148.0, 22.451, 15.194, 7.666, 29.346, 20.918, 13.404}}};

struct Table3Row {
  const char *label;
  double q1, q2;
  double sim_ref;
  double ode_ref;  // < 0 when not available
};

const Table3Row kRefTable3[] = {
    {"1 Choice", -1, -1, 24.208, -1},
    {"SRPT", -1, -1, 2.366, -1},
    {"Shorter Queue, FIFO", -1, -1, 4.967, -1},
    {"Pred 0.0, 0.0", 0.0, 0.0, 3.394, 3.392},
    {"Pred 0.1, 0.1", 0.1, 0.1, 3.690, 3.688},
    {"Pred 0.2, 0.2", 0.2, 0.2, 4.010, 4.007},
    {"Pred 0.3, 0.3", 0.3, 0.3, 4.353, 4.347},
    {"Pred 0.4, 0.4", 0.4, 0.4, 4.717, 4.711},
    {"Pred 0.5, 0.5", 0.5, 0.5, 5.105, 5.098},
    {"Pred 0.2, 0.4", 0.2, 0.4, 4.280, 4.276},
    {"Pred 0.4, 0.2", 0.4, 0.2, 4.402, 4.395},
    {"Pred 0.11, 0.61", 0.11, 0.61, 4.617, 4.611},
};

// ---- shared option blocks ---------------------------------------------------

struct CommonOpts {
  std::uint64_t seed = kDefaultSeed;
  std::string output;
  std::string format = "csv";
  std::string scale = "desk";
};

void add_common(CLI::App *cmd, CommonOpts &opts) {
  cmd->add_option("--seed", opts.seed, "Base RNG seed")
      ->envname("ONEBIT_SEED")
      ->capture_default_str();
  cmd->add_option("-o,--output", opts.output, "Write rows to this file");
  cmd->add_option("--format", opts.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--scale", opts.scale, "Experiment protocol size")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
}

SchedulingPolicy make_policy(AdviceKind advice, double threshold, bool preempt,
                             const PredictionModel &model) {
  return advice == AdviceKind::Exact
             ? SchedulingPolicy::threshold_exact(threshold, preempt)
             : SchedulingPolicy::threshold_predicted(threshold, preempt, model);
}

// ---- sweep ------------------------------------------------------------------

struct SweepOpts {
  CommonOpts common;
  std::string dist = "exp";
  std::string advice = "exact";
  std::string model = "exp";
  std::vector<double> lambdas{0.8, 0.9, 0.95};
  double t_min = 0.0, t_max = 5.0;
  int t_steps = 51;
  std::string preempt = "both";
  std::string source = "analytic";
  int reps = 0;  // 0: from scale
};

int cmd_sweep(const SweepOpts &o) {
  if (o.t_steps <= 0) throw CLI::ValidationError("--t-steps", "empty threshold grid");
  if (o.t_max < o.t_min) throw CLI::ValidationError("--t-max", "grid ends before it starts");
  const Protocol proto = protocol_for(o.common.scale);
  const int reps = o.reps > 0 ? o.reps : proto.reps;
  const ServiceDistribution dist = dist_by_name(o.dist);
  const PredictionModel model = model_by_name(o.model);
  const AdviceKind advice = o.advice == "exact" ? AdviceKind::Exact : AdviceKind::Predicted;
  std::vector<bool> variants;
  if (o.preempt == "both") variants = {false, true};
  else if (o.preempt == "on") variants = {true};
  else variants = {false};

  std::vector<ResultRow> rows;
  for (double lambda : o.lambdas) {
    for (bool preempt : variants) {
      PolicyConfig pc;
      pc.dist = dist;
      pc.lambda = lambda;
      pc.preemptive = preempt;
      pc.advice = advice;
      pc.model = model;
      for (int i = 0; i < o.t_steps; ++i) {
        const double t =
            o.t_steps == 1
                ? o.t_min
                : o.t_min + (o.t_max - o.t_min) * i / (o.t_steps - 1);
        pc.threshold = t;
        const std::string policy_name =
            std::string(o.advice == "exact" ? "threshold" : "prediction") +
            (preempt ? "-preempt" : "");
        if (o.source == "analytic" || o.source == "both") {
          const SojournBreakdown b = threshold_sojourn(pc);
          rows.push_back({"sweep", lambda, t, policy_name, "analytic", b.s_total,
                          0.0,
                          "w_total=" + num(b.w_total) +
                              ";frac_below=" + num(b.class_fraction_below)});
        }
        if (o.source == "sim" || o.source == "both") {
          SimConfig sc;
          sc.lambda = lambda;
          sc.horizon = proto.horizon;
          sc.warmup = proto.warmup;
          sc.seed = o.common.seed;
          sc.dist = dist;
          const SimStats st =
              replicate(sc, make_policy(advice, t, preempt, model), reps);
          rows.push_back({"sweep", lambda, t, policy_name, "simulation",
                          st.mean_sojourn, st.ci95_halfwidth,
                          "reps=" + std::to_string(reps)});
        }
      }
    }
  }
  write_rows(rows, o.common.output, o.common.format);
  return 0;
}

// ---- single-queue tables ----------------------------------------------------

struct TableOpts {
  CommonOpts common;
};

int cmd_table12(int which, const TableOpts &o) {
  const Protocol proto = protocol_for(o.common.scale);
  const ServiceDistribution dist = which == 1 ? ServiceDistribution::exponential()
                                              : ServiceDistribution::weibull();
  const RefTable &ref = which == 1 ? kRefTable1 : kRefTable2;
  const PredictionModel model = PredictionModel::exponential();

  std::vector<ResultRow> rows;
  double computed[7][7];
  for (int i = 0; i < 7; ++i) {
    const double lambda = kTableLambdas[i];
    computed[i][0] = fifo_sojourn(dist, lambda);
    for (int v = 0; v < 4; ++v) {
      const bool preempt = v % 2 == 1;
      const AdviceKind advice = v < 2 ? AdviceKind::Exact : AdviceKind::Predicted;
      PolicyConfig pc;
      pc.dist = dist;
      pc.lambda = lambda;
      pc.preemptive = preempt;
      pc.advice = advice;
      pc.model = model;
      const OptimalThreshold best = optimal_threshold(pc);
      const int col = v < 2 ? 1 + v : 4 + (v - 2);
      computed[i][col] = best.sojourn;
      rows.push_back({"table" + std::to_string(which), lambda, best.threshold,
                      ref.columns[col], "analytic", best.sojourn, 0.0,
                      "ref=" + num(ref.cells[i][col])});
    }
    SimConfig sc;
    sc.lambda = lambda;
    sc.horizon = proto.horizon;
    sc.warmup = proto.warmup;
    sc.seed = o.common.seed;
    sc.dist = dist;
    const SimStats srpt = replicate(sc, SchedulingPolicy::srpt(), proto.reps);
    const SimStats sprpt = replicate(sc, SchedulingPolicy::sprpt(model), proto.reps);
    computed[i][3] = srpt.mean_sojourn;
    computed[i][6] = sprpt.mean_sojourn;
    rows.push_back({"table" + std::to_string(which), lambda, 0.0, "SRPT",
                    "simulation", srpt.mean_sojourn, srpt.ci95_halfwidth,
                    "ref=" + num(ref.cells[i][3])});
    rows.push_back({"table" + std::to_string(which), lambda, 0.0, "SPRPT",
                    "simulation", sprpt.mean_sojourn, sprpt.ci95_halfwidth,
                    "ref=" + num(ref.cells[i][6])});
    rows.push_back({"table" + std::to_string(which), lambda, 0.0, "FIFO",
                    "analytic", computed[i][0], 0.0,
                    "ref=" + num(ref.cells[i][0])});
  }

  std::printf("table%d (%s service times), %s scale\n", which,
              dist.name().c_str(), o.common.scale.c_str());
  std::printf("%-8s", "lambda");
  for (int c = 0; c < 7; ++c) std::printf(" | %-21s", ref.columns[c]);
  std::printf("\n");
  for (int i = 0; i < 7; ++i) {
    std::printf("%-8.2f", kTableLambdas[i]);
    for (int c = 0; c < 7; ++c) {
      const double dev = 100.0 * (computed[i][c] - ref.cells[i][c]) / ref.cells[i][c];
      std::printf(" | %8.3f ref %7.3f %+5.1f%%", computed[i][c], ref.cells[i][c], dev);
    }
    std::printf("\n");
  }
  if (which == 2)
    std::printf("note: the reference FIFO cell at lambda=0.90 prints 29.00; the closed "
                "form 1+3*lambda/(1-lambda) gives 28.00.\n");

  if (!o.common.output.empty()) write_rows(rows, o.common.output, o.common.format);
  return 0;
}

// ---- table 3 ----------------------------------------------------------------

struct Table3Opts {
  CommonOpts common;
  bool skip_ode = false;
};

int cmd_table3(const Table3Opts &o) {
  const Protocol proto = protocol_for(o.common.scale);
  std::vector<ResultRow> rows;
  std::printf("table3 (n=%d queues, d=2), %s scale\n", proto.n, o.common.scale.c_str());
  std::printf("%-22s | %-28s | %-24s\n", "row", "simulation", "ode");
  for (const Table3Row &row : kRefTable3) {
    ClusterConfig cc;
    cc.n = proto.n;
    cc.horizon = proto.cluster_horizon;
    cc.warmup = proto.cluster_warmup;
    cc.seed = o.common.seed;
    ClusterPolicy policy = ClusterPolicy::OneBit;
    if (std::string(row.label) == "1 Choice") policy = ClusterPolicy::OneChoiceFifo;
    else if (std::string(row.label) == "SRPT") policy = ClusterPolicy::LeastLoadedSrpt;
    else if (std::string(row.label) == "Shorter Queue, FIFO")
      policy = ClusterPolicy::ShorterOfTwoFifo;
    if (row.q1 >= 0) { cc.q1 = row.q1; cc.q2 = row.q2; }

    const SimStats st = replicate_cluster(cc, policy, proto.cluster_reps);
    std::string sim_cell =
        num(st.mean_sojourn) + " ref " + num(row.sim_ref) + " (" +
        num(100.0 * (st.mean_sojourn - row.sim_ref) / row.sim_ref) + "%)";
    rows.push_back({"table3", cc.lambda1 + cc.lambda2, 0.0, row.label,
                    "simulation", st.mean_sojourn, st.ci95_halfwidth,
                    "ref=" + num(row.sim_ref)});

    std::string ode_cell = "-";
    if (row.ode_ref > 0 && !o.skip_ode) {
      const MfParams params = mf_params(cc);
      const MfSolution sol = integrate_to_fixed_point(params);
      const double s = mean_sojourn(sol.state, params);
      ode_cell = num(s) + " ref " + num(row.ode_ref) + " (" +
                 num(100.0 * (s - row.ode_ref) / row.ode_ref) + "%)";
      rows.push_back({"table3", cc.lambda1 + cc.lambda2, 0.0, row.label, "ode",
                      s, 0.0, "ref=" + num(row.ode_ref)});
    }
    std::printf("%-22s | %-28s | %-24s\n", row.label, sim_cell.c_str(),
                ode_cell.c_str());
  }
  std::printf("note: the reference rows 'Pred 0.2, 0.4' and 'Pred 0.4, 0.2' appear "
              "transposed, and the reference SRPT row matches a non-preemptive "
              "SJF variant; see docs/reference-tables.md.\n");
  if (!o.common.output.empty()) write_rows(rows, o.common.output, o.common.format);
  return 0;
}

// ---- opt-threshold ----------------------------------------------------------

struct OptOpts {
  CommonOpts common;
  std::string dist = "exp";
  std::string advice = "exact";
  std::string model = "exp";
  std::string preempt = "off";
  std::vector<double> lambdas{0.5, 0.8, 0.9, 0.95};
};

int cmd_opt_threshold(const OptOpts &o) {
  const ServiceDistribution dist = dist_by_name(o.dist);
  const PredictionModel model = model_by_name(o.model);
  const bool preempt = o.preempt == "on";
  const AdviceKind advice = o.advice == "exact" ? AdviceKind::Exact : AdviceKind::Predicted;
  std::vector<ResultRow> rows;
  for (double lambda : o.lambdas) {
    PolicyConfig pc;
    pc.dist = dist;
    pc.lambda = lambda;
    pc.preemptive = preempt;
    pc.advice = advice;
    pc.model = model;
    const OptimalThreshold best = optimal_threshold(pc);
    std::string extra;
    if (dist.kind() == DistKind::Exponential && advice == AdviceKind::Exact) {
      const double root = exp_optimal_threshold_root(lambda);
      extra = "root_T=" + num(root) + ";gap=" + num(std::abs(root - best.threshold));
    }
    if (best.grid_mismatch) extra += (extra.empty() ? "" : ";") + std::string("grid_mismatch=1");
    rows.push_back({"opt-threshold", lambda, best.threshold,
                    std::string(o.advice) + (preempt ? "-preempt" : ""),
                    "analytic", best.sojourn, 0.0, extra});
  }
  write_rows(rows, o.common.output, o.common.format);
  return 0;
}

// ---- meanfield --------------------------------------------------------------

struct MeanfieldOpts {
  CommonOpts common;
  ClusterConfig cluster;
  double dt = 1e-3;
  double stop_tol = 1e-9;
  double time_horizon = 1e4;
  int s_max = 40, l_max = 40;
  bool paper_exact = false;  // dt = 1e-5 over t = 1e4, no early stop
  std::string export_state;
};

int cmd_meanfield(const MeanfieldOpts &o) {
  const MfParams params = mf_params(o.cluster, o.s_max, o.l_max);
  MfIntegrationOptions opt;
  opt.dt = o.paper_exact ? 1e-5 : o.dt;
  opt.horizon = o.time_horizon;
  opt.stop_tol = o.paper_exact ? 0.0 : o.stop_tol;
  const MfSolution sol = integrate_to_fixed_point(params, opt);
  const double s = mean_sojourn(sol.state, params);
  std::printf("mean_sojourn %.6f\n", s);
  std::printf("steps %ld  model_time %.3f  residual %.3e  truncation %.3e  "
              "clamped %.3e  renorms %d\n",
              sol.diagnostics.steps, sol.diagnostics.elapsed_time,
              sol.diagnostics.final_residual, sol.diagnostics.truncation_integral,
              sol.diagnostics.clamped_mass, sol.diagnostics.renormalizations);
  if (!o.export_state.empty()) {
    std::ofstream f(o.export_state);
    if (!f) throw std::runtime_error("cannot open " + o.export_state);
    f << "s,l,c,x\n";
    f << "0,0,0," << num(sol.state.empty) << "\n";
    for (int s_i = 0; s_i <= sol.state.s_max; ++s_i)
      for (int l_i = 0; l_i <= sol.state.l_max; ++l_i)
        for (int c = 0; c < 2; ++c)
          f << s_i << ',' << l_i << ',' << (c + 1) << ','
            << num(sol.state.at(s_i, l_i, c)) << "\n";
  }
  std::vector<ResultRow> rows{{"meanfield", o.cluster.lambda1 + o.cluster.lambda2,
                               0.0,
                               "one-bit(q1=" + num(o.cluster.q1) +
                                   ",q2=" + num(o.cluster.q2) + ")",
                               "ode", s, 0.0,
                               "residual=" + num(sol.diagnostics.final_residual)}};
  if (!o.common.output.empty()) write_rows(rows, o.common.output, o.common.format);
  return 0;
}

// ---- sim-cluster ------------------------------------------------------------

struct SimClusterOpts {
  CommonOpts common;
  ClusterConfig cluster;
  std::string policy = "onebit";
  int reps = 10;
};

int cmd_sim_cluster(const SimClusterOpts &o) {
  ClusterPolicy policy = ClusterPolicy::OneBit;
  if (o.policy == "one-choice-fifo") policy = ClusterPolicy::OneChoiceFifo;
  else if (o.policy == "shorter-of-two") policy = ClusterPolicy::ShorterOfTwoFifo;
  else if (o.policy == "least-loaded-srpt") policy = ClusterPolicy::LeastLoadedSrpt;
  else if (o.policy != "onebit")
    throw CLI::ValidationError("--policy", "unknown policy: " + o.policy);
  ClusterConfig cc = o.cluster;
  cc.seed = o.common.seed;
  const SimStats st = replicate_cluster(cc, policy, o.reps);
  std::printf("mean_sojourn %.6f  ci95 %.6f  mean_wait %.6f  completed %ld  "
              "rep_range [%.6f, %.6f]\n",
              st.mean_sojourn, st.ci95_halfwidth, st.mean_wait,
              st.completed_count, st.rep_min, st.rep_max);
  std::vector<ResultRow> rows{{"sim-cluster", cc.lambda1 + cc.lambda2, 0.0,
                               cluster_policy_name(policy), "simulation",
                               st.mean_sojourn, st.ci95_halfwidth,
                               "reps=" + std::to_string(o.reps)}};
  if (!o.common.output.empty()) write_rows(rows, o.common.output, o.common.format);
  return 0;
}

void add_cluster_params(CLI::App *cmd, ClusterConfig &cc) {
  cmd->add_option("--n", cc.n, "Number of queues")->capture_default_str();
  cmd->add_option("--d", cc.d, "Choices per arrival")->capture_default_str();
  cmd->add_option("--lambda1", cc.lambda1, "Long-job arrival rate per queue")
      ->capture_default_str();
  cmd->add_option("--lambda2", cc.lambda2, "Short-job arrival rate per queue")
      ->capture_default_str();
  cmd->add_option("--mean1", cc.mean1, "Mean service of long jobs")->capture_default_str();
  cmd->add_option("--mean2", cc.mean2, "Mean service of short jobs")->capture_default_str();
  cmd->add_option("--q1", cc.q1, "P(long job labeled short)")->capture_default_str();
  cmd->add_option("--q2", cc.q2, "P(short job labeled long)")->capture_default_str();
  cmd->add_option("--horizon", cc.horizon, "Simulated time")->capture_default_str();
  cmd->add_option("--warmup", cc.warmup, "Warm-up time excluded from stats")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"one-bit advice queueing: analytic formulas, simulation, mean-field"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI-style config file; flags override it");

  SweepOpts sweep;
  auto *sweep_cmd = app.add_subcommand("sweep", "Mean sojourn versus threshold curves");
  sweep_cmd->fallthrough();
  add_common(sweep_cmd, sweep.common);
  sweep_cmd->add_option("--dist", sweep.dist)->check(CLI::IsMember({"exp", "weibull"}))->capture_default_str();
  sweep_cmd->add_option("--advice", sweep.advice)->check(CLI::IsMember({"exact", "predicted"}))->capture_default_str();
  sweep_cmd->add_option("--model", sweep.model)->check(CLI::IsMember({"perfect", "exp"}))->capture_default_str();
  sweep_cmd->add_option("--lambda", sweep.lambdas, "Arrival rates")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--t-min", sweep.t_min)->capture_default_str();
  sweep_cmd->add_option("--t-max", sweep.t_max)->capture_default_str();
  sweep_cmd->add_option("--t-steps", sweep.t_steps, "Grid points (0 is an error)")->capture_default_str();
  sweep_cmd->add_option("--preempt", sweep.preempt)->check(CLI::IsMember({"both", "on", "off"}))->capture_default_str();
  sweep_cmd->add_option("--source", sweep.source)->check(CLI::IsMember({"analytic", "sim", "both"}))->capture_default_str();
  sweep_cmd->add_option("--reps", sweep.reps, "Replications for sim source");

  TableOpts t1, t2;
  auto *t1_cmd = app.add_subcommand("table1", "Exponential service reference table");
  t1_cmd->fallthrough();
  add_common(t1_cmd, t1.common);
  auto *t2_cmd = app.add_subcommand("table2", "Weibull service reference table");
  t2_cmd->fallthrough();
  add_common(t2_cmd, t2.common);

  Table3Opts t3;
  auto *t3_cmd = app.add_subcommand("table3", "Multi-queue reference table");
  t3_cmd->fallthrough();
  add_common(t3_cmd, t3.common);
  t3_cmd->add_flag("--skip-ode", t3.skip_ode, "Only simulate; skip the ODE column");

  OptOpts opt;
  auto *opt_cmd = app.add_subcommand("opt-threshold", "Optimal thresholds per lambda");
  opt_cmd->fallthrough();
  add_common(opt_cmd, opt.common);
  opt_cmd->add_option("--dist", opt.dist)->check(CLI::IsMember({"exp", "weibull"}))->capture_default_str();
  opt_cmd->add_option("--advice", opt.advice)->check(CLI::IsMember({"exact", "predicted"}))->capture_default_str();
  opt_cmd->add_option("--model", opt.model)->check(CLI::IsMember({"perfect", "exp"}))->capture_default_str();
  opt_cmd->add_option("--preempt", opt.preempt)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  opt_cmd->add_option("--lambda", opt.lambdas, "Arrival rates")->delimiter(',')->capture_default_str();

  MeanfieldOpts mf;
  auto *mf_cmd = app.add_subcommand("meanfield", "Integrate the mean-field system to its fixed point");
  mf_cmd->fallthrough();
  add_common(mf_cmd, mf.common);
  add_cluster_params(mf_cmd, mf.cluster);
  mf_cmd->add_option("--dt", mf.dt, "Euler step")->capture_default_str();
  mf_cmd->add_option("--stop-tol", mf.stop_tol, "Derivative max-norm stop")->capture_default_str();
  mf_cmd->add_option("--time", mf.time_horizon, "Model-time cap")->capture_default_str();
  mf_cmd->add_option("--smax", mf.s_max, "Truncation for queued short jobs")->capture_default_str();
  mf_cmd->add_option("--lmax", mf.l_max, "Truncation for queued long jobs")->capture_default_str();
  mf_cmd->add_flag("--paper-exact", mf.paper_exact, "dt=1e-5 over the full horizon, no early stop");
  mf_cmd->add_option("--export-state", mf.export_state, "Write the fixed point as CSV (s,l,c,x)");

  SimClusterOpts sim_cluster;
  auto *cl_cmd = app.add_subcommand("sim-cluster", "Simulate the n-queue system");
  cl_cmd->fallthrough();
  add_common(cl_cmd, sim_cluster.common);
  add_cluster_params(cl_cmd, sim_cluster.cluster);
  cl_cmd->add_option("--policy", sim_cluster.policy)
      ->check(CLI::IsMember({"onebit", "one-choice-fifo", "shorter-of-two", "least-loaded-srpt"}))
      ->capture_default_str();
  cl_cmd->add_option("--reps", sim_cluster.reps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (t1_cmd->parsed()) return cmd_table12(1, t1);
    if (t2_cmd->parsed()) return cmd_table12(2, t2);
    if (t3_cmd->parsed()) return cmd_table3(t3);
    if (opt_cmd->parsed()) return cmd_opt_threshold(opt);
    if (mf_cmd->parsed()) return cmd_meanfield(mf);
    if (cl_cmd->parsed()) return cmd_sim_cluster(sim_cluster);
  } catch (const CLI::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError &e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const SearchError &e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
