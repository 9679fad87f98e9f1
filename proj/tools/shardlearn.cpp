// Command-line driver: training runs, multinode simulations, learning-rate
// grid search, and closed-form oracle checks on a dataset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "shardlearn/errors.hpp"
#include "shardlearn/instance.hpp"
#include "shardlearn/learner.hpp"
#include "shardlearn/model_io.hpp"
#include "shardlearn/oracle.hpp"
#include "shardlearn/parallel.hpp"
#include "shardlearn/simulator.hpp"
#include "shardlearn/stream.hpp"
#include "shardlearn/textio.hpp"
#include "shardlearn/topology.hpp"

namespace {

using namespace shardlearn;

struct RunConfig {
  std::string data = "-";  // "-" reads stdin (single pass only)
  unsigned bits = 18;
  uint32_t shards = 1;
  std::string topology = "flat";
  std::string shard_kind = "feature";
  std::string update = "sgd";
  uint64_t batch_size = 1;
  uint64_t tau = 1024;
  uint64_t buffer = 2048;
  unsigned passes = 1;
  double lambda = 1.0;
  double t0 = 0.0;
  std::vector<std::string> quadratic;
  int threshold = -1;  // -1 preset default, 0 off, 1 on
  int constant = -1;
  double backprop_scale = 1.0;
  uint64_t seed = 0;  // echoed for bookkeeping; no subcommand draws randomness
  std::string model_out;
  std::string metrics_out;
  std::string trace_out;
};

InteractionSpec quadratic_spec(const RunConfig& cfg) {
  InteractionSpec q;
  for (const auto& s : cfg.quadratic) {
    if (s.size() != 2)
      throw ConfigError("--quadratic wants two single-character namespace names, got '" + s + "'");
    q.pairs.emplace_back(std::string(1, s[0]), std::string(1, s[1]));
  }
  validate(q);
  return q;
}

Topology run_topology(const RunConfig& cfg) {
  TopologyPreset preset;
  if (cfg.topology == "flat")
    preset = TopologyPreset::Flat;
  else if (cfg.topology == "binary")
    preset = TopologyPreset::Binary;
  else
    throw ConfigError("unknown topology preset: " + cfg.topology);
  Topology topo = build_topology(preset, cfg.shards);
  // Flag values accumulate, so "on" is any positive tally.
  if (cfg.threshold >= 0)
    for (auto& nd : topo.nodes)
      if (nd.id != topo.root) nd.threshold_output = (cfg.threshold >= 1);
  if (cfg.constant >= 0)
    for (auto& nd : topo.nodes)
      if (!nd.is_leaf()) nd.has_constant_feature = (cfg.constant >= 1);
  return topo;
}

std::unique_ptr<ExampleStream> open_stream(const RunConfig& cfg, const InteractionSpec& q) {
  if (cfg.data == "-")
    return std::make_unique<IstreamExampleStream>(std::cin, q, cfg.bits);
  return std::make_unique<FileExampleStream>(cfg.data, q, cfg.bits);
}

VectorStream load_examples(const RunConfig& cfg, const InteractionSpec& q) {
  auto stream = open_stream(cfg, q);
  VectorStream out;
  SparseVector x;
  double y = 0.0;
  while (stream->next(x, y)) out.push(x, y);
  return out;
}

// Instance-shard baseline: independent learners fed round-robin, averaged
// at the end. Linear models average sensibly; nothing fancier is attempted.
SimResult run_instance_average(const RunConfig& cfg, ExampleStream& stream,
                               const ScheduleSpec& sched, const LossSpec& loss) {
  if (cfg.update != "sgd")
    throw ConfigError("instance sharding is an averaging baseline; use --update sgd");
  const uint32_t n = cfg.shards;
  ShardPlan plan = make_shard_plan(ShardKind::Instance, n);
  std::vector<WeightModel> models;
  models.reserve(n);
  for (uint32_t s = 0; s < n; ++s) models.emplace_back(cfg.bits);
  std::vector<uint64_t> steps(n, 0);
  SimResult res{Metrics{}, {}, WeightModel(cfg.bits), TreeState{}, false};
  SparseVector x;
  double y = 0.0;
  uint64_t t = 0;
  for (unsigned pass = 0; pass < cfg.passes; ++pass) {
    if (pass > 0) stream.reset();
    while (stream.next(x, y)) {
      uint32_t s = plan.shard_of_instance(t++);
      double yhat = sgd_step(models[s], x, y, ++steps[s], sched, loss);
      res.metrics.record(yhat, y);
    }
  }
  for (uint32_t i = 0; i < res.feature_weights.size(); ++i) {
    double sum = 0.0;
    for (uint32_t s = 0; s < n; ++s) sum += models[s][i];
    res.feature_weights[i] = sum / double(n);
  }
  return res;
}

SimResult run_once(const RunConfig& cfg, ExampleStream& stream, bool want_trace) {
  auto rule = parse_rule(cfg.update);
  if (!rule) throw ConfigError("unknown update rule: " + cfg.update);
  ScheduleSpec sched = power_schedule(cfg.lambda, cfg.t0);
  LossSpec loss;
  if (cfg.shard_kind == "instance") return run_instance_average(cfg, stream, sched, loss);
  if (cfg.shard_kind != "feature")
    throw ConfigError("unknown shard kind: " + cfg.shard_kind);
  Topology topo = run_topology(cfg);
  ShardPlan plan = make_shard_plan(ShardKind::Feature, cfg.shards);
  SimOptions opt;
  opt.rule = *rule;
  opt.target_tau = cfg.tau;
  opt.buffer_capacity = cfg.buffer;
  opt.backprop_scale = cfg.backprop_scale;
  opt.batch_size = cfg.batch_size;
  opt.passes = cfg.passes;
  opt.keep_trace = want_trace;
  return run_simulation(topo, plan, stream, sched, loss, cfg.bits, opt);
}

void write_outputs(const RunConfig& cfg, const SimResult& res) {
  if (!cfg.model_out.empty()) save_model_file(cfg.model_out, res.feature_weights);
  if (!cfg.metrics_out.empty()) {
    std::ofstream f(cfg.metrics_out, std::ios::binary);
    if (!f) throw ConfigError("cannot write metrics file: " + cfg.metrics_out);
    write_metrics_csv(f, res.metrics, cfg.update, cfg.shards, cfg.tau);
  }
  if (!cfg.trace_out.empty()) {
    std::ofstream f(cfg.trace_out, std::ios::binary);
    if (!f) throw ConfigError("cannot write trace file: " + cfg.trace_out);
    write_trace_csv(f, res.trace);
  }
}

void print_summary(const RunConfig& cfg, const SimResult& res) {
  std::cout << "instances " << res.metrics.n_seen << '\n'
            << "progressive_sq_loss " << format_double(res.metrics.progressive_sq_loss()) << '\n'
            << "accuracy " << format_double(res.metrics.accuracy()) << '\n'
            << "seed " << cfg.seed << '\n';
  if (res.metrics.flagged_fallbacks > 0)
    std::cout << "fallback_steps " << res.metrics.flagged_fallbacks << '\n';
}

int cmd_run(const RunConfig& cfg, bool simulate) {
  InteractionSpec q = quadratic_spec(cfg);
  auto stream = open_stream(cfg, q);
  SimResult res = run_once(cfg, *stream, simulate && !cfg.trace_out.empty());
  write_outputs(cfg, res);
  print_summary(cfg, res);
  return 0;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> v;
  for (int i = 0; i <= 9; ++i) v.push_back(double(1 << i));
  return v;
}

std::vector<double> default_t0_grid() {
  std::vector<double> v;
  double p = 1.0;
  for (int i = 0; i <= 6; ++i, p *= 10.0) v.push_back(p);
  return v;
}

int cmd_grid(const RunConfig& cfg, const std::vector<double>& lambdas,
             const std::vector<double>& t0s) {
  if (lambdas.empty() || t0s.empty()) throw ConfigError("grids must be non-empty");
  InteractionSpec q = quadratic_spec(cfg);
  VectorStream data = load_examples(cfg, q);

  struct Point {
    double lambda = 0.0, t0 = 0.0, loss = 0.0;
    bool ok = false;
  };
  const size_t total = lambdas.size() * t0s.size();
  std::vector<Point> pts(total);
  std::string hard_error;
  const int threads = thread_count();
  // Grid points are independent, deterministic runs; the table is filled by
  // slot, so the parallel sweep produces identical output.
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) if (threads > 1 && total > 1)
#endif
  for (int64_t k = 0; k < int64_t(total); ++k) {
    Point& p = pts[size_t(k)];
    p.lambda = lambdas[size_t(k) / t0s.size()];
    p.t0 = t0s[size_t(k) % t0s.size()];
    RunConfig c = cfg;
    c.lambda = p.lambda;
    c.t0 = p.t0;
    VectorStream copy = data;
    try {
      SimResult r = run_once(c, copy, false);
      p.loss = r.metrics.progressive_sq_loss();
      p.ok = std::isfinite(p.loss);
    } catch (const NumericOverflow&) {
      p.ok = false;
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (hard_error.empty()) hard_error = e.what();
    }
  }
  if (!hard_error.empty()) throw ConfigError(hard_error);

  const Point* best = nullptr;
  for (const auto& p : pts) {
    if (!p.ok) continue;
    if (!best || p.loss < best->loss ||
        (p.loss == best->loss &&
         (p.lambda < best->lambda || (p.lambda == best->lambda && p.t0 < best->t0))))
      best = &p;
  }
  std::cout << "lambda,t0,progressive_sq_loss,status\n";
  for (const auto& p : pts) {
    std::cout << format_double(p.lambda) << ',' << format_double(p.t0) << ',';
    if (p.ok)
      std::cout << format_double(p.loss) << ",ok\n";
    else
      std::cout << ",diverged\n";
  }
  if (!best) {
    std::cerr << "error: every grid point diverged (" << total << " of " << total << ")\n";
    return 1;
  }
  std::cout << "best," << format_double(best->lambda) << ',' << format_double(best->t0) << ','
            << format_double(best->loss) << '\n';
  return 0;
}

oracle::TreeSpec tree_spec_from(const Topology& topo, const ShardPlan& plan,
                                const std::vector<uint32_t>& indices) {
  oracle::TreeSpec spec;
  spec.nodes.resize(topo.nodes.size());
  for (uint32_t id = 0; id < topo.nodes.size(); ++id) {
    const NodeSpec& nd = topo.nodes[id];
    auto& out = spec.nodes[id];
    if (nd.is_leaf()) {
      for (size_t d = 0; d < indices.size(); ++d)
        if (plan.shard_of_index(indices[d]) == uint32_t(nd.shard)) out.leaf_features.push_back(int(d));
    } else {
      for (uint32_t c : topo.children[id]) out.children.push_back(int(c));
    }
  }
  spec.root = int(topo.root);
  return spec;
}

int cmd_oracle(const RunConfig& cfg, const std::string& kind) {
  InteractionSpec q = quadratic_spec(cfg);
  VectorStream data = load_examples(cfg, q);
  const auto& examples = data.data();
  if (examples.empty()) throw ConfigError("no instances in the data");

  std::vector<uint32_t> indices;
  for (const auto& ex : examples)
    for (const auto& e : ex.x.entries) indices.push_back(e.index);
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  std::vector<oracle::DensePoint> points(examples.size());
  for (size_t k = 0; k < examples.size(); ++k) {
    points[k].x.assign(indices.size(), 0.0);
    points[k].y = examples[k].y;
    for (const auto& e : examples[k].x.entries) {
      size_t d = size_t(std::lower_bound(indices.begin(), indices.end(), e.index) - indices.begin());
      points[k].x[d] += e.value;
    }
  }
  oracle::MomentSet m = oracle::moments(points);

  std::vector<double> w;
  bool pinv = false;
  if (kind == "least-squares") {
    auto r = oracle::least_squares(m);
    w = r.w;
    pinv = r.used_pseudo_inverse;
  } else if (kind == "naive-bayes") {
    auto r = oracle::naive_bayes_weights(m);
    w = r.w;
  } else if (kind == "tree") {
    Topology topo = run_topology(cfg);
    ShardPlan plan = make_shard_plan(ShardKind::Feature, cfg.shards);
    auto spec = tree_spec_from(topo, plan, indices);
    auto fp = oracle::tree_fixed_point(spec, m);
    w = fp.effective;
    pinv = fp.used_pseudo_inverse;
  } else {
    throw ConfigError("unknown oracle kind: " + kind);
  }
  for (size_t d = 0; d < indices.size(); ++d)
    std::cout << "weight " << indices[d] << ' ' << format_double(w[d]) << '\n';
  std::cout << "mse " << format_double(oracle::mse(w, points)) << '\n';
  if (pinv) std::cout << "pseudo_inverse 1\n";
  return 0;
}

void add_run_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--data", cfg.data, "input file ('-' = stdin, single pass)");
  sub->add_option("--bits", cfg.bits, "hashed table is 2^bits wide")->check(CLI::Range(1u, 31u));
  sub->add_option("--shards", cfg.shards, "feature shards / leaf count")->check(CLI::PositiveNumber);
  sub->add_option("--topology", cfg.topology, "flat | binary");
  sub->add_option("--shard-kind", cfg.shard_kind, "feature | instance (averaging baseline)");
  sub->add_option("--update", cfg.update,
                  "sgd | local | delayed-global | corrective | backprop | minibatch | minibatch-cg");
  sub->add_option("--batch-size", cfg.batch_size, "minibatch size b")->check(CLI::PositiveNumber);
  sub->add_option("--tau", cfg.tau, "target send/feedback delay");
  sub->add_option("--buffer", cfg.buffer, "pending-response buffer capacity");
  sub->add_option("--passes", cfg.passes, "passes over the data")->check(CLI::PositiveNumber);
  sub->add_option("--lambda", cfg.lambda, "learning rate scale: lambda/sqrt(t+t0)");
  sub->add_option("--t0", cfg.t0, "learning rate shift: lambda/sqrt(t+t0)");
  sub->add_option("--quadratic", cfg.quadratic, "namespace pair to cross, e.g. ab (repeatable)");
  sub->add_flag(
      "--threshold{1},--no-threshold{0}", cfg.threshold,
      "clamp transmitted predictions to [0,1] on all non-root nodes (default: preset choice)");
  sub->add_flag("--constant{1},--no-constant{0}", cfg.constant,
                "give internal nodes a constant calibration feature (default: preset choice)");
  sub->add_option("--backprop-scale", cfg.backprop_scale, "scale on the root's response gradient");
  sub->add_option("--seed", cfg.seed, "echoed into the summary for bookkeeping");
  sub->add_option("--model-out", cfg.model_out, "write final weights here");
  sub->add_option("--metrics-out", cfg.metrics_out, "write progressive metrics CSV here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sharded streaming linear learner and multinode simulator"};
  app.require_subcommand(1);

  RunConfig cfg;
  CLI::App* train = app.add_subcommand("train", "run one learning configuration");
  add_run_flags(train, cfg);

  CLI::App* simulate = app.add_subcommand("simulate", "run the multinode simulation");
  add_run_flags(simulate, cfg);
  simulate->add_option("--trace", cfg.trace_out, "write the schedule trace CSV here");

  CLI::App* grid = app.add_subcommand("grid", "learning-rate grid search");
  add_run_flags(grid, cfg);
  std::vector<double> lambdas = default_lambda_grid();
  std::vector<double> t0s = default_t0_grid();
  grid->add_option("--lambdas", lambdas, "lambda grid (default 2^0..2^9)")->delimiter(',');
  grid->add_option("--t0s", t0s, "t0 grid (default 10^0..10^6)")->delimiter(',');

  CLI::App* orc = app.add_subcommand("oracle", "closed-form solution on a dataset");
  add_run_flags(orc, cfg);
  std::string kind = "least-squares";
  orc->add_option("--kind", kind, "least-squares | naive-bayes | tree");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_run(cfg, false);
    if (simulate->parsed()) return cmd_run(cfg, true);
    if (grid->parsed()) return cmd_grid(cfg, lambdas, t0s);
    if (orc->parsed()) return cmd_oracle(cfg, kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
