// ethgnn command line: ingestion, graph building, GNN training, gas-limit
// optimization, combined GAT+PPO runs and the model/size benchmark grid.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ethgnn/cache.hpp"
#include "ethgnn/csv.hpp"
#include "ethgnn/fingerprint.hpp"
#include "ethgnn/gas.hpp"
#include "ethgnn/gatrl.hpp"
#include "ethgnn/rpc.hpp"
#include "ethgnn/synth.hpp"
#include "ethgnn/train.hpp"
#include "ethgnn/txgraph.hpp"

namespace fs = std::filesystem;
using namespace ethgnn;

namespace {

constexpr const char* kEndpointEnvVar = "ETHGNN_ENDPOINT";

struct CommonOpts {
  std::string out_dir = "out";
  std::uint64_t seed = 42;
};

struct SourceOpts {
  std::string cache_path;
  std::size_t n_synth_blocks = 0;
  std::size_t synth_pool = 64;
  std::uint64_t synth_seed = 1;
  std::uint32_t txs_lo = 8;
  std::uint32_t txs_hi = 24;
  bool undirected = false;
  bool value_weighted = false;
  bool self_loops = false;
  bool normalize_adjacency = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--cache", cache_path, "NDJSON block cache to load");
    cmd->add_option("--synth-blocks", n_synth_blocks,
                    "generate this many synthetic blocks instead of reading a cache");
    cmd->add_option("--synth-pool", synth_pool, "synthetic address pool size");
    cmd->add_option("--synth-seed", synth_seed, "synthetic generator seed");
    cmd->add_option("--synth-txs-lo", txs_lo, "min transactions per synthetic block");
    cmd->add_option("--synth-txs-hi", txs_hi, "max transactions per synthetic block");
    cmd->add_flag("--undirected", undirected, "symmetrize edges");
    cmd->add_flag("--value-weighted", value_weighted, "weigh edges by transferred ether");
    cmd->add_flag("--self-loops", self_loops, "add a self loop per node");
    cmd->add_flag("--normalize-adjacency", normalize_adjacency,
                  "row-normalize edge weights before training");
  }

  std::vector<BlockRecord> load_blocks() const {
    if (!cache_path.empty()) {
      const auto blocks = cache_read(cache_path);
      if (blocks.empty()) {
        throw std::runtime_error("cache " + cache_path + " contains no blocks");
      }
      return blocks;
    }
    SynthConfig cfg;
    cfg.seed = synth_seed;
    cfg.n_blocks = n_synth_blocks;
    cfg.pool_size = synth_pool;
    cfg.txs_lo = txs_lo;
    cfg.txs_hi = txs_hi;
    return ethgnn::synth_blocks(cfg);
  }

  TxGraph build() const {
    TxGraphOptions opts;
    opts.directed = !undirected;
    opts.value_weighted = value_weighted;
    opts.add_self_loops = self_loops;
    return build_transaction_graph(load_blocks(), opts);
  }

  SparseAdjacency training_adjacency(const TxGraph& g) const {
    return normalize_adjacency ? row_normalize(g.adj) : g.adj;
  }

  void validate(std::vector<std::string>& problems) const {
    if (cache_path.empty() && n_synth_blocks == 0) {
      problems.push_back("either --cache or --synth-blocks is required");
    }
    if (!cache_path.empty() && n_synth_blocks > 0) {
      problems.push_back("--cache and --synth-blocks are mutually exclusive");
    }
    if (txs_lo > txs_hi) problems.push_back("--synth-txs-lo must not exceed --synth-txs-hi");
    if (n_synth_blocks > 0 && synth_pool == 0) problems.push_back("--synth-pool must be >= 1");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["cache"] = cache_path;
    j["synth_blocks"] = n_synth_blocks;
    j["synth_pool"] = synth_pool;
    j["synth_seed"] = synth_seed;
    j["txs_lo"] = txs_lo;
    j["txs_hi"] = txs_hi;
    j["undirected"] = undirected;
    j["value_weighted"] = value_weighted;
    j["self_loops"] = self_loops;
    j["normalize_adjacency"] = normalize_adjacency;
    return j;
  }
};

struct ModelOpts {
  std::string model = "gat";
  std::size_t hidden = 16;
  std::size_t n_layers = 2;
  std::size_t sampler_k = 3;
  std::string pooling = "sum";
  std::string act = "sigmoid";

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--model", model, "graphconv | sage | gat | gatrl")
        ->check(CLI::IsMember({"graphconv", "sage", "gat", "gatrl"}));
    cmd->add_option("--hidden", hidden, "hidden embedding width");
    cmd->add_option("--layers", n_layers, "number of message-passing layers");
    cmd->add_option("--sampler-k", sampler_k, "neighbors sampled per node (sage)");
    cmd->add_option("--pooling", pooling, "sage pooling: sum | mean")
        ->check(CLI::IsMember({"sum", "mean"}));
    cmd->add_option("--act", act, "hidden activation: sigmoid | relu | leaky_relu | identity")
        ->check(CLI::IsMember({"sigmoid", "relu", "leaky_relu", "identity"}));
  }

  ModelSpec build_spec(std::size_t d_in, std::uint64_t seed) const {
    ModelSpec spec;
    const LayerKind kind = GnnModel::kind_from_name(model);
    for (std::size_t l = 0; l < n_layers; ++l) {
      LayerConfig cfg;
      cfg.kind = kind;
      cfg.d_in = l == 0 ? d_in : hidden;
      cfg.d_out = hidden;
      cfg.act = {act_from_name(act), 0.1};
      cfg.attn_slope = 0.2;
      cfg.pooling = pooling == "mean" ? Pooling::Mean : Pooling::Sum;
      cfg.sampler = {.k = sampler_k, .seed = derive_seed(seed, 400 + l)};
      spec.layers.push_back(cfg);
    }
    spec.n_classes = 2;
    return spec;
  }

  void validate(std::vector<std::string>& problems) const {
    if (hidden == 0) problems.push_back("--hidden must be >= 1");
    if (n_layers == 0) problems.push_back("--layers must be >= 1");
    if (sampler_k == 0) problems.push_back("--sampler-k must be >= 1");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["hidden"] = hidden;
    j["layers"] = n_layers;
    j["sampler_k"] = sampler_k;
    j["pooling"] = pooling;
    j["act"] = act;
    return j;
  }
};

void require_valid(std::vector<std::string> problems) {
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

fs::path prepare_out(const std::string& out_dir) {
  fs::create_directories(out_dir);
  return out_dir;
}

struct LabeledGraph {
  TxGraph graph;
  SparseAdjacency train_adj;
  Matrix inputs;
  std::vector<int> labels;
  Masks masks;
};

LabeledGraph labeled_graph(const SourceOpts& source, std::uint64_t seed) {
  LabeledGraph lg{source.build(), {}, {}, {}, {}};
  if (lg.graph.index.size() < 4) {
    throw std::runtime_error("graph too small for training: " +
                             std::to_string(lg.graph.index.size()) + " nodes");
  }
  lg.train_adj = source.training_adjacency(lg.graph);
  lg.inputs = classifier_inputs(lg.graph);
  lg.labels = high_activity_labels(lg.graph.raw_features);
  lg.masks = random_split(lg.graph.index.size(), 0.7, seed);
  return lg;
}

// ---------------------------------------------------------------- fetch

int cmd_fetch(const CommonOpts& common, const std::string& endpoint_flag,
              std::uint64_t start, std::uint64_t end, unsigned parallelism, int attempts,
              int base_delay_ms) {
  std::vector<std::string> problems;
  std::string endpoint = endpoint_flag;
  if (endpoint.empty()) {
    if (const char* env = std::getenv(kEndpointEnvVar)) endpoint = env;
  }
  if (endpoint.empty()) {
    problems.push_back(std::string("no endpoint: pass --endpoint or set ") + kEndpointEnvVar);
  }
  if (start > end) problems.push_back("--start must not exceed --end");
  if (parallelism == 0) problems.push_back("--parallelism must be >= 1");
  if (attempts < 1) problems.push_back("--attempts must be >= 1");
  require_valid(std::move(problems));

  const fs::path out = prepare_out(common.out_dir);
  RpcOptions opts;
  opts.attempts = attempts;
  opts.base_delay = std::chrono::milliseconds(base_delay_ms);
  RpcClient client(endpoint, opts);
  const auto blocks = client.fetch_range({start, end}, parallelism);
  const fs::path cache = out / "blocks.ndjson";
  cache_write(cache, blocks);

  nlohmann::ordered_json cfg;
  cfg["command"] = "fetch";
  cfg["endpoint"] = endpoint;
  cfg["start"] = start;
  cfg["end"] = end;
  cfg["parallelism"] = parallelism;
  write_fingerprint(out, cfg);

  std::size_t txs = 0;
  for (const auto& b : blocks) txs += b.transactions.size();
  std::cout << "fetched " << blocks.size() << " blocks (" << txs << " transactions) -> "
            << cache.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- graph

int cmd_graph(const CommonOpts& common, const SourceOpts& source) {
  std::vector<std::string> problems;
  source.validate(problems);
  require_valid(std::move(problems));

  const fs::path out = prepare_out(common.out_dir);
  const TxGraph g = source.build();

  write_graph_text(out / "graph.txt", g.adj, g.features);
  {
    std::ofstream edges(out / "edges.ndjson", std::ios::binary);
    write_edge_ndjson(edges, g.index, g.adj);
    std::ofstream addrs(out / "addresses.txt", std::ios::binary);
    for (const auto& a : g.index.addresses()) addrs << a << '\n';
  }

  nlohmann::ordered_json cfg;
  cfg["command"] = "graph";
  cfg["source"] = source.to_json();
  write_fingerprint(out, cfg);

  std::cout << "graph: " << g.adj.n_nodes() << " nodes, " << g.adj.nnz() << " edges -> "
            << (out / "graph.txt").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const CommonOpts& common, const SourceOpts& source, const ModelOpts& model,
              std::size_t epochs, double lr, const std::string& optimizer) {
  std::vector<std::string> problems;
  source.validate(problems);
  model.validate(problems);
  if (epochs == 0) problems.push_back("--epochs must be >= 1");
  if (lr < 0.0) problems.push_back("--lr must be non-negative");
  require_valid(std::move(problems));

  const fs::path out = prepare_out(common.out_dir);
  const LabeledGraph lg = labeled_graph(source, common.seed);

  TrainOptions opts;
  opts.epochs = epochs;
  opts.lr = lr;
  opts.optimizer = optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
  opts.seed = common.seed;
  const ModelSpec spec = model.build_spec(lg.inputs.cols(), common.seed);
  const TrainResult result =
      train_node_classifier(spec, lg.train_adj, lg.inputs, lg.labels, lg.masks, opts);

  {
    CsvWriter csv(out / "train_log.csv");
    csv.row({"epoch", "loss", "accuracy"});
    for (std::size_t e = 0; e < result.losses.size(); ++e) {
      csv.row({csv_u64(e), csv_double(result.losses[e]),
               csv_double(result.test_accuracies[e])});
    }
  }
  {
    std::ofstream ckpt(out / "checkpoint.json", std::ios::binary);
    ckpt << result.model.to_json().dump(2) << '\n';
  }

  nlohmann::ordered_json cfg;
  cfg["command"] = "train";
  cfg["source"] = source.to_json();
  cfg["model"] = model.to_json();
  cfg["epochs"] = epochs;
  cfg["lr"] = lr;
  cfg["optimizer"] = optimizer;
  cfg["seed"] = common.seed;
  write_fingerprint(out, cfg);

  std::cout << "trained " << model.model << " for " << epochs << " epochs; test accuracy "
            << result.final_test_accuracy << "\n";
  return 0;
}

// ---------------------------------------------------------------- gas-opt

int cmd_gas_opt(const CommonOpts& common, Algorithm1Config alg, GasRlConfig rl) {
  std::vector<std::string> problems;
  try {
    alg.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems.begin(), e.problems.end());
  }
  try {
    rl.sim.validate();
    rl.hp.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems.begin(), e.problems.end());
  }
  require_valid(std::move(problems));

  const fs::path out = prepare_out(common.out_dir);

  GasModel model = rl.sim.model;
  const Algorithm1Result alg_result = algorithm1_optimize(alg, model);
  {
    CsvWriter csv(out / "algorithm1_trace.csv");
    csv.row({"iteration", "gas_limit", "expected_time", "congestion"});
    for (const auto& it : alg_result.trace) {
      csv.row({csv_u64(it.iteration), csv_u64(it.gas_limit), csv_double(it.expected_time),
               csv_double(it.congestion)});
    }
  }

  const GasRlResult rl_result = run_gas_rl_experiment(rl);
  {
    CsvWriter csv(out / "gas_rl_blocks.csv");
    csv.row({"block", "episode", "gas_limit", "throughput", "epsilon", "learning_rate",
             "reward"});
    for (const auto& row : rl_result.rows) {
      csv.row({csv_u64(row.block), csv_u64(row.episode), csv_u64(row.gas_limit),
               csv_double(row.throughput), csv_double(row.epsilon),
               csv_double(row.learning_rate), csv_double(row.reward)});
    }
  }
  {
    CsvWriter csv(out / "gas_rl_episodes.csv");
    csv.row({"episode", "return", "epsilon"});
    for (std::size_t e = 0; e < rl_result.episode_returns.size(); ++e) {
      csv.row({csv_u64(e), csv_double(rl_result.episode_returns[e]),
               csv_double(rl_result.episode_epsilons[e])});
    }
  }

  nlohmann::ordered_json cfg;
  cfg["command"] = "gas-opt";
  cfg["algorithm1"] = {{"gas_limit", alg.gas_limit},
                       {"increment", alg.gas_limit_increment},
                       {"max_gas_limit", alg.max_gas_limit},
                       {"target_time", alg.target_time},
                       {"congestion_threshold", alg.congestion_threshold},
                       {"max_iterations", alg.max_iterations}};
  cfg["rl"] = {{"episodes", rl.episodes},
               {"blocks_per_episode", rl.blocks_per_episode},
               {"seed", rl.seed},
               {"alpha", rl.hp.alpha},
               {"gamma", rl.hp.gamma},
               {"epsilon_decay", rl.hp.epsilon_decay},
               {"epsilon_floor", rl.hp.epsilon_floor},
               {"mean_pending", rl.sim.mean_pending},
               {"pending_jitter", rl.sim.pending_jitter},
               {"t_per_tx", rl.sim.model.t_per_tx},
               {"g_per_tx", rl.sim.model.g_per_tx},
               {"max_gas_limit", rl.sim.max_gas_limit},
               {"congestion_penalty", rl.sim.congestion_penalty}};
  write_fingerprint(out, cfg);

  double final_quartile = 0.0;
  if (!rl_result.rows.empty()) {
    const std::size_t q = std::max<std::size_t>(1, rl_result.rows.size() / 4);
    for (std::size_t i = rl_result.rows.size() - q; i < rl_result.rows.size(); ++i) {
      final_quartile += rl_result.rows[i].throughput;
    }
    final_quartile /= static_cast<double>(q);
  }
  std::cout << "algorithm1: final gas limit " << alg_result.final_gas_limit
            << (alg_result.converged ? " (converged)" : " (max iterations)")
            << "; rl: final-quartile mean throughput " << final_quartile << "\n";
  return 0;
}

// ---------------------------------------------------------------- gatrl

int cmd_gatrl(const CommonOpts& common, const SourceOpts& source, std::size_t epochs,
              std::size_t hidden, std::size_t horizon) {
  std::vector<std::string> problems;
  source.validate(problems);
  if (epochs == 0) problems.push_back("--epochs must be >= 1");
  if (hidden == 0) problems.push_back("--gat-hidden must be >= 1");
  if (horizon == 0) problems.push_back("--horizon must be >= 1");
  require_valid(std::move(problems));

  const fs::path out = prepare_out(common.out_dir);
  const LabeledGraph lg = labeled_graph(source, common.seed);

  ModelSpec spec;
  spec.layers = {LayerConfig{.kind = LayerKind::Gat, .d_in = lg.inputs.cols(),
                             .d_out = hidden, .act = {Act::Sigmoid}, .attn_slope = 0.2}};
  spec.n_classes = 2;

  GatrlConfig cfg;
  cfg.horizon = horizon;
  const ComparisonResult result = compare_gat_vs_gatrl(lg.train_adj, lg.inputs, lg.labels,
                                                       lg.masks, spec, cfg, epochs,
                                                       common.seed);

  {
    CsvWriter csv(out / "gat_baseline.csv");
    csv.row({"epoch", "gat_loss"});
    for (std::size_t e = 0; e < result.plain.trace.gat_loss.size(); ++e) {
      csv.row({csv_u64(e), csv_double(result.plain.trace.gat_loss[e])});
    }
  }
  {
    CsvWriter csv(out / "gatrl_trace.csv");
    csv.row({"epoch", "gat_loss", "ppo_loss"});
    for (std::size_t e = 0; e < result.combined.trace.gat_loss.size(); ++e) {
      csv.row({csv_u64(e), csv_double(result.combined.trace.gat_loss[e]),
               csv_double(result.combined.trace.ppo_loss[e])});
    }
  }
  {
    CsvWriter csv(out / "ppo_stats.csv");
    csv.row({"epoch", "ppo_loss", "value_loss", "entropy"});
    for (std::size_t e = 0; e < result.combined.ppo_stats.size(); ++e) {
      const auto& s = result.combined.ppo_stats[e];
      csv.row({csv_u64(e), csv_double(s.loss), csv_double(s.value_loss),
               csv_double(s.entropy)});
    }
  }

  nlohmann::ordered_json cfg_json;
  cfg_json["command"] = "gatrl";
  cfg_json["source"] = source.to_json();
  cfg_json["epochs"] = epochs;
  cfg_json["gat_hidden"] = hidden;
  cfg_json["horizon"] = horizon;
  cfg_json["seed"] = common.seed;
  const std::string fp = write_fingerprint(out, cfg_json);

  const auto plain_smooth = smoothed(result.plain.trace.gat_loss, 10);
  const auto combined_smooth = smoothed(result.combined.trace.gat_loss, 10);
  nlohmann::ordered_json summary;
  summary["fingerprint"] = fp;
  summary["gat_final_accuracy"] = result.plain.final_test_accuracy;
  summary["gatrl_final_accuracy"] = result.combined.final_test_accuracy;
  summary["gat_final_smoothed_loss"] = plain_smooth.back();
  summary["gatrl_final_smoothed_loss"] = combined_smooth.back();
  {
    std::ofstream sf(out / "summary.json", std::ios::binary);
    sf << summary.dump(2) << '\n';
  }

  std::cout << "gat accuracy " << result.plain.final_test_accuracy << ", gatrl accuracy "
            << result.combined.final_test_accuracy << "; smoothed final loss "
            << plain_smooth.back() << " vs " << combined_smooth.back() << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const CommonOpts& common, std::vector<std::size_t> sizes,
              std::vector<std::string> models, std::size_t epochs, std::size_t pool,
              std::size_t hidden, std::size_t sampler_k) {
  std::vector<std::string> problems;
  if (sizes.empty()) problems.push_back("--sizes must name at least one block count");
  if (models.empty()) problems.push_back("--models must name at least one model");
  for (const auto& m : models) {
    if (m != "graphconv" && m != "sage" && m != "gat") {
      problems.push_back("unknown bench model: " + m);
    }
  }
  if (epochs == 0) problems.push_back("--epochs must be >= 1");
  require_valid(std::move(problems));

  const fs::path out = prepare_out(common.out_dir);
  CsvWriter csv(out / "bench.csv");
  csv.row({"model", "blocks", "accuracy", "train_seconds", "total_seconds"});

  using clock = std::chrono::steady_clock;
  for (std::size_t size : sizes) {
    const auto build_start = clock::now();
    SourceOpts source;
    source.n_synth_blocks = size;
    // pool 0 = auto: grow the address pool with the block count so the graph
    // itself scales rather than just densifying.
    source.synth_pool = pool > 0 ? pool : std::clamp<std::size_t>(size / 4, 64, 4096);
    source.synth_seed = common.seed;
    source.self_loops = true;  // the activity label needs each node's own features
    const LabeledGraph lg = labeled_graph(source, common.seed);
    const double graph_seconds = std::chrono::duration<double>(clock::now() - build_start).count();

    for (const auto& model_name : models) {
      ModelOpts model;
      model.model = model_name;
      model.hidden = hidden;
      model.sampler_k = sampler_k;
      const ModelSpec spec = model.build_spec(lg.inputs.cols(), common.seed);

      TrainOptions opts;
      opts.epochs = epochs;
      opts.lr = 0.01;
      opts.seed = common.seed;
      const auto train_start = clock::now();
      const TrainResult result =
          train_node_classifier(spec, lg.train_adj, lg.inputs, lg.labels, lg.masks, opts);
      const double train_seconds =
          std::chrono::duration<double>(clock::now() - train_start).count();

      csv.row({model_name, csv_u64(size), csv_double(result.final_test_accuracy),
               csv_double(train_seconds), csv_double(graph_seconds + train_seconds)});
      std::cout << model_name << " blocks=" << size << " accuracy "
                << result.final_test_accuracy << " train " << train_seconds << "s\n";
    }
  }

  nlohmann::ordered_json cfg;
  cfg["command"] = "bench";
  cfg["sizes"] = sizes;
  cfg["models"] = models;
  cfg["epochs"] = epochs;
  cfg["pool"] = pool;
  cfg["hidden"] = hidden;
  cfg["sampler_k"] = sampler_k;
  cfg["seed"] = common.seed;
  write_fingerprint(out, cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ethereum transaction-graph GNN and gas-limit RL toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", common.seed, "master seed")->capture_default_str();

  // fetch
  auto* fetch = app.add_subcommand("fetch", "fetch a block range over JSON-RPC into a cache");
  std::string endpoint;
  std::uint64_t start = 0, end = 0;
  unsigned parallelism = 4;
  int attempts = 5, base_delay_ms = 250;
  fetch->add_option("--endpoint", endpoint,
                    std::string("JSON-RPC endpoint (overrides ") + kEndpointEnvVar + ")");
  fetch->add_option("--start", start, "first block")->required();
  fetch->add_option("--end", end, "last block (inclusive)")->required();
  fetch->add_option("--parallelism", parallelism, "max requests in flight")
      ->capture_default_str();
  fetch->add_option("--attempts", attempts, "tries per request")->capture_default_str();
  fetch->add_option("--base-delay-ms", base_delay_ms, "backoff base delay")
      ->capture_default_str();

  // graph
  auto* graph = app.add_subcommand("graph", "build the address transaction graph");
  SourceOpts graph_source;
  graph_source.add_flags(graph);

  // train
  auto* train = app.add_subcommand("train", "train a node classifier on the graph");
  SourceOpts train_source;
  ModelOpts train_model;
  std::size_t train_epochs = 200;
  double train_lr = 0.01;
  std::string train_optimizer = "adam";
  train_source.add_flags(train);
  train_model.add_flags(train);
  train->add_option("--epochs", train_epochs, "training epochs")->capture_default_str();
  train->add_option("--lr", train_lr, "learning rate")->capture_default_str();
  train->add_option("--optimizer", train_optimizer, "sgd | adam")
      ->check(CLI::IsMember({"sgd", "adam"}))
      ->capture_default_str();

  // gas-opt
  auto* gas = app.add_subcommand("gas-opt",
                                 "run the gas-limit search and the RL gas experiment");
  Algorithm1Config alg;
  GasRlConfig rl;
  gas->add_option("--gas-limit", alg.gas_limit, "algorithm1 starting limit")
      ->capture_default_str();
  gas->add_option("--increment", alg.gas_limit_increment, "adjustment step")
      ->capture_default_str();
  gas->add_option("--max-gas-limit", alg.max_gas_limit, "upper bound")->capture_default_str();
  gas->add_option("--target-time", alg.target_time, "target block time (s)")
      ->capture_default_str();
  gas->add_option("--congestion-threshold", alg.congestion_threshold, "congestion bound")
      ->capture_default_str();
  gas->add_option("--max-iterations", alg.max_iterations, "iteration budget")
      ->capture_default_str();
  gas->add_option("--episodes", rl.episodes, "RL episodes")->capture_default_str();
  gas->add_option("--blocks", rl.blocks_per_episode, "blocks per episode")
      ->capture_default_str();
  gas->add_option("--pending", rl.sim.mean_pending, "mean pending transactions")
      ->capture_default_str();
  gas->add_option("--pending-jitter", rl.sim.pending_jitter, "arrival jitter")
      ->capture_default_str();
  gas->add_option("--alpha", rl.hp.alpha, "Q learning rate")->capture_default_str();
  gas->add_option("--gamma", rl.hp.gamma, "discount")->capture_default_str();
  gas->add_option("--epsilon-decay", rl.hp.epsilon_decay, "per-episode decay")
      ->capture_default_str();
  gas->add_option("--epsilon-floor", rl.hp.epsilon_floor, "exploration floor")
      ->capture_default_str();

  // gatrl
  auto* gatrl = app.add_subcommand("gatrl", "compare plain GAT vs combined GAT-RL");
  SourceOpts gatrl_source;
  std::size_t gatrl_epochs = 120;
  std::size_t gatrl_hidden = 16;
  std::size_t gatrl_horizon = 16;
  gatrl_source.add_flags(gatrl);
  gatrl->add_option("--epochs", gatrl_epochs, "epochs for both runs")->capture_default_str();
  gatrl->add_option("--gat-hidden", gatrl_hidden, "GAT hidden width")->capture_default_str();
  gatrl->add_option("--horizon", gatrl_horizon, "PPO episode length")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "accuracy/time grid over models and block counts");
  std::vector<std::size_t> bench_sizes{1000, 3000, 9000};
  std::vector<std::string> bench_models{"graphconv", "sage", "gat"};
  std::size_t bench_epochs = 100, bench_pool = 0, bench_hidden = 16, bench_k = 3;
  bench->add_option("--sizes", bench_sizes, "block counts")->delimiter(',')
      ->capture_default_str();
  bench->add_option("--models", bench_models, "models to run")->delimiter(',')
      ->capture_default_str();
  bench->add_option("--epochs", bench_epochs, "training epochs per cell")
      ->capture_default_str();
  bench->add_option("--pool", bench_pool, "synthetic address pool (0 = scale with size)")
      ->capture_default_str();
  bench->add_option("--hidden", bench_hidden, "hidden width")->capture_default_str();
  bench->add_option("--sampler-k", bench_k, "sage sample size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fetch->parsed()) {
      return cmd_fetch(common, endpoint, start, end, parallelism, attempts, base_delay_ms);
    }
    if (graph->parsed()) return cmd_graph(common, graph_source);
    if (train->parsed()) {
      return cmd_train(common, train_source, train_model, train_epochs, train_lr,
                       train_optimizer);
    }
    if (gas->parsed()) {
      rl.seed = common.seed;
      return cmd_gas_opt(common, alg, rl);
    }
    if (gatrl->parsed()) {
      return cmd_gatrl(common, gatrl_source, gatrl_epochs, gatrl_hidden, gatrl_horizon);
    }
    if (bench->parsed()) {
      return cmd_bench(common, bench_sizes, bench_models, bench_epochs, bench_pool,
                       bench_hidden, bench_k);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
