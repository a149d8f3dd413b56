#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ethgnn/errors.hpp"
#include "ethgnn/layers.hpp"
#include "ethgnn/loss.hpp"
#include "ethgnn/rng.hpp"

namespace ethgnn {

// Output head: logits = H_final·W + b.
struct HeadParams {
  Matrix w;  // d_in x n_classes
  std::vector<double> b;
};

struct Masks {
  std::vector<bool> train;
  std::vector<bool> test;

  void validate(std::size_t n_nodes) const {
    std::vector<std::string> problems;
    if (train.size() != n_nodes || test.size() != n_nodes) {
      problems.push_back("masks must cover every node");
    } else {
      std::size_t n_train = 0, n_test = 0;
      for (std::size_t i = 0; i < n_nodes; ++i) {
        if (train[i] && test[i]) {
          problems.push_back("train and test masks overlap at node " + std::to_string(i));
          break;
        }
        n_train += train[i];
        n_test += test[i];
      }
      if (n_train == 0) problems.push_back("train mask is empty");
      if (n_test == 0) problems.push_back("test mask is empty");
    }
    if (!problems.empty()) throw ConfigError(problems);
  }
};

// Uniform split by seed: each node lands in train with probability
// train_fraction, the rest in test.
inline Masks random_split(std::size_t n_nodes, double train_fraction, std::uint64_t seed) {
  Masks m;
  m.train.assign(n_nodes, false);
  m.test.assign(n_nodes, false);
  Rng rng(derive_seed(seed, 101));
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (rng.uniform() < train_fraction) {
      m.train[i] = true;
    } else {
      m.test[i] = true;
    }
  }
  // Degenerate draws: keep both sides populated.
  if (n_nodes >= 2) {
    auto count = [](const std::vector<bool>& v) {
      std::size_t c = 0;
      for (bool b : v) c += b;
      return c;
    };
    if (count(m.train) == 0) {
      m.train[0] = true;
      m.test[0] = false;
    }
    if (count(m.test) == 0) {
      m.test[n_nodes - 1] = true;
      m.train[n_nodes - 1] = false;
    }
  }
  return m;
}

struct ModelSpec {
  std::vector<LayerConfig> layers;
  std::size_t n_classes = 2;

  void validate() const {
    std::vector<std::string> problems;
    if (layers.empty()) problems.push_back("model needs at least one layer");
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      if (layers[l].d_out != layers[l + 1].d_in) {
        problems.push_back("layer " + std::to_string(l) + " d_out does not feed layer " +
                           std::to_string(l + 1));
      }
    }
    if (n_classes < 2) problems.push_back("n_classes must be >= 2");
    if (!problems.empty()) throw ConfigError(problems);
  }
};

struct ModelGrads {
  std::vector<LayerGrads> layers;
  Matrix head_w;
  std::vector<double> head_b;
};

class GnnModel {
 public:
  GnnModel() = default;

  GnnModel(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    spec_.validate();
    init(seed);
  }

  const ModelSpec& spec() const { return spec_; }
  std::vector<LayerParams>& layers() { return layers_; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  HeadParams& head() { return head_; }
  const HeadParams& head() const { return head_; }

  // Glorot-uniform weights, zero biases, unit skip scales. Draw order is
  // fixed: per layer W row-major then attn, then the head W.
  void init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 7));
    layers_.clear();
    for (const auto& cfg : spec_.layers) {
      LayerParams p;
      p.w = glorot(rng, cfg.d_in, cfg.d_out);
      p.b.assign(cfg.d_out, 0.0);
      if (cfg.kind == LayerKind::Gat || cfg.kind == LayerKind::GatRl) {
        const double bound = std::sqrt(6.0 / static_cast<double>(2 * cfg.d_out + 1));
        p.attn.resize(2 * cfg.d_out);
        for (double& v : p.attn) v = rng.uniform(-bound, bound);
      }
      if (cfg.kind == LayerKind::GatRl) p.skip_scale.assign(cfg.d_out, 1.0);
      layers_.push_back(std::move(p));
    }
    head_.w = glorot(rng, spec_.layers.back().d_out, spec_.n_classes);
    head_.b.assign(spec_.n_classes, 0.0);
  }

  // Returns logits; fills per-layer caches and the final embedding when asked.
  Matrix forward(const SparseAdjacency& adj, const Matrix& x, std::uint64_t epoch = 0,
                 std::vector<LayerCache>* caches = nullptr, Matrix* final_emb = nullptr) const {
    Matrix h = x;
    if (caches) caches->assign(spec_.layers.size(), {});
    for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
      h = layer_forward(spec_.layers[l], layers_[l], adj, h, epoch,
                        caches ? &(*caches)[l] : nullptr);
    }
    if (final_emb) *final_emb = h;
    Matrix logits = detail::add_bias(matmul(h, head_.w), head_.b);
    return logits;
  }

  ModelGrads backward(const SparseAdjacency& adj, const std::vector<LayerCache>& caches,
                      const Matrix& final_emb, const Matrix& grad_logits) const {
    ModelGrads grads;
    grads.layers.resize(layers_.size());
    grads.head_w = matmul(transpose(final_emb), grad_logits);
    grads.head_b = detail::column_sums(grad_logits);
    Matrix d_h = matmul(grad_logits, transpose(head_.w));
    for (std::size_t l = layers_.size(); l-- > 0;) {
      d_h = layer_backward(spec_.layers[l], layers_[l], adj, caches[l], d_h, grads.layers[l]);
    }
    return grads;
  }

  std::vector<double> flatten_params() const {
    std::vector<double> out;
    for (const auto& p : layers_) {
      append(out, p.w.data());
      append(out, p.b);
      append(out, p.attn);
      append(out, p.skip_scale);
    }
    append(out, head_.w.data());
    append(out, head_.b);
    return out;
  }

  void unflatten_params(const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (auto& p : layers_) {
      take(flat, pos, p.w.data());
      take(flat, pos, p.b);
      take(flat, pos, p.attn);
      take(flat, pos, p.skip_scale);
    }
    take(flat, pos, head_.w.data());
    take(flat, pos, head_.b);
    if (pos != flat.size()) throw std::invalid_argument("parameter vector size mismatch");
  }

  std::vector<double> flatten_grads(const ModelGrads& g) const {
    std::vector<double> out;
    for (const auto& p : g.layers) {
      append(out, p.w.data());
      append(out, p.b);
      append(out, p.attn);
      append(out, p.skip_scale);
    }
    append(out, g.head_w.data());
    append(out, g.head_b);
    return out;
  }

  std::size_t n_params() const { return flatten_params().size(); }

  // Checkpoint: layer shapes plus parameter arrays. Doubles survive the JSON
  // round trip exactly (shortest round-trip formatting).
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["n_classes"] = spec_.n_classes;
    j["layers"] = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
      const auto& cfg = spec_.layers[l];
      const auto& p = layers_[l];
      nlohmann::ordered_json lj;
      lj["kind"] = kind_name(cfg.kind);
      lj["d_in"] = cfg.d_in;
      lj["d_out"] = cfg.d_out;
      lj["act"] = act_name(cfg.act.kind);
      lj["act_slope"] = cfg.act.slope;
      lj["attn_slope"] = cfg.attn_slope;
      lj["pooling"] = cfg.pooling == Pooling::Sum ? "sum" : "mean";
      lj["sampler_k"] = cfg.sampler.k;
      lj["sampler_seed"] = cfg.sampler.seed;
      lj["w"] = p.w.data();
      lj["b"] = p.b;
      lj["attn"] = p.attn;
      lj["skip_scale"] = p.skip_scale;
      j["layers"].push_back(std::move(lj));
    }
    j["head"] = {{"w", head_.w.data()}, {"b", head_.b}};
    return j;
  }

  static GnnModel from_json(const nlohmann::json& j) {
    GnnModel m;
    m.spec_.n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
      LayerConfig cfg;
      cfg.kind = kind_from_name(lj.at("kind").get<std::string>());
      cfg.d_in = lj.at("d_in").get<std::size_t>();
      cfg.d_out = lj.at("d_out").get<std::size_t>();
      cfg.act.kind = act_from_name(lj.at("act").get<std::string>());
      cfg.act.slope = lj.at("act_slope").get<double>();
      cfg.attn_slope = lj.at("attn_slope").get<double>();
      cfg.pooling = lj.at("pooling").get<std::string>() == "mean" ? Pooling::Mean : Pooling::Sum;
      cfg.sampler.k = lj.at("sampler_k").get<std::size_t>();
      cfg.sampler.seed = lj.at("sampler_seed").get<std::uint64_t>();
      m.spec_.layers.push_back(cfg);

      LayerParams p;
      p.w = Matrix(cfg.d_in, cfg.d_out);
      p.w.data() = lj.at("w").get<std::vector<double>>();
      if (p.w.data().size() != cfg.d_in * cfg.d_out) {
        throw ParseError("checkpoint: weight array does not match its shape");
      }
      p.b = lj.at("b").get<std::vector<double>>();
      p.attn = lj.at("attn").get<std::vector<double>>();
      p.skip_scale = lj.at("skip_scale").get<std::vector<double>>();
      m.layers_.push_back(std::move(p));
    }
    m.spec_.validate();
    m.head_.w = Matrix(m.spec_.layers.back().d_out, m.spec_.n_classes);
    m.head_.w.data() = j.at("head").at("w").get<std::vector<double>>();
    if (m.head_.w.data().size() != m.spec_.layers.back().d_out * m.spec_.n_classes) {
      throw ParseError("checkpoint: head weight array does not match its shape");
    }
    m.head_.b = j.at("head").at("b").get<std::vector<double>>();
    return m;
  }

  static const char* kind_name(LayerKind k) {
    switch (k) {
      case LayerKind::GraphConv: return "graphconv";
      case LayerKind::Sage: return "sage";
      case LayerKind::Gat: return "gat";
      case LayerKind::GatRl: return "gatrl";
    }
    return "graphconv";
  }

  static LayerKind kind_from_name(const std::string& name) {
    if (name == "graphconv") return LayerKind::GraphConv;
    if (name == "sage") return LayerKind::Sage;
    if (name == "gat") return LayerKind::Gat;
    if (name == "gatrl") return LayerKind::GatRl;
    throw ParseError("unknown layer kind: " + name);
  }

 private:
  Matrix glorot(Rng& rng, std::size_t d_in, std::size_t d_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
    Matrix w(d_in, d_out);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    return w;
  }

  static void append(std::vector<double>& out, const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
  }

  static void take(const std::vector<double>& flat, std::size_t& pos, std::vector<double>& v) {
    if (pos + v.size() > flat.size()) {
      throw std::invalid_argument("parameter vector too short");
    }
    std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
    pos += v.size();
  }

  ModelSpec spec_;
  std::vector<LayerParams> layers_;
  HeadParams head_;
};

}  // namespace ethgnn
