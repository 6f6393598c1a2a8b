#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "deciwatch/autodiff.hpp"
#include "deciwatch/interp.hpp"

namespace deciwatch {

struct ModelConfig {
  int K = 15;        // joints
  int D = 2;         // coordinate dims
  int N = 10;        // sampling interval
  int Q = 10;        // visible frames per window minus one
  int C = 64;        // embedding dim
  int M = 5;         // transformer blocks per subnet
  int H = 4;         // attention heads
  int kernel_size = 5;
  int ffn_mult = 4;  // feed-forward width = ffn_mult * C
  double dropout = 0.0;
  double ln_eps = 1e-5;
  bool sinusoidal_pos = false;
  int visible = -1;  // visible frames per window; -1 means Q+1

  int pose_dim() const { return K * D; }
  int window_length() const { return N * Q + 1; }
  int visible_count() const { return visible > 0 ? visible : Q + 1; }
  int ffn_dim() const { return ffn_mult * C; }
  void validate() const;
};

// Ordered, named parameter arrays; iteration order is insertion order so
// checkpoints and optimizer state are deterministic.
class ParamStore {
 public:
  Array2& add(const std::string& name, Array2 v);
  Array2& get(const std::string& name);
  const Array2& get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  const std::vector<std::string>& names() const { return order_; }
  std::size_t total_elements() const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Array2> index_;
};

struct Model {
  ModelConfig cfg;
  ParamStore params;
  std::vector<std::string> frozen;  // non-trainable (sinusoidal tables)

  bool is_frozen(const std::string& name) const;
};

Model init_model(const ModelConfig& cfg, std::uint64_t seed);

// Lazily turns stored parameters into graph leaves; one leaf per parameter
// per graph so gradients land in a single place.
class GraphParams {
 public:
  GraphParams(const Model& model) : model_(&model) {}
  NodePtr operator[](const std::string& name);
  const std::unordered_map<std::string, NodePtr>& leaves() const { return leaves_; }

 private:
  const Model* model_;
  std::unordered_map<std::string, NodePtr> leaves_;
};

struct RecoveredWindow {
  Array2 poses;               // window_length x (K*D)
  std::vector<bool> visible;  // per-frame provenance flag
};

struct PipelineOutput {
  NodePtr clean;        // visible x (K*D), refined sampled poses
  NodePtr features;     // visible x C, encoder output for cross-attention
  NodePtr preliminary;  // window x (K*D)
  NodePtr recovered;    // window x (K*D)
};

// Eqs.-style forward passes. Inputs are visible x (K*D) matrices.
std::pair<NodePtr, NodePtr> denoise_forward(const Model& m, GraphParams& gp,
                                            const NodePtr& noisy_sampled,
                                            std::mt19937_64* dropout_rng = nullptr);
NodePtr preliminary_recover(const Model& m, GraphParams& gp, const NodePtr& clean_sampled);
NodePtr recover_forward(const Model& m, GraphParams& gp, const NodePtr& preliminary,
                        const NodePtr& features, std::mt19937_64* dropout_rng = nullptr);
PipelineOutput run_pipeline(const Model& m, GraphParams& gp, const Array2& noisy_sampled,
                            std::mt19937_64* dropout_rng = nullptr);

// Convenience non-graph evaluation of one window.
RecoveredWindow recover_window(const Model& m, const Array2& noisy_sampled,
                               const std::vector<int>& visible_indices);

// Closed-form multiply-accumulate counts matching the instrumented counter:
// matmuls, temporal conv, and 2 multiplies per layer-norm element.
std::uint64_t denoise_flops(const ModelConfig& cfg, int visible_count);
std::uint64_t recover_flops(const ModelConfig& cfg, int window_length, int visible_count);
std::size_t denoise_param_count(const Model& m);
std::size_t recover_param_count(const Model& m);

}  // namespace deciwatch
