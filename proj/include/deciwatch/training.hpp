#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deciwatch/model.hpp"
#include "deciwatch/sampler.hpp"

namespace deciwatch {

struct TrainConfig {
  ModelConfig model;
  double lambda_weight = 5.0;  // balance between recover and denoise terms
  double lr = 1e-3;
  std::string optimizer = "adam";  // adam | sgd
  int epochs = 200;
  std::uint64_t seed = 1;
  SamplingStrategy strategy = SamplingStrategy::Uniform;
};

// One training window: noisy visible poses, their clean targets, and the
// clean full-length window.
struct WindowSample {
  Array2 noisy_sampled;  // visible x (K*D)
  Array2 gt_sampled;     // visible x (K*D)
  Array2 gt_window;      // window x (K*D)
  std::vector<int> visible_indices;
};

struct LossParts {
  double total = 0.0;
  double recover = 0.0;
  double denoise = 0.0;
};

// Weighted L1 objective: lambda * mean|recovered - gt| + mean|clean - gt_sampled|,
// means taken over frames, joints and coordinates.
NodePtr loss_node(const NodePtr& recovered, const NodePtr& clean_sampled, const Array2& gt_window,
                  const Array2& gt_sampled, double lambda_weight, LossParts* parts = nullptr);

struct LossRow {
  int epoch = 0;
  int step = 0;
  LossParts loss;
};

struct TrainResult {
  Model model;
  std::vector<LossRow> log;
  bool diverged = false;
  int steps = 0;
};

TrainResult train(const std::vector<WindowSample>& data, const TrainConfig& cfg);

// Recovery from clean sparse inputs (efficient-labeling mode).
RecoveredWindow label_mode(const Model& m, const Array2& gt_sampled,
                           const std::vector<int>& visible_indices);

struct Checkpoint {
  TrainConfig cfg;
  Model model;
  int steps = 0;
  std::string rng_state;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void write_loss_csv(const std::vector<LossRow>& log, const std::string& path);

}  // namespace deciwatch
