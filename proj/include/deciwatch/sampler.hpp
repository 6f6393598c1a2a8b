#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace deciwatch {

enum class SamplingStrategy { Uniform, UniformBurst2, UniformBurst3, Random, UniformRandomMix };

SamplingStrategy parse_strategy(const std::string& name);
std::string strategy_name(SamplingStrategy s);

// Visible-frame plan for one window. Indices are sorted, unique, inside
// [0, window_length), and always include both endpoints.
struct SamplingPlan {
  SamplingStrategy strategy = SamplingStrategy::Uniform;
  int window_length = 0;
  int interval = 0;  // N
  std::uint64_t seed = 0;
  std::vector<int> indices;

  double ratio() const {
    return static_cast<double>(indices.size()) / static_cast<double>(window_length);
  }
};

// One frame in every N; requires (window_length - 1) % N == 0.
SamplingPlan plan_uniform(int window_length, int N);

// burst consecutive frames at every anchor k*N, clipped at the window end;
// the last frame is always included. Ratio is burst/N.
SamplingPlan plan_burst(int window_length, int N, int burst);

// Endpoints always visible, remaining budget placed uniformly at random
// without replacement. With mix_uniform, half the interior budget is placed
// on the 2N grid first. Deterministic given seed.
SamplingPlan plan_random(int window_length, double ratio, std::uint64_t seed, bool mix_uniform);

// Dispatch by strategy at the ratio 1/N. Randomized strategies derive their
// per-window seed from (seed, window_start).
SamplingPlan make_plan(SamplingStrategy s, int window_length, int N, std::uint64_t seed,
                       int window_start);

}  // namespace deciwatch
