#pragma once

#include <string>
#include <vector>

#include "deciwatch/interp.hpp"
#include "deciwatch/metrics.hpp"
#include "deciwatch/pose.hpp"
#include "deciwatch/training.hpp"

namespace deciwatch {

struct WindowBatch {
  std::vector<Window> windows;
  std::vector<SamplingPlan> plans;
  std::vector<WindowSample> samples;
};

// Slices the sequence into windows, samples each one, and pairs noisy
// visible poses with their clean targets.
WindowBatch make_batch(const PoseSequence& noisy, const PoseSequence& clean, int N, int Q,
                       SamplingStrategy strategy, std::uint64_t seed);

// Runs the model over every window and reassembles the full sequence; on
// the tail overlap the later window wins.
PoseSequence reconstruct(const Model& m, const PoseSequence& noisy, SamplingStrategy strategy,
                         std::uint64_t seed);

// Same reassembly but from clean sparse inputs (labeling mode).
PoseSequence reconstruct_label(const Model& m, const PoseSequence& clean,
                               SamplingStrategy strategy, std::uint64_t seed);

// Classical baseline: interpolate each window from its sampled noisy poses.
PoseSequence baseline_recover(const PoseSequence& noisy, int N, int Q, InterpMethod method,
                              SamplingStrategy strategy, std::uint64_t seed);

}  // namespace deciwatch
