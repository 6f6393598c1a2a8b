#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deciwatch/array2.hpp"

namespace deciwatch {

// T x K x D pose trajectory. Units are millimeters for D=3 and pixels for
// D=2; bbox is the optional per-frame bounding-box size used by PCK.
struct PoseSequence {
  int frames = 0;
  int joints = 0;
  int dims = 0;
  double fps = 30.0;
  std::string units = "px";  // "mm" | "px"
  std::vector<double> coords;  // frames * joints * dims, row-major
  std::vector<double> bbox;    // empty or size == frames

  PoseSequence() = default;
  PoseSequence(int T, int K, int D);

  double& at(int t, int k, int d);
  double at(int t, int k, int d) const;
  int pose_dim() const { return joints * dims; }
  // One frame as a 1 x (K*D) row; frame range as rows of a matrix.
  Array2 frame_matrix(int t0, int count) const;
  void set_frame(int t, const double* row);
};

// Non-overlapping window of length N*Q+1; a short tail is re-anchored to end
// at the last frame and may overlap its predecessor.
struct Window {
  int start = 0;
  int length = 0;    // N*Q+1
  int interval = 0;  // N
  int visible = 0;   // Q+1 for uniform sampling
};

std::vector<Window> slice_windows(int total_frames, int N, int Q);

struct SyntheticSpec {
  enum class Motion { Constant, Linear, Quadratic, Sinusoidal, MixedFrequency };
  Motion motion = Motion::Sinusoidal;
  double amplitude = 100.0;
  double frequency = 0.02;  // cycles per frame
  double noise_sigma = 0.0;
  double outlier_rate = 0.0;
  double outlier_mag = 0.0;
  std::uint64_t seed = 1;
  double fps = 30.0;
};

SyntheticSpec::Motion parse_motion(const std::string& name);

// Returns (clean, noisy); noisy = clean + per-coordinate gaussian noise and
// per-joint outliers, reproducible from spec.seed.
std::pair<PoseSequence, PoseSequence> generate_synthetic(const SyntheticSpec& spec, int T, int K,
                                                         int D);

PoseSequence read_pose_file(const std::string& path);
void write_pose_file(const PoseSequence& seq, const std::string& path);

}  // namespace deciwatch
