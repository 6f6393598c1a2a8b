#include "deciwatch/pose.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace deciwatch {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

PoseSequence::PoseSequence(int T, int K, int D)
    : frames(T), joints(K), dims(D),
      coords(static_cast<std::size_t>(T) * K * D, 0.0) {
  if (T < 0 || K <= 0 || (D != 2 && D != 3))
    throw std::invalid_argument("PoseSequence: D must be 2 or 3, K > 0");
}

double& PoseSequence::at(int t, int k, int d) {
  return coords[(static_cast<std::size_t>(t) * joints + k) * dims + d];
}

double PoseSequence::at(int t, int k, int d) const {
  return coords[(static_cast<std::size_t>(t) * joints + k) * dims + d];
}

Array2 PoseSequence::frame_matrix(int t0, int count) const {
  if (t0 < 0 || t0 + count > frames)
    throw std::invalid_argument("frame_matrix: range out of bounds");
  Array2 out(count, pose_dim());
  std::memcpy(out.data.data(), &coords[static_cast<std::size_t>(t0) * pose_dim()],
              sizeof(double) * out.data.size());
  return out;
}

void PoseSequence::set_frame(int t, const double* row) {
  std::memcpy(&coords[static_cast<std::size_t>(t) * pose_dim()], row,
              sizeof(double) * pose_dim());
}

std::vector<Window> slice_windows(int total_frames, int N, int Q) {
  if (N < 1 || Q < 1) throw std::invalid_argument("slice_windows: N and Q must be >= 1");
  const int len = N * Q + 1;
  if (total_frames < len)
    throw std::invalid_argument("slice_windows: sequence too short, need at least " +
                                std::to_string(len) + " frames, got " +
                                std::to_string(total_frames));
  std::vector<Window> out;
  int start = 0;
  while (start + len <= total_frames) {
    out.push_back({start, len, N, Q + 1});
    start += len;
  }
  // Tail shorter than a window: re-anchor to end at the last frame so both
  // endpoints stay visible; the overlap is resolved in favor of this window.
  if (start < total_frames) out.push_back({total_frames - len, len, N, Q + 1});
  return out;
}

SyntheticSpec::Motion parse_motion(const std::string& name) {
  if (name == "constant") return SyntheticSpec::Motion::Constant;
  if (name == "linear") return SyntheticSpec::Motion::Linear;
  if (name == "quadratic") return SyntheticSpec::Motion::Quadratic;
  if (name == "sinusoid" || name == "sinusoidal") return SyntheticSpec::Motion::Sinusoidal;
  if (name == "mixed") return SyntheticSpec::Motion::MixedFrequency;
  throw std::invalid_argument("unknown motion kind: " + name);
}

std::pair<PoseSequence, PoseSequence> generate_synthetic(const SyntheticSpec& spec, int T, int K,
                                                         int D) {
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (spec.outlier_rate < 0.0 || spec.outlier_rate > 1.0)
    throw std::invalid_argument("outlier_rate must be in [0,1]");
  PoseSequence clean(T, K, D);
  clean.fps = spec.fps;
  clean.units = (D == 3) ? "mm" : "px";

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // per-coordinate motion parameters
  const int n = K * D;
  std::vector<double> offset(n), amp(n), freq(n), phase(n), slope(n), curv(n);
  for (int i = 0; i < n; ++i) {
    offset[i] = spec.amplitude * (2.0 * u01(rng) - 1.0);
    amp[i] = spec.amplitude * (0.5 + 0.5 * u01(rng));
    freq[i] = spec.frequency * (0.8 + 0.4 * u01(rng));
    phase[i] = 2.0 * kPi * u01(rng);
    slope[i] = spec.amplitude * (2.0 * u01(rng) - 1.0) / std::max(1, T - 1);
    curv[i] = slope[i] / std::max(1, T - 1);
  }

  for (int t = 0; t < T; ++t)
    for (int k = 0; k < K; ++k)
      for (int d = 0; d < D; ++d) {
        const int i = k * D + d;
        double v = offset[i];
        switch (spec.motion) {
          case SyntheticSpec::Motion::Constant:
            break;
          case SyntheticSpec::Motion::Linear:
            v += slope[i] * t;
            break;
          case SyntheticSpec::Motion::Quadratic:
            v += slope[i] * t + curv[i] * t * t;
            break;
          case SyntheticSpec::Motion::Sinusoidal:
            v += amp[i] * std::sin(2.0 * kPi * freq[i] * t + phase[i]);
            break;
          case SyntheticSpec::Motion::MixedFrequency:
            v += amp[i] * std::sin(2.0 * kPi * freq[i] * t + phase[i]) +
                 0.25 * amp[i] * std::sin(2.0 * kPi * 3.0 * freq[i] * t + 2.0 * phase[i]);
            break;
        }
        clean.at(t, k, d) = v;
      }

  if (D == 2) {
    clean.bbox.resize(T);
    for (int t = 0; t < T; ++t) {
      double lo[2] = {clean.at(t, 0, 0), clean.at(t, 0, 1)};
      double hi[2] = {lo[0], lo[1]};
      for (int k = 0; k < K; ++k)
        for (int d = 0; d < 2; ++d) {
          lo[d] = std::min(lo[d], clean.at(t, k, d));
          hi[d] = std::max(hi[d], clean.at(t, k, d));
        }
      clean.bbox[t] = std::max({hi[0] - lo[0], hi[1] - lo[1], 1.0});
    }
  }

  PoseSequence noisy = clean;
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> g(0.0, spec.noise_sigma);
    for (double& v : noisy.coords) v += g(rng);
  }
  if (spec.outlier_rate > 0.0) {
    std::uniform_real_distribution<double> mag(-spec.outlier_mag, spec.outlier_mag);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k)
        if (u01(rng) < spec.outlier_rate)
          for (int d = 0; d < D; ++d) noisy.at(t, k, d) += mag(rng);
  }
  return {std::move(clean), std::move(noisy)};
}

PoseSequence read_pose_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pose file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(path + ": empty file");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "POSEv1")
    throw std::runtime_error(path + ": bad magic '" + magic + "', expected POSEv1");
  int T = -1, K = -1, D = -1;
  double fps = 30.0;
  std::string units;
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error(path + ": bad header token " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "T") T = std::stoi(val);
    else if (key == "K") K = std::stoi(val);
    else if (key == "D") D = std::stoi(val);
    else if (key == "fps") fps = std::stod(val);
    else if (key == "units") units = val;
    else throw std::runtime_error(path + ": unknown header key " + key);
  }
  if (T < 0 || K <= 0 || (D != 2 && D != 3))
    throw std::runtime_error(path + ": invalid header shape T=" + std::to_string(T) +
                             " K=" + std::to_string(K) + " D=" + std::to_string(D));
  if (units != "mm" && units != "px") throw std::runtime_error(path + ": bad units " + units);

  PoseSequence seq(T, K, D);
  seq.fps = fps;
  seq.units = units;

  std::string line;
  int lineno = 1;
  std::streampos body = in.tellg();
  if (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("BBOX", 0) == 0) {
      std::istringstream bs(line.substr(4));
      seq.bbox.resize(T);
      for (int t = 0; t < T; ++t)
        if (!(bs >> seq.bbox[t]))
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": BBOX needs " +
                                   std::to_string(T) + " values");
    } else {
      in.seekg(body);
      lineno = 1;
    }
  }

  for (int t = 0; t < T; ++t) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated at frame " + std::to_string(t) + " of " +
                               std::to_string(T));
    ++lineno;
    std::istringstream ls(line);
    for (int i = 0; i < K * D; ++i) {
      double v;
      if (!(ls >> v))
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": frame " +
                                 std::to_string(t) + " has fewer than " + std::to_string(K * D) +
                                 " values");
      if (!std::isfinite(v))
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": non-finite coordinate at frame " + std::to_string(t) +
                                 " index " + std::to_string(i));
      seq.coords[static_cast<std::size_t>(t) * K * D + i] = v;
    }
  }
  return seq;
}

void write_pose_file(const PoseSequence& seq, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write pose file: " + path);
  out << "POSEv1 T=" << seq.frames << " K=" << seq.joints << " D=" << seq.dims
      << " fps=" << fmt17(seq.fps) << " units=" << seq.units << "\n";
  if (!seq.bbox.empty()) {
    out << "BBOX";
    for (double b : seq.bbox) out << " " << fmt17(b);
    out << "\n";
  }
  const int n = seq.pose_dim();
  for (int t = 0; t < seq.frames; ++t) {
    for (int i = 0; i < n; ++i) {
      if (i) out << " ";
      out << fmt17(seq.coords[static_cast<std::size_t>(t) * n + i]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace deciwatch
