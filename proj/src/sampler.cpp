#include "deciwatch/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace deciwatch {

SamplingStrategy parse_strategy(const std::string& name) {
  if (name == "uniform") return SamplingStrategy::Uniform;
  if (name == "u2") return SamplingStrategy::UniformBurst2;
  if (name == "u3") return SamplingStrategy::UniformBurst3;
  if (name == "random") return SamplingStrategy::Random;
  if (name == "umix") return SamplingStrategy::UniformRandomMix;
  throw std::invalid_argument("unknown sampling strategy: " + name);
}

std::string strategy_name(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::Uniform: return "uniform";
    case SamplingStrategy::UniformBurst2: return "u2";
    case SamplingStrategy::UniformBurst3: return "u3";
    case SamplingStrategy::Random: return "random";
    case SamplingStrategy::UniformRandomMix: return "umix";
  }
  return "?";
}

SamplingPlan plan_uniform(int window_length, int N) {
  if (N < 1) throw std::invalid_argument("plan_uniform: N must be >= 1");
  if (window_length < 2 || (window_length - 1) % N != 0)
    throw std::invalid_argument("plan_uniform: window_length " + std::to_string(window_length) +
                                " is not N*Q+1 for N=" + std::to_string(N));
  SamplingPlan p;
  p.strategy = SamplingStrategy::Uniform;
  p.window_length = window_length;
  p.interval = N;
  for (int i = 0; i < window_length; i += N) p.indices.push_back(i);
  return p;
}

SamplingPlan plan_burst(int window_length, int N, int burst) {
  if (burst < 1 || burst >= N)
    throw std::invalid_argument("plan_burst: need 1 <= burst < N, got burst=" +
                                std::to_string(burst) + " N=" + std::to_string(N));
  if (window_length < 2) throw std::invalid_argument("plan_burst: window_length must be >= 2");
  SamplingPlan p;
  p.strategy = burst == 2 ? SamplingStrategy::UniformBurst2
             : burst == 3 ? SamplingStrategy::UniformBurst3
                          : SamplingStrategy::Uniform;
  p.window_length = window_length;
  p.interval = N;
  for (int anchor = 0; anchor < window_length; anchor += N)
    for (int o = 0; o < burst && anchor + o < window_length; ++o) p.indices.push_back(anchor + o);
  if (p.indices.back() != window_length - 1) p.indices.push_back(window_length - 1);
  return p;
}

SamplingPlan plan_random(int window_length, double ratio, std::uint64_t seed, bool mix_uniform) {
  if (ratio <= 0.0 || ratio > 1.0) throw std::invalid_argument("plan_random: ratio in (0,1]");
  const int budget = static_cast<int>(std::lround(ratio * window_length));
  if (budget < 2)
    throw std::invalid_argument("plan_random: budget " + std::to_string(budget) +
                                " < 2 visible frames");
  SamplingPlan p;
  p.strategy = mix_uniform ? SamplingStrategy::UniformRandomMix : SamplingStrategy::Random;
  p.window_length = window_length;
  p.interval = std::max(1, static_cast<int>(std::lround(1.0 / ratio)));
  p.seed = seed;

  std::vector<char> taken(window_length, 0);
  taken[0] = taken[window_length - 1] = 1;
  int count = std::min(2, budget);
  if (mix_uniform) {
    const int grid = 2 * p.interval;
    const int uniform_quota = budget / 2;
    for (int i = grid; i < window_length - 1 && count < uniform_quota; i += grid)
      if (!taken[i]) {
        taken[i] = 1;
        ++count;
      }
  }
  std::vector<int> pool;
  for (int i = 1; i + 1 < window_length; ++i)
    if (!taken[i]) pool.push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  for (int i = 0; count < budget && i < static_cast<int>(pool.size()); ++i, ++count)
    taken[pool[i]] = 1;

  for (int i = 0; i < window_length; ++i)
    if (taken[i]) p.indices.push_back(i);
  return p;
}

SamplingPlan make_plan(SamplingStrategy s, int window_length, int N, std::uint64_t seed,
                       int window_start) {
  const std::uint64_t wseed = seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(window_start);
  switch (s) {
    case SamplingStrategy::Uniform:
      return plan_uniform(window_length, N);
    case SamplingStrategy::UniformBurst2:
    case SamplingStrategy::UniformBurst3: {
      // Effective period burst*N keeps the ratio at 1/N; trim interior
      // frames from the tail so every strategy yields exactly Q+1 frames.
      const int burst = (s == SamplingStrategy::UniformBurst2) ? 2 : 3;
      auto p = plan_burst(window_length, burst * N, burst);
      p.interval = N;
      const int budget = (window_length - 1) / N + 1;
      while (static_cast<int>(p.indices.size()) > budget) {
        for (auto it = p.indices.rbegin(); it != p.indices.rend(); ++it)
          if (*it != 0 && *it != window_length - 1) {
            p.indices.erase(std::next(it).base());
            break;
          }
      }
      return p;
    }
    case SamplingStrategy::Random: {
      const int budget = (window_length - 1) / N + 1;
      return plan_random(window_length, static_cast<double>(budget) / window_length, wseed, false);
    }
    case SamplingStrategy::UniformRandomMix: {
      const int budget = (window_length - 1) / N + 1;
      auto p = plan_random(window_length, static_cast<double>(budget) / window_length, wseed, true);
      p.interval = N;
      return p;
    }
  }
  throw std::invalid_argument("make_plan: bad strategy");
}

}  // namespace deciwatch
