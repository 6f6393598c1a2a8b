#include "deciwatch/pipeline.hpp"

#include <stdexcept>

namespace deciwatch {

namespace {

Array2 gather_rows(const PoseSequence& seq, int start, const std::vector<int>& local_indices) {
  Array2 out(static_cast<int>(local_indices.size()), seq.pose_dim());
  for (std::size_t i = 0; i < local_indices.size(); ++i) {
    const Array2 row = seq.frame_matrix(start + local_indices[i], 1);
    for (int j = 0; j < out.cols; ++j) out.at(static_cast<int>(i), j) = row.at(0, j);
  }
  return out;
}

PoseSequence assemble(const PoseSequence& like, const std::vector<Window>& windows,
                      const std::vector<Array2>& recovered) {
  PoseSequence out(like.frames, like.joints, like.dims);
  out.fps = like.fps;
  out.units = like.units;
  out.bbox = like.bbox;
  for (std::size_t w = 0; w < windows.size(); ++w)
    for (int t = 0; t < windows[w].length; ++t)
      out.set_frame(windows[w].start + t, &recovered[w].data[static_cast<std::size_t>(t) * recovered[w].cols]);
  return out;
}

}  // namespace

WindowBatch make_batch(const PoseSequence& noisy, const PoseSequence& clean, int N, int Q,
                       SamplingStrategy strategy, std::uint64_t seed) {
  if (noisy.frames != clean.frames || noisy.pose_dim() != clean.pose_dim())
    throw std::invalid_argument("make_batch: noisy/clean shape mismatch");
  WindowBatch b;
  b.windows = slice_windows(noisy.frames, N, Q);
  for (const auto& w : b.windows) {
    SamplingPlan plan = make_plan(strategy, w.length, N, seed, w.start);
    WindowSample s;
    s.noisy_sampled = gather_rows(noisy, w.start, plan.indices);
    s.gt_sampled = gather_rows(clean, w.start, plan.indices);
    s.gt_window = clean.frame_matrix(w.start, w.length);
    s.visible_indices = plan.indices;
    b.plans.push_back(std::move(plan));
    b.samples.push_back(std::move(s));
  }
  return b;
}

namespace {

PoseSequence reconstruct_impl(const Model& m, const PoseSequence& input,
                              SamplingStrategy strategy, std::uint64_t seed) {
  if (input.pose_dim() != m.cfg.pose_dim())
    throw std::invalid_argument("reconstruct: sequence pose dim " +
                                std::to_string(input.pose_dim()) + " vs model " +
                                std::to_string(m.cfg.pose_dim()));
  const auto windows = slice_windows(input.frames, m.cfg.N, m.cfg.Q);
  std::vector<Array2> rec;
  for (const auto& w : windows) {
    SamplingPlan plan = make_plan(strategy, w.length, m.cfg.N, seed, w.start);
    if (static_cast<int>(plan.indices.size()) != m.cfg.visible_count())
      throw std::invalid_argument("reconstruct: plan yields " +
                                  std::to_string(plan.indices.size()) + " visible frames, model expects " +
                                  std::to_string(m.cfg.visible_count()));
    Array2 sampled = gather_rows(input, w.start, plan.indices);
    rec.push_back(recover_window(m, sampled, plan.indices).poses);
  }
  return assemble(input, windows, rec);
}

}  // namespace

PoseSequence reconstruct(const Model& m, const PoseSequence& noisy, SamplingStrategy strategy,
                         std::uint64_t seed) {
  return reconstruct_impl(m, noisy, strategy, seed);
}

PoseSequence reconstruct_label(const Model& m, const PoseSequence& clean,
                               SamplingStrategy strategy, std::uint64_t seed) {
  return reconstruct_impl(m, clean, strategy, seed);
}

PoseSequence baseline_recover(const PoseSequence& noisy, int N, int Q, InterpMethod method,
                              SamplingStrategy strategy, std::uint64_t seed) {
  const auto windows = slice_windows(noisy.frames, N, Q);
  std::vector<Array2> rec;
  for (const auto& w : windows) {
    SamplingPlan plan = make_plan(strategy, w.length, N, seed, w.start);
    SparseSeries s;
    s.positions = plan.indices;
    s.values = gather_rows(noisy, w.start, plan.indices);
    rec.push_back(densify(s, method, w.length));
  }
  return assemble(noisy, windows, rec);
}

}  // namespace deciwatch
