#include "deciwatch/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace deciwatch {

namespace {
void check_shapes(const PoseSequence& pred, const PoseSequence& gt) {
  if (pred.frames != gt.frames || pred.joints != gt.joints || pred.dims != gt.dims)
    throw std::invalid_argument("metrics: shape mismatch pred " + std::to_string(pred.frames) +
                                "x" + std::to_string(pred.joints) + "x" +
                                std::to_string(pred.dims) + " vs gt " +
                                std::to_string(gt.frames) + "x" + std::to_string(gt.joints) + "x" +
                                std::to_string(gt.dims));
}
}  // namespace

double mpjpe(const PoseSequence& pred, const PoseSequence& gt) {
  check_shapes(pred, gt);
  double sum = 0.0;
  for (int t = 0; t < pred.frames; ++t)
    for (int k = 0; k < pred.joints; ++k) {
      double d2 = 0.0;
      for (int d = 0; d < pred.dims; ++d) {
        const double e = pred.at(t, k, d) - gt.at(t, k, d);
        d2 += e * e;
      }
      sum += std::sqrt(d2);
    }
  return sum / (static_cast<double>(pred.frames) * pred.joints);
}

double accel_error(const PoseSequence& pred, const PoseSequence& gt) {
  check_shapes(pred, gt);
  if (pred.frames < 3)
    throw std::invalid_argument("accel_error: need at least 3 frames, got " +
                                std::to_string(pred.frames));
  double sum = 0.0;
  for (int t = 1; t + 1 < pred.frames; ++t)
    for (int k = 0; k < pred.joints; ++k) {
      double d2 = 0.0;
      for (int d = 0; d < pred.dims; ++d) {
        const double ap = pred.at(t + 1, k, d) - 2.0 * pred.at(t, k, d) + pred.at(t - 1, k, d);
        const double ag = gt.at(t + 1, k, d) - 2.0 * gt.at(t, k, d) + gt.at(t - 1, k, d);
        const double e = ap - ag;
        d2 += e * e;
      }
      sum += std::sqrt(d2);
    }
  return sum / (static_cast<double>(pred.frames - 2) * pred.joints);
}

double pck(const PoseSequence& pred, const PoseSequence& gt, double alpha) {
  check_shapes(pred, gt);
  if (pred.dims != 2) throw std::invalid_argument("pck: defined for 2D poses only");
  if (gt.bbox.size() != static_cast<std::size_t>(gt.frames))
    throw std::invalid_argument("pck: ground truth has no per-frame bbox sizes");
  long correct = 0;
  for (int t = 0; t < pred.frames; ++t) {
    if (gt.bbox[t] <= 0.0)
      throw std::invalid_argument("pck: non-positive bbox at frame " + std::to_string(t));
    const double thr = alpha * gt.bbox[t];
    for (int k = 0; k < pred.joints; ++k) {
      const double dx = pred.at(t, k, 0) - gt.at(t, k, 0);
      const double dy = pred.at(t, k, 1) - gt.at(t, k, 1);
      if (std::sqrt(dx * dx + dy * dy) <= thr) ++correct;
    }
  }
  return 100.0 * correct / (static_cast<double>(pred.frames) * pred.joints);
}

FlopsBreakdown flops_model(double f_E, double f_D, double f_R, int N) {
  if (N < 1) throw std::invalid_argument("flops_model: N must be >= 1, got " + std::to_string(N));
  if (f_E < 0.0 || f_D < 0.0 || f_R < 0.0)
    throw std::invalid_argument("flops_model: per-frame FLOPs must be >= 0");
  FlopsBreakdown b;
  b.estimator_term = f_E / N;
  b.denoise_term = f_D;
  b.recover_term = f_R;
  b.total = b.estimator_term + f_D + f_R;
  return b;
}

const char* kMetricsCsvHeader = "method,ratio,N,mpjpe,accel,pck@0.2,pck@0.1,pck@0.05,flops_G";

std::string metrics_csv_row(const MetricsReport& r) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  auto pck_at = [&](double a) {
    auto it = r.pck.find(a);
    return it == r.pck.end() ? std::string("n/a") : num(it->second);
  };
  return r.method + "," + num(r.ratio) + "," + std::to_string(r.N) + "," + num(r.mpjpe) + "," +
         num(r.accel) + "," + pck_at(0.2) + "," + pck_at(0.1) + "," + pck_at(0.05) + "," +
         num(r.flops_g);
}

MetricsReport evaluate(const std::string& method, const PoseSequence& pred,
                       const PoseSequence& gt, double ratio, int N, double flops_g) {
  MetricsReport r;
  r.method = method;
  r.ratio = ratio;
  r.N = N;
  r.frames = pred.frames;
  r.mpjpe = mpjpe(pred, gt);
  r.accel = pred.frames >= 3 ? accel_error(pred, gt) : 0.0;
  if (pred.dims == 2 && gt.bbox.size() == static_cast<std::size_t>(gt.frames))
    for (double a : {0.2, 0.1, 0.05}) r.pck[a] = pck(pred, gt, a);
  r.flops_g = flops_g;
  return r;
}

}  // namespace deciwatch
