#pragma once

#include <map>
#include <string>
#include <vector>

#include "deciwatch/pose.hpp"

namespace deciwatch {

// Mean over frames and joints of the per-joint Euclidean distance.
double mpjpe(const PoseSequence& pred, const PoseSequence& gt);

// Mean over interior frames and joints of || accel(pred) - accel(gt) ||,
// where accel is the per-joint second temporal difference.
double accel_error(const PoseSequence& pred, const PoseSequence& gt);

// Percentage of joints within alpha * bbox_size of ground truth (2D only;
// bbox comes from gt.bbox).
double pck(const PoseSequence& pred, const PoseSequence& gt, double alpha);

struct FlopsBreakdown {
  double estimator_term = 0.0;  // f_E / N
  double denoise_term = 0.0;
  double recover_term = 0.0;
  double total = 0.0;
};

// Per-frame cost: f_E/N + f_D + f_R, all in giga-MACs.
FlopsBreakdown flops_model(double f_E, double f_D, double f_R, int N);

struct MetricsReport {
  std::string method;
  double ratio = 0.0;
  int N = 0;
  double mpjpe = 0.0;
  double accel = 0.0;
  std::map<double, double, std::greater<double>> pck;  // alpha -> percent
  double flops_g = 0.0;
  int frames = 0;
};

extern const char* kMetricsCsvHeader;
std::string metrics_csv_row(const MetricsReport& r);

MetricsReport evaluate(const std::string& method, const PoseSequence& pred,
                       const PoseSequence& gt, double ratio, int N, double flops_g);

}  // namespace deciwatch
