#pragma once

#include <string>
#include <vector>

#include "deciwatch/array2.hpp"

namespace deciwatch {

enum class InterpMethod { Nearest, Linear, Quadratic, CubicSpline };

InterpMethod parse_interp(const std::string& name);
std::string interp_name(InterpMethod m);

// Sparse samples of a vector-valued series: values row i corresponds to
// frame positions[i]. Positions are strictly increasing.
struct SparseSeries {
  std::vector<int> positions;
  Array2 values;  // positions.size() x dim
};

// Natural cubic spline through scalar knots (zero second derivative at both
// boundary knots, C2 at interior knots).
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);
  double eval(double t) const;
  double second_derivative(double t) const;

 private:
  std::vector<double> x_, a_, b_, c_, d_;
};

// Evaluate one method at frame t; returns a dim-sized vector.
std::vector<double> interp_at(const SparseSeries& s, InterpMethod method, double t);

// Full-window densification: window_length x dim matrix that matches the
// samples exactly at every sampled position.
Array2 densify(const SparseSeries& s, InterpMethod method, int window_length);

// Exact piecewise-linear upsampling weights: window_length x |positions|
// row-stochastic matrix mapping sampled frames to all frames.
Array2 linear_upsample_weights(const std::vector<int>& positions, int window_length);

}  // namespace deciwatch
