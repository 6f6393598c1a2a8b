#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace deciwatch {

// Multiply-accumulate counter used to cross-check the closed-form
// efficiency model against an instrumented forward pass. Counts matmul,
// temporal-conv and layer-norm multiplies only.
namespace macs {
void reset();
std::uint64_t count();
void add(std::uint64_t n);
}  // namespace macs

// Dense row-major matrix of 64-bit floats.
struct Array2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Array2() = default;
  Array2(int r, int c, double fill = 0.0);

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Array2& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const;
  bool all_finite() const;
  void fill(double v);
};

Array2 matmul(const Array2& a, const Array2& b);
Array2 transpose(const Array2& a);
Array2 add(const Array2& a, const Array2& b);
Array2 sub(const Array2& a, const Array2& b);
Array2 scale(const Array2& a, double s);
Array2 identity(int n);

double max_abs_diff(const Array2& a, const Array2& b);

// Uniform init with limit sqrt(3 / fan_in).
Array2 xavier_uniform(int rows, int cols, int fan_in, std::mt19937_64& rng);
Array2 gaussian(int rows, int cols, double stddev, std::mt19937_64& rng);

}  // namespace deciwatch
