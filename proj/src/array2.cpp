#include "deciwatch/array2.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace deciwatch {

namespace macs {
namespace {
thread_local std::uint64_t g_counter = 0;
}
void reset() { g_counter = 0; }
std::uint64_t count() { return g_counter; }
void add(std::uint64_t n) { g_counter += n; }
}  // namespace macs

Array2::Array2(int r, int c, double fill)
    : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
  if (r < 0 || c < 0) throw std::invalid_argument("Array2: negative shape");
}

std::string Array2::shape_str() const {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

bool Array2::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Array2::fill(double v) { std::fill(data.begin(), data.end(), v); }

Array2 matmul(const Array2& a, const Array2& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
  Array2 out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    double* orow = &out.data[static_cast<std::size_t>(i) * b.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = &b.data[static_cast<std::size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  macs::add(static_cast<std::uint64_t>(a.rows) * a.cols * b.cols);
  return out;
}

Array2 transpose(const Array2& a) {
  Array2 out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Array2 add(const Array2& a, const Array2& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Array2 out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Array2 sub(const Array2& a, const Array2& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  Array2 out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

Array2 scale(const Array2& a, double s) {
  Array2 out = a;
  for (double& v : out.data) v *= s;
  return out;
}

Array2 identity(int n) {
  Array2 out(n, n);
  for (int i = 0; i < n; ++i) out.at(i, i) = 1.0;
  return out;
}

double max_abs_diff(const Array2& a, const Array2& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("max_abs_diff: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

Array2 xavier_uniform(int rows, int cols, int fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(3.0 / std::max(1, fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Array2 out(rows, cols);
  for (double& v : out.data) v = dist(rng);
  return out;
}

Array2 gaussian(int rows, int cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Array2 out(rows, cols);
  for (double& v : out.data) v = dist(rng);
  return out;
}

}  // namespace deciwatch
