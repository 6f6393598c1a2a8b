#include "deciwatch/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deciwatch {

InterpMethod parse_interp(const std::string& name) {
  if (name == "nearest") return InterpMethod::Nearest;
  if (name == "linear") return InterpMethod::Linear;
  if (name == "quadratic") return InterpMethod::Quadratic;
  if (name == "cubic") return InterpMethod::CubicSpline;
  throw std::invalid_argument("unknown interpolation method: " + name);
}

std::string interp_name(InterpMethod m) {
  switch (m) {
    case InterpMethod::Nearest: return "nearest";
    case InterpMethod::Linear: return "linear";
    case InterpMethod::Quadratic: return "quadratic";
    case InterpMethod::CubicSpline: return "cubic";
  }
  return "?";
}

namespace {

void check_series(const SparseSeries& s) {
  if (s.positions.empty()) throw std::invalid_argument("interp: empty sample set");
  if (static_cast<int>(s.positions.size()) != s.values.rows)
    throw std::invalid_argument("interp: positions/values row mismatch");
  for (std::size_t i = 1; i < s.positions.size(); ++i)
    if (s.positions[i] <= s.positions[i - 1])
      throw std::invalid_argument("interp: positions must be strictly increasing");
}

// index of the sample position nearest t, ties toward the earlier one
int nearest_index(const std::vector<int>& pos, double t) {
  int best = 0;
  double bestd = std::fabs(t - pos[0]);
  for (std::size_t i = 1; i < pos.size(); ++i) {
    const double d = std::fabs(t - pos[i]);
    if (d < bestd) {
      bestd = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// segment index j with pos[j] <= t <= pos[j+1], clamped to valid range
int segment_index(const std::vector<int>& pos, double t) {
  int j = static_cast<int>(std::upper_bound(pos.begin(), pos.end(), t) - pos.begin()) - 1;
  return std::clamp(j, 0, static_cast<int>(pos.size()) - 2);
}

}  // namespace

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), a_(std::move(y)) {
  const int n = static_cast<int>(x_.size()) - 1;
  if (n < 1) throw std::invalid_argument("NaturalCubicSpline: need >= 2 knots");
  b_.assign(n, 0.0);
  c_.assign(n + 1, 0.0);
  d_.assign(n, 0.0);
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) h[i] = x_[i + 1] - x_[i];
  // tridiagonal system for the second-derivative coefficients c
  std::vector<double> alpha(n, 0.0), l(n + 1, 0.0), mu(n + 1, 0.0), z(n + 1, 0.0);
  for (int i = 1; i < n; ++i)
    alpha[i] = 3.0 * (a_[i + 1] - a_[i]) / h[i] - 3.0 * (a_[i] - a_[i - 1]) / h[i - 1];
  l[0] = 1.0;
  for (int i = 1; i < n; ++i) {
    l[i] = 2.0 * (x_[i + 1] - x_[i - 1]) - h[i - 1] * mu[i - 1];
    mu[i] = h[i] / l[i];
    z[i] = (alpha[i] - h[i - 1] * z[i - 1]) / l[i];
  }
  l[n] = 1.0;
  for (int j = n - 1; j >= 0; --j) {
    c_[j] = z[j] - mu[j] * c_[j + 1];
    b_[j] = (a_[j + 1] - a_[j]) / h[j] - h[j] * (c_[j + 1] + 2.0 * c_[j]) / 3.0;
    d_[j] = (c_[j + 1] - c_[j]) / (3.0 * h[j]);
  }
}

double NaturalCubicSpline::eval(double t) const {
  const int n = static_cast<int>(b_.size());
  int j = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
  j = std::clamp(j, 0, n - 1);
  const double dx = t - x_[j];
  return a_[j] + dx * (b_[j] + dx * (c_[j] + dx * d_[j]));
}

double NaturalCubicSpline::second_derivative(double t) const {
  const int n = static_cast<int>(b_.size());
  int j = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
  j = std::clamp(j, 0, n - 1);
  const double dx = t - x_[j];
  return 2.0 * c_[j] + 6.0 * d_[j] * dx;
}

std::vector<double> interp_at(const SparseSeries& s, InterpMethod method, double t) {
  check_series(s);
  const int dim = s.values.cols;
  const int n = static_cast<int>(s.positions.size());
  std::vector<double> out(dim, 0.0);

  switch (method) {
    case InterpMethod::Nearest: {
      const int i = nearest_index(s.positions, t);
      for (int d = 0; d < dim; ++d) out[d] = s.values.at(i, d);
      return out;
    }
    case InterpMethod::Linear: {
      if (n < 2) throw std::invalid_argument("interp_linear: need >= 2 samples");
      if (t < s.positions.front() || t > s.positions.back())
        throw std::out_of_range("interp_linear: t=" + std::to_string(t) + " outside [" +
                                std::to_string(s.positions.front()) + "," +
                                std::to_string(s.positions.back()) + "]");
      const int j = segment_index(s.positions, t);
      const double w =
          (t - s.positions[j]) / static_cast<double>(s.positions[j + 1] - s.positions[j]);
      for (int d = 0; d < dim; ++d)
        out[d] = (1.0 - w) * s.values.at(j, d) + w * s.values.at(j + 1, d);
      return out;
    }
    case InterpMethod::Quadratic: {
      if (n < 3) throw std::invalid_argument("interp_quadratic: need >= 3 samples, got " +
                                             std::to_string(n));
      // Lagrange triple whose middle knot is nearest to t.
      int mid = nearest_index(s.positions, t);
      mid = std::clamp(mid, 1, n - 2);
      const double x0 = s.positions[mid - 1], x1 = s.positions[mid], x2 = s.positions[mid + 1];
      const double l0 = (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2));
      const double l1 = (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2));
      const double l2 = (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
      for (int d = 0; d < dim; ++d)
        out[d] = l0 * s.values.at(mid - 1, d) + l1 * s.values.at(mid, d) +
                 l2 * s.values.at(mid + 1, d);
      return out;
    }
    case InterpMethod::CubicSpline: {
      if (n < 2) throw std::invalid_argument("interp_cubic: need >= 2 samples");
      std::vector<double> x(s.positions.begin(), s.positions.end());
      for (int d = 0; d < dim; ++d) {
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) y[i] = s.values.at(i, d);
        out[d] = NaturalCubicSpline(x, std::move(y)).eval(t);
      }
      return out;
    }
  }
  throw std::invalid_argument("interp_at: bad method");
}

Array2 densify(const SparseSeries& s, InterpMethod method, int window_length) {
  check_series(s);
  if (s.positions.front() != 0 || s.positions.back() != window_length - 1)
    throw std::invalid_argument("densify: first/last frames must be sampled (have " +
                                std::to_string(s.positions.front()) + ".." +
                                std::to_string(s.positions.back()) + ", window " +
                                std::to_string(window_length) + ")");
  const int dim = s.values.cols;
  Array2 out(window_length, dim);

  if (method == InterpMethod::CubicSpline && s.positions.size() >= 2) {
    // fit each coordinate once, then evaluate every frame
    std::vector<double> x(s.positions.begin(), s.positions.end());
    for (int d = 0; d < dim; ++d) {
      std::vector<double> y(s.positions.size());
      for (std::size_t i = 0; i < s.positions.size(); ++i) y[i] = s.values.at(i, d);
      NaturalCubicSpline sp(x, std::move(y));
      for (int t = 0; t < window_length; ++t) out.at(t, d) = sp.eval(t);
    }
  } else {
    for (int t = 0; t < window_length; ++t) {
      auto v = interp_at(s, method, t);
      for (int d = 0; d < dim; ++d) out.at(t, d) = v[d];
    }
  }
  // exact at sampled positions
  for (std::size_t i = 0; i < s.positions.size(); ++i)
    for (int d = 0; d < dim; ++d) out.at(s.positions[i], d) = s.values.at(i, d);
  return out;
}

Array2 linear_upsample_weights(const std::vector<int>& positions, int window_length) {
  if (positions.size() < 2 || positions.front() != 0 || positions.back() != window_length - 1)
    throw std::invalid_argument("linear_upsample_weights: endpoints must be sampled");
  Array2 w(window_length, static_cast<int>(positions.size()));
  for (int t = 0; t < window_length; ++t) {
    const int j = segment_index(positions, t);
    const double f =
        (t - positions[j]) / static_cast<double>(positions[j + 1] - positions[j]);
    w.at(t, j) = 1.0 - f;
    w.at(t, j + 1) += f;
  }
  return w;
}

}  // namespace deciwatch
