#include "deciwatch/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace deciwatch {

namespace {

NodePtr make_op(Array2 v, std::vector<NodePtr> parents, std::function<void(Node&)> bp) {
  auto n = std::make_shared<Node>(std::move(v));
  n->parents = std::move(parents);
  n->backprop = std::move(bp);
  return n;
}

void accum(Node& n, const Array2& g) {
  if (!n.requires_grad && n.parents.empty()) return;
  for (std::size_t i = 0; i < n.grad.data.size(); ++i) n.grad.data[i] += g.data[i];
}

}  // namespace

NodePtr make_leaf(Array2 v) { return std::make_shared<Node>(std::move(v)); }

NodePtr make_constant(Array2 v) { return std::make_shared<Node>(std::move(v), false); }

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  Array2 v = matmul(a->value, b->value);
  return make_op(std::move(v), {a, b}, [](Node& n) {
    const Array2& g = n.grad;
    accum(*n.parents[0], matmul(g, transpose(n.parents[1]->value)));
    accum(*n.parents[1], matmul(transpose(n.parents[0]->value), g));
  });
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  Array2 v = add(a->value, b->value);
  return make_op(std::move(v), {a, b}, [](Node& n) {
    accum(*n.parents[0], n.grad);
    accum(*n.parents[1], n.grad);
  });
}

NodePtr add_rowvec(const NodePtr& a, const NodePtr& row) {
  if (row->value.rows != 1 || row->value.cols != a->value.cols)
    throw std::invalid_argument("add_rowvec: shape mismatch " + a->value.shape_str() + " + " +
                                row->value.shape_str());
  Array2 v = a->value;
  for (int i = 0; i < v.rows; ++i)
    for (int j = 0; j < v.cols; ++j) v.at(i, j) += row->value.at(0, j);
  return make_op(std::move(v), {a, row}, [](Node& n) {
    accum(*n.parents[0], n.grad);
    Array2 rg(1, n.grad.cols);
    for (int i = 0; i < n.grad.rows; ++i)
      for (int j = 0; j < n.grad.cols; ++j) rg.at(0, j) += n.grad.at(i, j);
    accum(*n.parents[1], rg);
  });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  Array2 v = sub(a->value, b->value);
  return make_op(std::move(v), {a, b}, [](Node& n) {
    accum(*n.parents[0], n.grad);
    accum(*n.parents[1], scale(n.grad, -1.0));
  });
}

NodePtr scale(const NodePtr& a, double s) {
  Array2 v = scale(a->value, s);
  return make_op(std::move(v), {a}, [s](Node& n) { accum(*n.parents[0], scale(n.grad, s)); });
}

NodePtr relu(const NodePtr& a) {
  Array2 v = a->value;
  for (double& x : v.data) x = std::max(0.0, x);
  return make_op(std::move(v), {a}, [](Node& n) {
    Array2 g = n.grad;
    const Array2& x = n.parents[0]->value;
    for (std::size_t i = 0; i < g.data.size(); ++i)
      if (x.data[i] <= 0.0) g.data[i] = 0.0;
    accum(*n.parents[0], g);
  });
}

NodePtr square(const NodePtr& a) {
  Array2 v = a->value;
  for (double& x : v.data) x *= x;
  return make_op(std::move(v), {a}, [](Node& n) {
    Array2 g = n.grad;
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] *= 2.0 * n.parents[0]->value.data[i];
    accum(*n.parents[0], g);
  });
}

NodePtr transpose(const NodePtr& a) {
  Array2 v = transpose(a->value);
  return make_op(std::move(v), {a}, [](Node& n) { accum(*n.parents[0], transpose(n.grad)); });
}

NodePtr softmax_rows(const NodePtr& a) {
  Array2 v = a->value;
  for (int i = 0; i < v.rows; ++i) {
    double m = v.at(i, 0);
    for (int j = 1; j < v.cols; ++j) m = std::max(m, v.at(i, j));
    double s = 0.0;
    for (int j = 0; j < v.cols; ++j) {
      v.at(i, j) = std::exp(v.at(i, j) - m);
      s += v.at(i, j);
    }
    for (int j = 0; j < v.cols; ++j) v.at(i, j) /= s;
  }
  return make_op(std::move(v), {a}, [](Node& n) {
    const Array2& y = n.value;
    Array2 g(y.rows, y.cols);
    for (int i = 0; i < y.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < y.cols; ++j) dot += n.grad.at(i, j) * y.at(i, j);
      for (int j = 0; j < y.cols; ++j) g.at(i, j) = y.at(i, j) * (n.grad.at(i, j) - dot);
    }
    accum(*n.parents[0], g);
  });
}

NodePtr layer_norm(const NodePtr& a, const NodePtr& gain, const NodePtr& bias, double eps) {
  const Array2& x = a->value;
  if (gain->value.cols != x.cols || bias->value.cols != x.cols || gain->value.rows != 1 ||
      bias->value.rows != 1)
    throw std::invalid_argument("layer_norm: gain/bias must be 1x" + std::to_string(x.cols));
  Array2 v(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i) {
    double mu = 0.0;
    for (int j = 0; j < x.cols; ++j) mu += x.at(i, j);
    mu /= x.cols;
    double var = 0.0;
    for (int j = 0; j < x.cols; ++j) {
      double d = x.at(i, j) - mu;
      var += d * d;
    }
    var /= x.cols;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < x.cols; ++j)
      v.at(i, j) = (x.at(i, j) - mu) * inv * gain->value.at(0, j) + bias->value.at(0, j);
  }
  macs::add(2ull * x.rows * x.cols);
  return make_op(std::move(v), {a, gain, bias}, [eps](Node& n) {
    const Array2& x = n.parents[0]->value;
    const Array2& gn = n.parents[1]->value;
    const int cols = x.cols;
    Array2 dx(x.rows, x.cols);
    Array2 dgain(1, cols);
    Array2 dbias(1, cols);
    for (int i = 0; i < x.rows; ++i) {
      double mu = 0.0;
      for (int j = 0; j < cols; ++j) mu += x.at(i, j);
      mu /= cols;
      double var = 0.0;
      for (int j = 0; j < cols; ++j) {
        double d = x.at(i, j) - mu;
        var += d * d;
      }
      var /= cols;
      const double inv = 1.0 / std::sqrt(var + eps);
      // xhat-space gradient, then project out the mean and xhat components
      double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
      std::vector<double> xhat(cols), dxhat(cols);
      for (int j = 0; j < cols; ++j) {
        xhat[j] = (x.at(i, j) - mu) * inv;
        dxhat[j] = n.grad.at(i, j) * gn.at(0, j);
        mean_dxhat += dxhat[j];
        mean_dxhat_xhat += dxhat[j] * xhat[j];
        dgain.at(0, j) += n.grad.at(i, j) * xhat[j];
        dbias.at(0, j) += n.grad.at(i, j);
      }
      mean_dxhat /= cols;
      mean_dxhat_xhat /= cols;
      for (int j = 0; j < cols; ++j)
        dx.at(i, j) = inv * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
    }
    accum(*n.parents[0], dx);
    accum(*n.parents[1], dgain);
    accum(*n.parents[2], dbias);
  });
}

NodePtr slice_cols(const NodePtr& a, int c0, int c1) {
  if (c0 < 0 || c1 > a->value.cols || c0 >= c1)
    throw std::invalid_argument("slice_cols: bad range");
  Array2 v(a->value.rows, c1 - c0);
  for (int i = 0; i < v.rows; ++i)
    for (int j = 0; j < v.cols; ++j) v.at(i, j) = a->value.at(i, c0 + j);
  return make_op(std::move(v), {a}, [c0](Node& n) {
    Array2 g(n.parents[0]->value.rows, n.parents[0]->value.cols);
    for (int i = 0; i < n.grad.rows; ++i)
      for (int j = 0; j < n.grad.cols; ++j) g.at(i, c0 + j) = n.grad.at(i, j);
    accum(*n.parents[0], g);
  });
}

NodePtr concat_cols(const std::vector<NodePtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  int cols = 0;
  const int rows = parts[0]->value.rows;
  for (const auto& p : parts) {
    if (p->value.rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p->value.cols;
  }
  Array2 v(rows, cols);
  int off = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < p->value.cols; ++j) v.at(i, off + j) = p->value.at(i, j);
    off += p->value.cols;
  }
  return make_op(std::move(v), parts, [](Node& n) {
    int off = 0;
    for (auto& p : n.parents) {
      Array2 g(p->value.rows, p->value.cols);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) g.at(i, j) = n.grad.at(i, off + j);
      accum(*p, g);
      off += p->value.cols;
    }
  });
}

NodePtr conv1d_temporal(const NodePtr& x, const NodePtr& kernel, int kernel_size) {
  if (kernel_size % 2 == 0 || kernel_size < 1)
    throw std::invalid_argument("conv1d_temporal: kernel_size must be odd, got " +
                                std::to_string(kernel_size));
  const int in_dim = x->value.cols;
  if (kernel->value.rows != kernel_size * in_dim)
    throw std::invalid_argument("conv1d_temporal: kernel rows " +
                                std::to_string(kernel->value.rows) + " != kernel_size*in_dim " +
                                std::to_string(kernel_size * in_dim));
  const int len = x->value.rows;
  const int out_dim = kernel->value.cols;
  const int ctr = kernel_size / 2;
  Array2 v(len, out_dim);
  for (int t = 0; t < len; ++t)
    for (int o = 0; o < kernel_size; ++o) {
      const int src = t + o - ctr;
      if (src < 0 || src >= len) continue;  // zero padding
      for (int i = 0; i < in_dim; ++i) {
        const double xv = x->value.at(src, i);
        if (xv == 0.0) continue;
        for (int j = 0; j < out_dim; ++j) v.at(t, j) += xv * kernel->value.at(o * in_dim + i, j);
      }
    }
  macs::add(static_cast<std::uint64_t>(len) * kernel_size * in_dim * out_dim);
  return make_op(std::move(v), {x, kernel}, [kernel_size, ctr](Node& n) {
    Node& xn = *n.parents[0];
    Node& kn = *n.parents[1];
    const int len = xn.value.rows;
    const int in_dim = xn.value.cols;
    const int out_dim = kn.value.cols;
    Array2 dx(len, in_dim);
    Array2 dk(kn.value.rows, kn.value.cols);
    for (int t = 0; t < len; ++t)
      for (int o = 0; o < kernel_size; ++o) {
        const int src = t + o - ctr;
        if (src < 0 || src >= len) continue;
        for (int i = 0; i < in_dim; ++i)
          for (int j = 0; j < out_dim; ++j) {
            dx.at(src, i) += n.grad.at(t, j) * kn.value.at(o * in_dim + i, j);
            dk.at(o * in_dim + i, j) += n.grad.at(t, j) * xn.value.at(src, i);
          }
      }
    accum(xn, dx);
    accum(kn, dk);
  });
}

NodePtr dropout(const NodePtr& a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout: rate must be < 1");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Array2 mask(a->value.rows, a->value.cols);
  const double keep = 1.0 - rate;
  for (double& m : mask.data) m = (u(rng) < keep) ? 1.0 / keep : 0.0;
  Array2 v = a->value;
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] *= mask.data[i];
  return make_op(std::move(v), {a}, [mask](Node& n) {
    Array2 g = n.grad;
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] *= mask.data[i];
    accum(*n.parents[0], g);
  });
}

NodePtr l1_mean(const NodePtr& pred, const Array2& target) {
  if (!pred->value.same_shape(target))
    throw std::invalid_argument("l1_mean: shape mismatch " + pred->value.shape_str() + " vs " +
                                target.shape_str());
  double s = 0.0;
  for (std::size_t i = 0; i < target.data.size(); ++i)
    s += std::fabs(pred->value.data[i] - target.data[i]);
  const double nel = static_cast<double>(target.data.size());
  Array2 v(1, 1);
  v.at(0, 0) = s / nel;
  return make_op(std::move(v), {pred}, [target, nel](Node& n) {
    const double g = n.grad.at(0, 0) / nel;
    Array2 dp(n.parents[0]->value.rows, n.parents[0]->value.cols);
    for (std::size_t i = 0; i < dp.data.size(); ++i) {
      const double d = n.parents[0]->value.data[i] - target.data[i];
      dp.data[i] = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
    }
    accum(*n.parents[0], dp);
  });
}

NodePtr sum_all(const NodePtr& a) {
  Array2 v(1, 1);
  for (double x : a->value.data) v.at(0, 0) += x;
  return make_op(std::move(v), {a}, [](Node& n) {
    Array2 g(n.parents[0]->value.rows, n.parents[0]->value.cols, n.grad.at(0, 0));
    accum(*n.parents[0], g);
  });
}

void backward(const NodePtr& loss) {
  if (loss->value.rows != 1 || loss->value.cols != 1)
    throw std::invalid_argument("backward: loss must be 1x1, got " + loss->value.shape_str());
  // iterative post-order topological sort
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<NodePtr, std::size_t>> stack;
  stack.emplace_back(loss, 0);
  std::vector<NodePtr> keep;  // hold shared ownership while walking
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx == 0 && seen.count(node.get())) {
      stack.pop_back();
      continue;
    }
    if (idx < node->parents.size()) {
      NodePtr next = node->parents[idx++];
      if (!seen.count(next.get())) stack.emplace_back(std::move(next), 0);
    } else {
      seen.insert(node.get());
      order.push_back(node.get());
      keep.push_back(node);
      stack.pop_back();
    }
  }
  // interior grads are scratch per call; only leaf grads accumulate
  for (Node* n : order)
    if (!n->parents.empty()) n->grad.fill(0.0);
  loss->grad.at(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace deciwatch
