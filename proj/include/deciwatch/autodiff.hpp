#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "deciwatch/array2.hpp"

namespace deciwatch {

// Node in the reverse-mode graph. Values are computed eagerly; backward()
// walks the recorded graph once in reverse topological order.
struct Node {
  Array2 value;
  Array2 grad;  // same shape as value, zero until backward()
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // accumulates into parents' grads
  bool requires_grad = true;

  explicit Node(Array2 v, bool req = true)
      : value(std::move(v)), grad(value.rows, value.cols), requires_grad(req) {}
};

using NodePtr = std::shared_ptr<Node>;

NodePtr make_leaf(Array2 v);
NodePtr make_constant(Array2 v);

NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr add(const NodePtr& a, const NodePtr& b);
// Broadcasts a 1 x cols row vector over every row of a.
NodePtr add_rowvec(const NodePtr& a, const NodePtr& row);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double s);
NodePtr relu(const NodePtr& a);
NodePtr square(const NodePtr& a);
NodePtr transpose(const NodePtr& a);
NodePtr softmax_rows(const NodePtr& a);
NodePtr layer_norm(const NodePtr& a, const NodePtr& gain, const NodePtr& bias, double eps);
NodePtr slice_cols(const NodePtr& a, int c0, int c1);
NodePtr concat_cols(const std::vector<NodePtr>& parts);
// x: length x in_dim, kernel: (kernel_size * in_dim) x out_dim, zero padding,
// output length equals input length. kernel_size must be odd.
NodePtr conv1d_temporal(const NodePtr& x, const NodePtr& kernel, int kernel_size);
NodePtr dropout(const NodePtr& a, double rate, std::mt19937_64& rng);
// Scalar (1x1) mean of |pred - target| over all entries.
NodePtr l1_mean(const NodePtr& pred, const Array2& target);
NodePtr sum_all(const NodePtr& a);

// Seeds d(loss)/d(loss)=1 and accumulates gradients into every node that
// requires them. loss must be 1x1; repeated calls accumulate.
void backward(const NodePtr& loss);

}  // namespace deciwatch
