#pragma once

// Test-only straight-line re-implementations, kept independent of the graph
// path they are used to check.

#include <functional>
#include <string>

#include "deciwatch/model.hpp"

namespace deciwatch::testing {

struct OracleOutput {
  Array2 clean;
  Array2 features;
  Array2 preliminary;
  Array2 recovered;
};

// Plain-loop forward pass of the full denoise + recover pipeline, reading
// parameters directly from the store (no autodiff graph).
OracleOutput oracle_pipeline(const Model& m, const Array2& noisy_sampled);

// Central finite difference of scalar_fn w.r.t. one parameter element.
double central_difference(Model& m, const std::string& param, int index,
                          const std::function<double(const Model&)>& scalar_fn, double h);

// rel-err with an absolute floor for near-zero gradients
inline bool grad_close(double a, double b, double rel = 1e-4, double abs_tol = 1e-7) {
  const double d = std::abs(a - b);
  return d <= abs_tol || d <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace deciwatch::testing
