#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cnir/rng.hpp"

namespace cnir {

// Dense row-major matrix of doubles. Small models only; no BLAS behind it.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }

  void fill(double v) { a.assign(a.size(), v); }

  void fill_uniform(Rng& rng, double lo, double hi) {
    for (double& x : a) x = rng.uniform(lo, hi);
  }
};

// Named view over one parameter tensor; lets optimizers, checkpoints and
// finite-difference checks walk a model generically.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
};

inline TensorRef ref(const std::string& name, Matrix& m) {
  return {name, m.a.data(), m.a.size()};
}
inline TensorRef ref(const std::string& name, std::vector<double>& v) {
  return {name, v.data(), v.size()};
}
inline TensorRef ref(const std::string& name, double& s) { return {name, &s, 1}; }

}  // namespace cnir
