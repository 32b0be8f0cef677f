#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnir/tensor.hpp"

namespace cnir {

// Per-tensor squared-gradient accumulators; steps ASCEND the objective
// (REINFORCE maximizes expected reward).
class Adagrad {
 public:
  explicit Adagrad(double epsilon = 1e-8) : eps_(epsilon) {}

  void step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
            double learning_rate) {
    for (std::size_t t = 0; t < params.size(); ++t) {
      auto& acc = acc_[params[t].name];
      if (acc.size() != params[t].size) acc.assign(params[t].size, 0.0);
      for (std::size_t i = 0; i < params[t].size; ++i) {
        double g = grads[t].data[i];
        acc[i] += g * g;
        params[t].data[i] += learning_rate * g / (std::sqrt(acc[i]) + eps_);
      }
    }
  }

 private:
  double eps_;
  std::unordered_map<std::string, std::vector<double>> acc_;
};

// Adam with bias correction; steps DESCEND the loss.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
            double learning_rate) {
    ++t_;
    double c1 = 1.0 - std::pow(beta1_, t_);
    double c2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t t = 0; t < params.size(); ++t) {
      auto& s = state_[params[t].name];
      if (s.m.size() != params[t].size) {
        s.m.assign(params[t].size, 0.0);
        s.v.assign(params[t].size, 0.0);
      }
      for (std::size_t i = 0; i < params[t].size; ++i) {
        double g = grads[t].data[i];
        s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
        s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
        double mhat = s.m[i] / c1;
        double vhat = s.v[i] / c2;
        params[t].data[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<std::string, Moments> state_;
};

inline void check_finite(const std::vector<TensorRef>& grads, const std::string& where) {
  for (const auto& g : grads)
    for (std::size_t i = 0; i < g.size; ++i)
      if (!std::isfinite(g.data[i]))
        throw std::runtime_error(where + ": non-finite gradient in tensor '" + g.name + "'");
}

// FNV-1a over the parameter bytes; used to assert freeze invariants.
inline uint64_t fingerprint(const std::vector<TensorRef>& params) {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p.size; ++i) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(&p.data[i]);
      for (std::size_t b = 0; b < sizeof(double); ++b) {
        h ^= bytes[b];
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

}  // namespace cnir
