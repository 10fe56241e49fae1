#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "simgc/core/dense.hpp"
#include "simgc/core/error.hpp"

namespace simgc::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

template <class T>
struct AdamState {
  AdamConfig config;
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// Adam with bias correction. Moments are created on the first call from the
/// parameter shapes and must keep those shapes afterwards.
template <class T>
void adam_step(std::span<Matrix<T>* const> params, std::span<const Matrix<T>* const> grads, AdamState<T>& state) {
  require(params.size() == grads.size(), "adam_step: ", params.size(), " params but ", grads.size(), " grads");
  if (state.m.empty()) {
    for (const Matrix<T>* p : params) {
      state.m.push_back(Matrix<T>::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix<T>::Zero(p->rows(), p->cols()));
    }
  }
  require(state.m.size() == params.size(), "adam_step: state tracks ", state.m.size(), " params, got ",
          params.size());
  const AdamConfig& c = state.config;
  ++state.step;
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(c.beta1, static_cast<double>(state.step)));
  const T corr2 = static_cast<T>(1.0 - std::pow(c.beta2, static_cast<double>(state.step)));
  const T lr = static_cast<T>(c.lr);
  const T eps = static_cast<T>(c.eps);
  const T wd = static_cast<T>(c.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix<T>& p = *params[i];
    const Matrix<T>& g0 = *grads[i];
    require(g0.rows() == p.rows() && g0.cols() == p.cols() && state.m[i].rows() == p.rows() &&
                state.m[i].cols() == p.cols(),
            "adam_step: shape mismatch for parameter ", i);
    Matrix<T> g = wd != T(0) ? Matrix<T>(g0 + wd * p) : g0;
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g.cwiseProduct(g);
    p.array() -= lr * (state.m[i].array() / corr1) / ((state.v[i].array() / corr2).sqrt() + eps);
  }
}

/// Plain gradient descent, kept as a fallback to Adam.
template <class T>
void sgd_step(std::span<Matrix<T>* const> params, std::span<const Matrix<T>* const> grads, double lr,
              double weight_decay = 0.0) {
  require(params.size() == grads.size(), "sgd_step: ", params.size(), " params but ", grads.size(), " grads");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix<T>& p = *params[i];
    p -= static_cast<T>(lr) * (*grads[i] + static_cast<T>(weight_decay) * p);
  }
}

enum class OptimizerKind { adam, sgd };

/// One parameter group with its own optimizer state.
template <class T>
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, AdamConfig cfg) : kind_(kind), adam_(cfg) {}

  void step(std::span<Matrix<T>* const> params, std::span<const Matrix<T>* const> grads) {
    if (kind_ == OptimizerKind::adam) adam_step(params, grads, adam_);
    else sgd_step(params, grads, adam_.config.lr, adam_.config.weight_decay);
  }

  const AdamState<T>& state() const noexcept { return adam_; }

 private:
  OptimizerKind kind_ = OptimizerKind::adam;
  AdamState<T> adam_;
};

}  // namespace simgc::ad
