#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "simgc/core/dense.hpp"
#include "simgc/core/error.hpp"

namespace simgc::ad {

template <class T>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid until the tape
/// is cleared.
template <class T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Matrix<T>& value() const { return tape_->value(id_); }
  const Matrix<T>& grad() const { return tape_->grad(id_); }
  bool requires_grad() const { return tape_->requires_grad(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

  /// Value of a 1x1 node.
  T scalar() const {
    require(rows() == 1 && cols() == 1, "scalar() on a ", rows(), "x", cols(), " node");
    return value()(0, 0);
  }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Linear record of operations. `backward` walks the record in exact reverse
/// order and accumulates gradients additively into every node that requires
/// them.
template <class T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value) { return push(std::move(value), false, {}, "constant"); }
  Var<T> variable(Matrix<T> value) { return push(std::move(value), true, {}, "variable"); }

  /// Records an op output. It requires grad iff any input does; `backward`
  /// is dropped otherwise.
  Var<T> record(Matrix<T> value, std::initializer_list<Var<T>> inputs, Backward backward, const char* op) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || requires_grad(v.id());
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{}, op);
  }
  Var<T> record(Matrix<T> value, const std::vector<Var<T>>& inputs, Backward backward, const char* op) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || requires_grad(v.id());
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{}, op);
  }

  const Matrix<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  /// Gradient of `id`; a zero matrix of the value's shape until something flows in.
  const Matrix<T>& grad(std::size_t id) const {
    Node& n = const_cast<Node&>(nodes_.at(id));
    ensure_grad(n);
    return n.grad;
  }

  /// grad(v) += delta, skipped when v does not require grad.
  template <class Expr>
  void accumulate(const Var<T>& v, const Expr& delta) {
    Node& n = nodes_.at(v.id());
    if (!n.requires_grad) return;
    ensure_grad(n);
    n.grad += delta;
  }

  /// Mutable access for ops whose backward scatters into rows.
  Matrix<T>* grad_for_update(const Var<T>& v) {
    Node& n = nodes_.at(v.id());
    if (!n.requires_grad) return nullptr;
    ensure_grad(n);
    return &n.grad;
  }

  const Matrix<T>& upstream(std::size_t self) const { return grad(self); }

  /// Seeds d(root)/d(root) = 1 and runs every recorded backward rule in reverse.
  void backward(const Var<T>& root) {
    require(root.rows() == 1 && root.cols() == 1, "backward: root must be 1x1, got ", root.rows(), "x",
            root.cols());
    for (auto& n : nodes_) {
      if (n.requires_grad && n.grad.size() != 0) n.grad.setZero();
    }
    Node& r = nodes_.at(root.id());
    if (!r.requires_grad) return;
    ensure_grad(r);
    r.grad(0, 0) = T(1);
    for (std::size_t i = root.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, i);
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// When on, every recorded value is checked for NaN/Inf. Defaults to on in
  /// debug builds.
  static bool& trap_non_finite() {
#ifdef NDEBUG
    static bool on = false;
#else
    static bool on = true;
#endif
    return on;
  }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool requires_grad = false;
    Backward backward;
  };

  static void ensure_grad(Node& n) {
    if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols())
      n.grad = Matrix<T>::Zero(n.value.rows(), n.value.cols());
  }

  Var<T> push(Matrix<T> value, bool requires_grad, Backward backward, const char* op) {
    if (trap_non_finite() && !value.allFinite())
      throw NumericError(std::string("non-finite value produced by ") + op);
    nodes_.push_back(Node{std::move(value), Matrix<T>{}, requires_grad, std::move(backward)});
    return Var<T>(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace simgc::ad
