#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace simgc {

/// Row-major dense matrix; rows are nodes throughout the library.
template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using Index = std::uint64_t;
using IndexList = std::vector<Index>;

/// Label id used on disk for nodes without a class.
inline constexpr Index kUnlabeled = ~Index{0};

enum class Precision { f32, f64 };

template <class T>
bool all_finite(const Matrix<T>& m) {
  return m.allFinite();
}

}  // namespace simgc
