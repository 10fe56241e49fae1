#pragma once

#include <filesystem>

#include "simgc/io/binary.hpp"
#include "simgc/sgc/pretrain.hpp"

namespace simgc::io {

inline constexpr std::string_view kTeacherMagic = "SGCT";

// teacher.bin layout (little-endian):
//   "SGCT" u32 version=1
//   u64 K, u64 d, u64 C, u32 head (0 linear, 1 mlp), u64 hidden
//   u64 tensor_count, then per tensor: u64 rows, u64 cols, rows*cols f32
//   f32 train_accuracy, f32 val_accuracy
//   u64 stats_dim, u64 class_count, then per class:
//     u64 label, u64 count, f32 lambda, stats_dim f32 mean, stats_dim f32 std
//   u64 excluded_count, excluded_count u64 labels

template <class T>
std::vector<std::uint8_t> encode_teacher(const TeacherCache<T>& t) {
  ByteWriter w;
  w.magic(kTeacherMagic);
  w.u32(1);
  w.u64(t.model.depth);
  w.u64(t.model.in_dim());
  w.u64(t.model.out_dim());
  w.u32(t.model.head == HeadKind::linear ? 0 : 1);
  w.u64(t.model.hidden);
  w.u64(t.model.params.size());
  for (const auto& p : t.model.params) {
    w.u64(static_cast<Index>(p.rows()));
    w.u64(static_cast<Index>(p.cols()));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) w.f32(static_cast<float>(p(i, j)));
  }
  w.f32(static_cast<float>(t.train_accuracy));
  w.f32(static_cast<float>(t.val_accuracy));
  w.u64(t.stats.dim);
  w.u64(t.stats.classes.size());
  for (const auto& c : t.stats.classes) {
    w.u64(c.label);
    w.u64(c.count);
    w.f32(static_cast<float>(c.weight));
    for (Eigen::Index i = 0; i < c.mean.cols(); ++i) w.f32(static_cast<float>(c.mean(i)));
    for (Eigen::Index i = 0; i < c.std.cols(); ++i) w.f32(static_cast<float>(c.std(i)));
  }
  w.u64(t.stats.excluded.size());
  for (Index c : t.stats.excluded) w.u64(c);
  return w.take();
}

template <class T>
void save_teacher(const std::filesystem::path& path, const TeacherCache<T>& t) {
  write_file(path, encode_teacher(t));
}

template <class T>
TeacherCache<T> load_teacher(const std::filesystem::path& path) {
  ByteReader r(path.string(), read_file(path));
  r.expect_magic(kTeacherMagic);
  r.expect_version(1);
  TeacherCache<T> t;
  t.model.depth = r.u64();
  const Index d = r.u64();
  const Index c = r.u64();
  const auto head_at = r.offset();
  const std::uint32_t head = r.u32();
  if (head > 1) throw FormatError(path.string(), head_at, "unknown head kind");
  t.model.head = head == 0 ? HeadKind::linear : HeadKind::mlp;
  t.model.hidden = r.u64();
  const Index tensors = r.u64();
  if (tensors != (t.model.head == HeadKind::linear ? 2u : 4u)) r.fail("unexpected head tensor count");
  for (Index k = 0; k < tensors; ++k) {
    const Index rows = r.u64();
    const Index cols = r.u64();
    r.need_records(rows * cols, 4, "head tensor");
    Matrix<T> p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<T>(r.f32());
    t.model.params.push_back(std::move(p));
  }
  if (t.model.in_dim() != d || t.model.out_dim() != c) r.fail("head shape disagrees with header dims");
  t.train_accuracy = r.f32();
  t.val_accuracy = r.f32();
  t.stats.dim = r.u64();
  if (t.stats.dim != d * (t.model.depth + 1)) r.fail("statistics width is not (K+1)*d");
  const Index classes = r.u64();
  r.need_records(classes, 20 + 8 * t.stats.dim, "class statistics");
  for (Index k = 0; k < classes; ++k) {
    ClassStat<T> s;
    s.label = r.u64();
    s.count = r.u64();
    s.weight = static_cast<T>(r.f32());
    s.mean.resize(static_cast<Eigen::Index>(t.stats.dim));
    s.std.resize(static_cast<Eigen::Index>(t.stats.dim));
    for (Index i = 0; i < t.stats.dim; ++i) s.mean(static_cast<Eigen::Index>(i)) = static_cast<T>(r.f32());
    for (Index i = 0; i < t.stats.dim; ++i) s.std(static_cast<Eigen::Index>(i)) = static_cast<T>(r.f32());
    if (s.label >= c) r.fail("class label out of range");
    t.stats.classes.push_back(std::move(s));
  }
  const Index excluded = r.u64();
  r.need_records(excluded, 8, "excluded classes");
  for (Index k = 0; k < excluded; ++k) t.stats.excluded.push_back(r.u64());
  r.expect_end();
  return t;
}

}  // namespace simgc::io
