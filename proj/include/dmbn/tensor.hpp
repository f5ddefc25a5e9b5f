#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace dmbn {

// Dense row-major tensor with a fixed rank. Last index varies fastest.
template <class T, std::size_t Rank>
class Tensor {
 public:
  using value_type = T;
  using Dims = std::array<std::size_t, Rank>;

  Tensor() { dims_.fill(0); }

  explicit Tensor(const Dims& dims, const T& init = T{}) : dims_(dims) {
    std::size_t total = 1;
    for (auto d : dims_) total *= d;
    data_.assign(total, init);
  }

  template <class... Idx>
  T& operator()(Idx... idx) {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  template <class... Idx>
  const T& operator()(Idx... idx) const {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  const Dims& dims() const { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_[axis]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t offset(const std::array<std::size_t, Rank>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < Rank; ++a) {
      assert(idx[a] < dims_[a]);
      off = off * dims_[a] + idx[a];
    }
    return off;
  }

  Dims dims_;
  std::vector<T> data_;
};

}  // namespace dmbn
