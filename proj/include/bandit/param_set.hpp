#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bandit/tensor.hpp"

namespace bandit {

/// Ordered collection of named tensors. Used both for model parameters and
/// for gradient maps (a gradient map is a ParamSet shaped like the model).
class ParamSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const noexcept { return tensors_.size(); }
  bool contains(std::string_view name) const;
  std::size_t index(std::string_view name) const;
  const std::string& name(std::size_t slot) const { return names_.at(slot); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  Tensor& operator[](std::size_t slot) { return tensors_[slot]; }
  const Tensor& operator[](std::size_t slot) const { return tensors_[slot]; }
  Tensor& operator[](std::string_view name) { return tensors_[index(name)]; }
  const Tensor& operator[](std::string_view name) const { return tensors_[index(name)]; }

  auto begin() noexcept { return tensors_.begin(); }
  auto end() noexcept { return tensors_.end(); }
  auto begin() const noexcept { return tensors_.begin(); }
  auto end() const noexcept { return tensors_.end(); }

  /// Same names and shapes, all values zero.
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;
  void require_same_layout(const ParamSet& other, const char* what) const;

  void fill(double value);
  void scale(double factor);
  void axpy(double factor, const ParamSet& other);
  double squared_norm() const;
  double norm() const;
  std::size_t element_count() const;
  bool all_finite() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.names_ == b.names_ && a.tensors_ == b.tensors_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

using GradientMap = ParamSet;

}  // namespace bandit
