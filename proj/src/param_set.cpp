#include "bandit/param_set.hpp"

#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (lookup_.contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  const std::size_t slot = tensors_.size();
  lookup_.emplace(name, slot);
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  return slot;
}

bool ParamSet::contains(std::string_view name) const {
  return lookup_.find(std::string(name)) != lookup_.end();
}

std::size_t ParamSet::index(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) throw IndexError("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (std::size_t i = 0; i < tensors_.size(); ++i) out.add(names_[i], Tensor(tensors_[i].shape()));
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].shape() != other.tensors_[i].shape()) return false;
  return true;
}

void ParamSet::require_same_layout(const ParamSet& other, const char* what) const {
  if (names_ != other.names_)
    throw ShapeError(std::string(what) + ": parameter sets have different names");
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].shape() != other.tensors_[i].shape())
      throw ShapeError(std::string(what) + ": parameter '" + names_[i] + "' has shape " +
                       to_string(tensors_[i].shape()) + " vs " +
                       to_string(other.tensors_[i].shape()));
}

void ParamSet::fill(double value) {
  for (auto& t : tensors_) t.fill(value);
}

void ParamSet::scale(double factor) {
  for (auto& t : tensors_) t.scale(factor);
}

void ParamSet::axpy(double factor, const ParamSet& other) {
  require_same_layout(other, "axpy");
  for (std::size_t i = 0; i < tensors_.size(); ++i) tensors_[i].axpy(factor, other.tensors_[i]);
}

double ParamSet::squared_norm() const {
  double s = 0.0;
  for (const auto& t : tensors_) s += t.squared_norm();
  return s;
}

double ParamSet::norm() const { return std::sqrt(squared_norm()); }

std::size_t ParamSet::element_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

bool ParamSet::all_finite() const {
  for (const auto& t : tensors_)
    if (!t.all_finite()) return false;
  return true;
}

}  // namespace bandit
