#pragma once

#include <string>
#include <utility>
#include <vector>

#include "inrep/tensor.hpp"

namespace inrep {

// Versioned JSON checkpoint: named tensors with explicit shape headers.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  std::string kind;  // "mlp", "modifier", "discriminator_bank", ...
  std::vector<std::pair<std::string, Tensor>> tensors;

  void add(std::string name, const Tensor& t) { tensors.emplace_back(std::move(name), t); }
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;

  std::string to_json() const;
  static Checkpoint from_json(const std::string& text);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

// SHA-256 over the canonical little-endian byte layout of a parameter list;
// used for generator freeze audits.
std::string parameter_digest(const std::vector<const Tensor*>& params);
std::string parameter_digest(const std::vector<Tensor*>& params);

}  // namespace inrep
