#include "inrep/checkpoint.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <fstream>

#include "inrep/errors.hpp"
#include "json.hpp"

namespace inrep {

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [key, tensor] : tensors)
    if (key == name) return tensor;
  throw usage_error("Checkpoint: missing tensor " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [key, tensor] : tensors)
    if (key == name) return true;
  return false;
}

std::string Checkpoint::to_json() const {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kind;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [name, tensor] : tensors) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = tensor.shape();
    entry["data"] = tensor.vec_data();
    arr.push_back(std::move(entry));
  }
  j["tensors"] = std::move(arr);
  return j.dump();
}

Checkpoint Checkpoint::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
    throw config_error("Checkpoint: unsupported format version");
  Checkpoint ckpt;
  ckpt.kind = j.value("kind", "");
  for (const auto& entry : j.at("tensors")) {
    std::vector<std::size_t> shape = entry.at("shape").get<std::vector<std::size_t>>();
    std::vector<double> data = entry.at("data").get<std::vector<double>>();
    ckpt.tensors.emplace_back(entry.at("name").get<std::string>(),
                              Tensor(std::move(shape), std::move(data)));
  }
  return ckpt;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("Checkpoint: cannot open " + path + " for writing");
  out << to_json();
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("Checkpoint: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string parameter_digest(const std::vector<Tensor*>& params) {
  return parameter_digest(std::vector<const Tensor*>(params.begin(), params.end()));
}

std::string parameter_digest(const std::vector<const Tensor*>& params) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
    throw numerical_error("parameter_digest: digest init failed");
  for (const Tensor* t : params) {
    for (std::size_t dim : t->shape()) {
      std::uint64_t d64 = dim;
      EVP_DigestUpdate(ctx, &d64, sizeof(d64));
    }
    EVP_DigestUpdate(ctx, t->data(), t->numel() * sizeof(double));
  }
  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, hash, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[hash[i] >> 4]);
    out.push_back(hex[hash[i] & 0xf]);
  }
  return out;
}

}  // namespace inrep
