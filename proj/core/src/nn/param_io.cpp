#include "srdiag/nn/param_io.hpp"

#include <cstring>
#include <set>

#include "srdiag/error.hpp"

namespace srdiag::nn {
namespace {

std::vector<std::int64_t> to_dims(const std::vector<int>& dims) { return {dims.begin(), dims.end()}; }

std::string dims_text(const std::vector<std::int64_t>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

template <typename T>
StoredTensor store(const Tensor<T>& t, const std::vector<int>& dims) {
  StoredTensor s;
  s.shape = to_dims(dims);
  s.values.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s.values[i] = static_cast<float>(t[i]);
  return s;
}

template <typename T>
void load(const TensorArchive& archive, const std::string& key, const std::vector<int>& dims, Tensor<T>& dst) {
  auto it = archive.tensors.find(key);
  if (it == archive.tensors.end()) throw IoError("weights are missing tensor '" + key + "'");
  const auto expected = to_dims(dims);
  if (it->second.shape != expected) {
    throw IoError("tensor '" + key + "' has shape " + dims_text(it->second.shape) + ", architecture expects " +
                  dims_text(expected));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(it->second.values[i]);
}

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
};

}  // namespace

template <typename T>
void export_tensors(const std::vector<ParamRef<T>>& params, const std::vector<BufferRef<T>>& buffers,
                    TensorArchive& archive, const std::string& prefix) {
  for (const auto& p : params) archive.tensors[prefix + p.name] = store(p.param->value, p.param->dims);
  for (const auto& b : buffers) archive.tensors[prefix + b.name] = store(*b.tensor, b.dims);
}

template <typename T>
void import_tensors(const std::vector<ParamRef<T>>& params, const std::vector<BufferRef<T>>& buffers,
                    const TensorArchive& archive, const std::string& prefix, bool strict) {
  std::set<std::string> declared;
  for (const auto& p : params) declared.insert(prefix + p.name);
  for (const auto& b : buffers) declared.insert(prefix + b.name);
  if (strict) {
    for (const auto& [name, t] : archive.tensors) {
      if (name.rfind(prefix, 0) == 0 && !declared.count(name)) {
        throw IoError("weights contain tensor '" + name + "' that the architecture does not declare");
      }
    }
  }
  for (const auto& p : params) load(archive, prefix + p.name, p.param->dims, p.param->value);
  for (const auto& b : buffers) load(archive, prefix + b.name, b.dims, *b.tensor);
}

template <typename T>
std::uint64_t hash_tensors(const std::vector<ParamRef<T>>& params, const std::vector<BufferRef<T>>& buffers) {
  Fnv f;
  for (const auto& p : params) {
    f.bytes(p.name.data(), p.name.size());
    f.bytes(p.param->value.data(), p.param->value.size() * sizeof(T));
  }
  for (const auto& b : buffers) {
    f.bytes(b.name.data(), b.name.size());
    f.bytes(b.tensor->data(), b.tensor->size() * sizeof(T));
  }
  return f.h;
}

std::uint64_t hash_archive(const TensorArchive& archive) {
  Fnv f;
  const std::string bytes = encode_archive(archive);
  f.bytes(bytes.data(), bytes.size());
  return f.h;
}

#define SRDIAG_INSTANTIATE_PARAM_IO(T)                                                                    \
  template void export_tensors<T>(const std::vector<ParamRef<T>>&, const std::vector<BufferRef<T>>&,      \
                                  TensorArchive&, const std::string&);                                    \
  template void import_tensors<T>(const std::vector<ParamRef<T>>&, const std::vector<BufferRef<T>>&,      \
                                  const TensorArchive&, const std::string&, bool);                        \
  template std::uint64_t hash_tensors<T>(const std::vector<ParamRef<T>>&, const std::vector<BufferRef<T>>&);

SRDIAG_INSTANTIATE_PARAM_IO(float)
SRDIAG_INSTANTIATE_PARAM_IO(double)

}  // namespace srdiag::nn
