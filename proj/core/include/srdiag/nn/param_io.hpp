#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srdiag/io/tensor_archive.hpp"
#include "srdiag/nn/param.hpp"

namespace srdiag::nn {

/// Copy parameters and buffers into archive entries named prefix + name.
template <typename T>
void export_tensors(const std::vector<ParamRef<T>>& params, const std::vector<BufferRef<T>>& buffers,
                    TensorArchive& archive, const std::string& prefix = "");

/// Load every declared parameter and buffer from archive entries named prefix + name.
/// Missing tensors and shape mismatches raise IoError naming the tensor. With strict set,
/// archive entries under `prefix` that the model does not declare are also an error.
template <typename T>
void import_tensors(const std::vector<ParamRef<T>>& params, const std::vector<BufferRef<T>>& buffers,
                    const TensorArchive& archive, const std::string& prefix = "", bool strict = true);

/// FNV-1a over names, shapes and raw value bytes; used to compare weights cheaply.
template <typename T>
std::uint64_t hash_tensors(const std::vector<ParamRef<T>>& params, const std::vector<BufferRef<T>>& buffers = {});

std::uint64_t hash_archive(const TensorArchive& archive);

}  // namespace srdiag::nn
