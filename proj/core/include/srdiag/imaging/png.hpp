#pragma once

#include <filesystem>

#include "srdiag/imaging/image.hpp"

namespace srdiag {

/// Decode an 8-bit gray or RGB PNG. Alpha is dropped, palette/16-bit inputs are converted.
ImageTensor read_png(const std::filesystem::path& path);

/// Encode as 8-bit PNG: round(255 * clamp(v, 0, 1)). 1 channel → gray, 3 → RGB.
void write_png(const std::filesystem::path& path, const ImageTensor& img);

}  // namespace srdiag
