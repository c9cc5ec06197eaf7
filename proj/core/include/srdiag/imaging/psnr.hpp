#pragma once

#include "srdiag/imaging/image.hpp"

namespace srdiag {

/// Value reported for identical images, and the ceiling for all PSNR values.
inline constexpr double kPsnrCap = 99.0;

/// Peak signal-to-noise ratio in dB with peak 1.0: 10 * log10(1 / MSE), capped at kPsnrCap.
double psnr(const ImageTensor& a, const ImageTensor& b);

double mean_squared_error(const ImageTensor& a, const ImageTensor& b);

}  // namespace srdiag
