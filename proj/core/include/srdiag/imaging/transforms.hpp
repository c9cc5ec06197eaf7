#pragma once

#include "srdiag/imaging/image.hpp"
#include "srdiag/rng.hpp"

namespace srdiag {

/// Copy of the size x size window whose top-left corner is (top, left).
ImageTensor crop(const ImageTensor& img, int top, int left, int size);

/// Square crop with offsets drawn uniformly from rng.
ImageTensor random_crop(const ImageTensor& img, int size, Rng& rng);

ImageTensor flip_horizontal(const ImageTensor& img);

/// Rotate counter-clockwise by quarter_turns * 90 degrees.
ImageTensor rotate90(const ImageTensor& img, int quarter_turns);

/// Random horizontal flip (p = 0.5), then a rotation by k * 90 with k uniform in {0,1,2,3}.
ImageTensor augment(const ImageTensor& img, Rng& rng);

}  // namespace srdiag
