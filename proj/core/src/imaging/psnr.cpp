#include "srdiag/imaging/psnr.hpp"

#include <algorithm>
#include <cmath>

#include "srdiag/error.hpp"

namespace srdiag {

double mean_squared_error(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw InvalidArgument("psnr: image shapes differ");
  if (a.empty()) throw InvalidArgument("psnr: empty images");
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  return sum / static_cast<double>(da.size());
}

double psnr(const ImageTensor& a, const ImageTensor& b) {
  const double mse = mean_squared_error(a, b);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

}  // namespace srdiag
