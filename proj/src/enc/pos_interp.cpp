#include "progeo/enc/pos_interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace progeo::enc {

nn::MatF interpolate_positional_encoding(const nn::MatF& pe, int src_side, int dst_side,
                                         bool has_cls) {
  if (src_side < 1 || dst_side < 1) {
    throw std::invalid_argument("positional interpolation: grid sides must be positive");
  }
  const Eigen::Index lead = has_cls ? 1 : 0;
  const Eigen::Index expected = lead + static_cast<Eigen::Index>(src_side) * src_side;
  if (pe.rows() != expected) {
    throw std::invalid_argument("positional interpolation: table has " +
                                std::to_string(pe.rows()) + " rows, expected " +
                                std::to_string(expected) + " for a " +
                                std::to_string(src_side) + "x" + std::to_string(src_side) +
                                " grid");
  }
  if (src_side == dst_side) return pe;

  nn::MatF out(lead + static_cast<Eigen::Index>(dst_side) * dst_side, pe.cols());
  if (has_cls) out.row(0) = pe.row(0);

  // align-corners sampling; a 1-wide source grid degenerates to constant rows
  for (int oy = 0; oy < dst_side; ++oy) {
    for (int ox = 0; ox < dst_side; ++ox) {
      const double sy = (dst_side > 1 && src_side > 1)
                            ? static_cast<double>(oy) * (src_side - 1) / (dst_side - 1)
                            : 0.0;
      const double sx = (dst_side > 1 && src_side > 1)
                            ? static_cast<double>(ox) * (src_side - 1) / (dst_side - 1)
                            : 0.0;
      const int y0 = std::min(static_cast<int>(std::floor(sy)), src_side - 1);
      const int x0 = std::min(static_cast<int>(std::floor(sx)), src_side - 1);
      const int y1 = std::min(y0 + 1, src_side - 1);
      const int x1 = std::min(x0 + 1, src_side - 1);
      const float dy = static_cast<float>(sy - y0);
      const float dx = static_cast<float>(sx - x0);
      out.row(lead + static_cast<Eigen::Index>(oy) * dst_side + ox) =
          pe.row(lead + static_cast<Eigen::Index>(y0) * src_side + x0) * (1 - dy) * (1 - dx) +
          pe.row(lead + static_cast<Eigen::Index>(y0) * src_side + x1) * (1 - dy) * dx +
          pe.row(lead + static_cast<Eigen::Index>(y1) * src_side + x0) * dy * (1 - dx) +
          pe.row(lead + static_cast<Eigen::Index>(y1) * src_side + x1) * dy * dx;
    }
  }
  return out;
}

}  // namespace progeo::enc
