#pragma once

#include <iosfwd>
#include <variant>
#include <vector>

#include "anneal_rbm/rbm.hpp"

namespace anneal_rbm {

/// Bars-and-stripes images of side m, each flattened row-major (black = 1).
struct BasDataset {
  int m = 0;
  std::vector<BitVector> images;

  std::size_t size() const noexcept { return images.size(); }
};

/// All 2^(m+1) - 2 distinct images. Order: images with identical columns
/// (pixel depends on the row only) for patterns 0..2^m-1, then images with
/// identical rows for patterns 0..2^m-1, skipping the two uniform images the
/// second group repeats. Pattern bit (m-1-k) paints row/column k, so the top
/// row or left column is the most significant bit.
BasDataset generate_bas(int m);

struct OuterBorder {};
struct CustomRegion {
  std::vector<int> indices;
};
using ClampRegion = std::variant<OuterBorder, CustomRegion>;

/// Sorted, deduplicated pixel indices to hold fixed during reconstruction.
std::vector<int> clamp_mask(int m, const ClampRegion& region);

/// One image per line, m*m characters of '0'/'1'.
void write_dataset(std::ostream& out, const BasDataset& data);

}  // namespace anneal_rbm
