#include "anneal_rbm/bas.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "anneal_rbm/errors.hpp"

namespace anneal_rbm {

BasDataset generate_bas(int m) {
  if (m < 2) throw ContractViolation("bars-and-stripes side length must be at least 2");
  if (m > 16) throw ContractViolation("bars-and-stripes side length above 16 is not supported");
  BasDataset data{m, {}};
  const unsigned patterns = 1u << m;
  const unsigned all_on = patterns - 1;
  auto bit = [m](unsigned pattern, int k) -> std::uint8_t {
    return static_cast<std::uint8_t>((pattern >> (m - 1 - k)) & 1u);
  };
  for (unsigned p = 0; p < patterns; ++p) {
    BitVector img(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) img[r * m + c] = bit(p, r);
    data.images.push_back(std::move(img));
  }
  for (unsigned p = 0; p < patterns; ++p) {
    if (p == 0 || p == all_on) continue;
    BitVector img(static_cast<std::size_t>(m) * m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) img[r * m + c] = bit(p, c);
    data.images.push_back(std::move(img));
  }
  return data;
}

std::vector<int> clamp_mask(int m, const ClampRegion& region) {
  if (m < 2) throw ContractViolation("side length must be at least 2");
  std::vector<int> out;
  if (std::holds_alternative<OuterBorder>(region)) {
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        if (r == 0 || c == 0 || r == m - 1 || c == m - 1) out.push_back(r * m + c);
    return out;
  }
  out = std::get<CustomRegion>(region).indices;
  for (int idx : out)
    if (idx < 0 || idx >= m * m)
      throw ContractViolation("clamp index " + std::to_string(idx) + " outside a " +
                              std::to_string(m) + "x" + std::to_string(m) + " image");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void write_dataset(std::ostream& out, const BasDataset& data) {
  for (const BitVector& img : data.images) {
    std::string line(img.size(), '0');
    for (std::size_t k = 0; k < img.size(); ++k)
      if (img[k]) line[k] = '1';
    out << line << '\n';
  }
}

}  // namespace anneal_rbm
