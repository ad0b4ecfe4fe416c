#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dqd {

// Window start offsets along one axis: 0, stride, 2*stride, ... while the
// window fits, plus one final window flush with the far edge (rounded down to
// the 8x8 grid) when the stride does not land there exactly.
inline std::vector<int> windowOffsets(int extent, int window, int stride) {
  if (window <= 0 || stride <= 0) throw std::invalid_argument("window and stride must be positive");
  if (extent < window) {
    throw std::invalid_argument("image extent " + std::to_string(extent) + " smaller than window " +
                                std::to_string(window));
  }
  std::vector<int> offsets;
  int x = 0;
  for (; x + window <= extent; x += stride) offsets.push_back(x);
  const int last = ((extent - window) / 8) * 8;
  if (offsets.back() < last) offsets.push_back(last);
  return offsets;
}

}  // namespace dqd
