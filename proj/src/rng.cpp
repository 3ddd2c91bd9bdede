#include "anon/rng.hpp"

#include <algorithm>

namespace anon {

std::vector<std::uint64_t> Rng::sample_distinct(std::uint64_t k, std::uint64_t n) {
  if (k > n) k = n;
  std::vector<std::uint64_t> chosen;
  chosen.reserve(k);
  for (std::uint64_t j = n - k; j < n; ++j) {
    const std::uint64_t r = uniform_index(j + 1);
    if (std::find(chosen.begin(), chosen.end(), r) != chosen.end()) {
      chosen.push_back(j);
    } else {
      chosen.push_back(r);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace anon
