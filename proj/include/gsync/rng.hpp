#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "gsync/types.hpp"

namespace gsync {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable child seed from a base seed and a list of indices.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(base);
  for (auto p : parts) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

/// Standard normal for real S; for complex S, E|z|^2 = 1 (each part N(0, 1/2)).
template <typename S>
S standard_normal(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  if constexpr (is_complex<S>::value) {
    const double re = nd(rng);
    const double im = nd(rng);
    return S(re, im) * std::sqrt(0.5);
  } else {
    return nd(rng);
  }
}

template <typename S>
Mat<S> gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Mat<S> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = standard_normal<S>(rng);
  return m;
}

}  // namespace gsync
