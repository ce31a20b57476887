#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "qacoustic/error.hpp"

namespace qacoustic::detail {

inline void write_u64(std::ostream& os, std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  write_u64(os, v);
}

inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error("binary stream truncated");
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return v;
}

inline double read_f64(std::istream& is) {
  const std::uint64_t v = read_u64(is);
  double d;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

}  // namespace qacoustic::detail
