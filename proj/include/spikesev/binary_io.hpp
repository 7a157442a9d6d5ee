#ifndef SPIKESEV_BINARY_IO_HPP
#define SPIKESEV_BINARY_IO_HPP

// Little-endian primitives for the binary containers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "spikesev/common.hpp"

namespace spikesev::binary {

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <typename T>
void put(std::ostream& out, T value) {
  value = to_little(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, std::string_view what) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw FormatError("truncated file while reading " + std::string(what));
  return to_little(value);
}

inline void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, std::string_view what) {
  const auto n = get<std::uint32_t>(in, what);
  if (n > (1u << 24)) throw FormatError("implausible string length for " + std::string(what));
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n))
    throw FormatError("truncated file while reading " + std::string(what));
  return s;
}

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
    throw FormatError("bad magic: expected " + std::string(magic));
}

/// Writes `n` floats in little-endian order.
inline void put_floats(std::ostream& out, const float* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  } else {
    for (std::size_t i = 0; i < n; ++i) put(out, data[i]);
  }
}

inline void get_floats(std::istream& in, float* data, std::size_t n, std::string_view what) {
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float))))
      throw FormatError("truncated file while reading " + std::string(what));
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = get<float>(in, what);
  }
}

}  // namespace spikesev::binary

#endif  // SPIKESEV_BINARY_IO_HPP
