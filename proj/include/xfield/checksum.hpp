#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace xfield {

// zlib CRC-32 of a byte range.
std::uint32_t crc32_bytes(std::span<const std::byte> bytes);

template <typename T>
std::uint32_t crc32_of(std::span<const T> values) {
  return crc32_bytes(std::as_bytes(values));
}

}  // namespace xfield
