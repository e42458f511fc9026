#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "binloc/error.hpp"

namespace binloc::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}

  std::size_t remaining() const { return buf_.size() - pos_; }
  std::uint8_t u8() { std::uint8_t v; take(&v, 1); return v; }
  std::uint16_t u16() { std::uint16_t v; take(&v, 2); return v; }
  std::uint32_t u32() { std::uint32_t v; take(&v, 4); return v; }
  float f32() { float v; take(&v, 4); return v; }
  void take(void* out, std::size_t n) {
    require(remaining() >= n, ErrorKind::kLength, "payload-length: file truncated");
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes);

}  // namespace binloc::detail
