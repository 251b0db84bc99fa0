#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "skelet/errors.hpp"

namespace skelet::detail {

// Little-endian encoder into a growable byte buffer.
class ByteWriter {
 public:
  void bytes(const void* src, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(src);
    buf_.insert(buf_.end(), p, p + n);
  }

  template <typename T>
  void integer(T v) {
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<char>(u & 0xffu));
      u = static_cast<U>(u >> 8);
    }
  }

  void f64(double v) { integer(std::bit_cast<std::uint64_t>(v)); }

  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

// Little-endian decoder that reports failures with the current byte offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string("truncated ") + what + ": expected " + std::to_string(n) +
                            " more bytes, found " + std::to_string(remaining()),
                        pos_);
    }
  }

  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T integer(const char* what) {
    need(sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  double f64(const char* what) { return std::bit_cast<double>(integer<std::uint64_t>(what)); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace skelet::detail
