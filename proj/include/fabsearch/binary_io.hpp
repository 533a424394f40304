#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fabsearch/error.hpp"

namespace fabsearch {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with native little-endian stores");

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) {
    auto p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void tag(std::string_view magic) { raw(magic.data(), magic.size()); }
  template <class T>
  void put(T value) {
    raw(&value, sizeof value);
  }

  Bytes& bytes() { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// Bounds-checked little-endian cursor. Any read past the end raises `code`.
class ByteReader {
 public:
  ByteReader(ByteView data, ErrorCode code) : data_(data), code_(code) {}

  ByteView take(std::size_t n) {
    if (n > remaining()) fail("unexpected end of data");
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  template <class T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof value).data(), sizeof value);
    return value;
  }
  void expect_tag(std::string_view magic) {
    ByteView got = take(magic.size());
    if (std::memcmp(got.data(), magic.data(), magic.size()) != 0) fail("bad magic");
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  [[noreturn]] void fail(const std::string& what) const { throw Error(code_, what); }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
  ErrorCode code_;
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, ByteView data);

}  // namespace fabsearch
