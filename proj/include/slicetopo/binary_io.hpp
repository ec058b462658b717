// SPDX-License-Identifier: Apache-2.0
//
// Little-endian binary writer/reader used by the model library container.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "slicetopo/error.hpp"

namespace slicetopo {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

}  // namespace detail

class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(detail::to_little(v)); }
  void u64(std::uint64_t v) { raw(detail::to_little(v)); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  void bytes(std::string_view s) { buf_.append(s); }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  const std::string& data() const { return buf_; }

 private:
  template <class T>
  void raw(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf_.append(b, sizeof(T));
  }
  std::string buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() { return detail::to_little(raw<std::uint32_t>()); }
  std::uint64_t u64() { return detail::to_little(raw<std::uint64_t>()); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = count(1);
    return std::string(take(n));
  }
  std::string_view bytes(std::size_t n) { return take(n); }
  std::vector<double> f64s() {
    const auto n = count(8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  // Length prefix, sanity-checked against the remaining bytes.
  std::size_t count(std::size_t elem) {
    const std::uint64_t n = u64();
    if (n > (data_.size() - pos_) / elem) throw Error(ErrorCode::kParseError, "truncated binary container");
    return static_cast<std::size_t>(n);
  }
  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::kParseError, "truncated binary container");
    const auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <class T>
  T raw() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace slicetopo
