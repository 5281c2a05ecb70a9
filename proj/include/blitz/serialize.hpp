#pragma once

#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "blitz/error.hpp"
#include "blitz/types.hpp"

namespace blitz {

// Little-endian byte writer/reader used by the container format.
class ByteWriter {
 public:
  std::vector<u8>& bytes() { return out_; }
  const std::vector<u8>& bytes() const { return out_; }
  size_t size() const { return out_.size(); }

  template <class T>
  void put(T v) {
    static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
    u8 buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }

  void put_u128(u128 v) {
    put<u64>(static_cast<u64>(v));
    put<u64>(static_cast<u64>(v >> 64));
  }

  void put_bytes(const void* data, size_t n) {
    const u8* p = static_cast<const u8*>(data);
    out_.insert(out_.end(), p, p + n);
  }

  void put_string(const std::string& s) {
    if (s.size() > 0xffffffffu) raise(Errc::CapacityError, "string too long to serialize");
    put<u32>(static_cast<u32>(s.size()));
    put_bytes(s.data(), s.size());
  }

 private:
  std::vector<u8> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const u8> data) : data_(data) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

  template <class T>
  T get() {
    static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  u128 get_u128() {
    u64 lo = get<u64>();
    u64 hi = get<u64>();
    return (static_cast<u128>(hi) << 64) | lo;
  }

  std::string get_string() {
    u32 n = get<u32>();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::span<const u8> get_span(size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void seek(size_t pos) {
    if (pos > data_.size()) raise(Errc::CorruptStream, "seek past end");
    pos_ = pos;
  }

 private:
  void need(size_t n) const {
    if (remaining() < n) raise(Errc::CorruptStream, "unexpected end of serialized data");
  }

  std::span<const u8> data_;
  size_t pos_ = 0;
};

}  // namespace blitz
