#ifndef LETHE_UTIL_CODING_H_
#define LETHE_UTIL_CODING_H_

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

// Little-endian fixed-width integer encoding used by every on-disk format.

namespace lethe {

inline void EncodeFixed32(char* dst, uint32_t value) {
  dst[0] = static_cast<char>(value & 0xff);
  dst[1] = static_cast<char>((value >> 8) & 0xff);
  dst[2] = static_cast<char>((value >> 16) & 0xff);
  dst[3] = static_cast<char>((value >> 24) & 0xff);
}

inline void EncodeFixed64(char* dst, uint64_t value) {
  for (int i = 0; i < 8; i++) {
    dst[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
}

inline uint32_t DecodeFixed32(const char* src) {
  const uint8_t* p = reinterpret_cast<const uint8_t*>(src);
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

inline uint64_t DecodeFixed64(const char* src) {
  const uint8_t* p = reinterpret_cast<const uint8_t*>(src);
  uint64_t v = 0;
  for (int i = 7; i >= 0; i--) {
    v = (v << 8) | p[i];
  }
  return v;
}

inline void PutFixed32(std::string* dst, uint32_t value) {
  char buf[4];
  EncodeFixed32(buf, value);
  dst->append(buf, 4);
}

inline void PutFixed64(std::string* dst, uint64_t value) {
  char buf[8];
  EncodeFixed64(buf, value);
  dst->append(buf, 8);
}

// Cursor-style reader over a byte view. Get* methods return false once the
// input is exhausted or too short.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data), pos_(0) {}

  bool GetFixed32(uint32_t* value) {
    if (pos_ + 4 > data_.size()) return false;
    *value = DecodeFixed32(data_.data() + pos_);
    pos_ += 4;
    return true;
  }

  bool GetFixed64(uint64_t* value) {
    if (pos_ + 8 > data_.size()) return false;
    *value = DecodeFixed64(data_.data() + pos_);
    pos_ += 8;
    return true;
  }

  bool GetByte(uint8_t* value) {
    if (pos_ >= data_.size()) return false;
    *value = static_cast<uint8_t>(data_[pos_]);
    pos_ += 1;
    return true;
  }

  bool GetBytes(size_t n, std::string_view* out) {
    if (pos_ + n > data_.size()) return false;
    *out = data_.substr(pos_, n);
    pos_ += n;
    return true;
  }

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }

 private:
  std::string_view data_;
  size_t pos_;
};

}  // namespace lethe

#endif  // LETHE_UTIL_CODING_H_
