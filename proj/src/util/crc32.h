#ifndef LETHE_UTIL_CRC32_H_
#define LETHE_UTIL_CRC32_H_

#include <cstddef>
#include <cstdint>

namespace lethe {
namespace crc32 {

// CRC-32 (reflected, polynomial 0xEDB88320) over [data, data+n).
uint32_t Value(const char* data, size_t n);

}  // namespace crc32
}  // namespace lethe

#endif  // LETHE_UTIL_CRC32_H_
