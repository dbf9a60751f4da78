#ifndef LETHE_CORE_PAGE_H_
#define LETHE_CORE_PAGE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/entry.h"
#include "util/status.h"

namespace lethe {

// On-disk page header: crc(4) count(4) min_sort(8) max_sort(8)
// min_del(8) max_del(8). The CRC covers everything after the crc field.
constexpr uint32_t kPageHeaderSize = 40;

struct PageHeader {
  uint32_t entry_count = 0;
  uint64_t min_sort_key = UINT64_MAX;  // sentinel when empty
  uint64_t max_sort_key = 0;
  uint64_t min_delete_key = UINT64_MAX;
  uint64_t max_delete_key = 0;
};

// Entries a fully-populated page can hold at a fixed encoded entry size.
inline uint32_t PageCapacity(uint32_t page_size_bytes, uint32_t entry_size_bytes) {
  return (page_size_bytes - kPageHeaderSize) / entry_size_bytes;
}

// Encodes entries (sorted ascending by sort_key) into a zero-padded page of
// exactly page_size_bytes. Fails with Overflow if they do not fit and with
// UnsortedInput if the order is wrong.
Status EncodePage(const std::vector<Entry>& entries, uint32_t page_size_bytes,
                  std::string* out);

// Inverse of EncodePage; verifies the checksum and returns the entries and
// header. Fails with Corruption on any mismatch.
Status DecodePage(std::string_view page, std::vector<Entry>* entries,
                  PageHeader* header);

}  // namespace lethe

#endif  // LETHE_CORE_PAGE_H_
