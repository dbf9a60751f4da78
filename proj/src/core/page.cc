#include "core/page.h"

#include "util/coding.h"
#include "util/crc32.h"

namespace lethe {

Status EncodePage(const std::vector<Entry>& entries, uint32_t page_size_bytes,
                  std::string* out) {
  PageHeader hdr;
  hdr.entry_count = static_cast<uint32_t>(entries.size());
  uint64_t payload = 0;
  for (size_t i = 0; i < entries.size(); i++) {
    const Entry& e = entries[i];
    if (i > 0 && entries[i - 1].sort_key > e.sort_key) {
      return Status::UnsortedInput("page entries not sorted by sort key");
    }
    payload += e.EncodedSize();
    if (e.sort_key < hdr.min_sort_key) hdr.min_sort_key = e.sort_key;
    if (e.sort_key > hdr.max_sort_key) hdr.max_sort_key = e.sort_key;
    if (e.delete_key < hdr.min_delete_key) hdr.min_delete_key = e.delete_key;
    if (e.delete_key > hdr.max_delete_key) hdr.max_delete_key = e.delete_key;
  }
  if (payload + kPageHeaderSize > page_size_bytes) {
    return Status::Overflow("entries exceed page capacity");
  }

  out->clear();
  out->reserve(page_size_bytes);
  out->append(4, '\0');  // crc patched below
  PutFixed32(out, hdr.entry_count);
  PutFixed64(out, hdr.min_sort_key);
  PutFixed64(out, hdr.max_sort_key);
  PutFixed64(out, hdr.min_delete_key);
  PutFixed64(out, hdr.max_delete_key);
  for (const Entry& e : entries) AppendEntry(out, e);
  out->resize(page_size_bytes, '\0');

  uint32_t crc = crc32::Value(out->data() + 4, page_size_bytes - 4);
  EncodeFixed32(out->data(), crc);
  return Status::OK();
}

Status DecodePage(std::string_view page, std::vector<Entry>* entries,
                  PageHeader* header) {
  if (page.size() < kPageHeaderSize) {
    return Status::Corruption("short page");
  }
  uint32_t stored_crc = DecodeFixed32(page.data());
  uint32_t actual_crc = crc32::Value(page.data() + 4, page.size() - 4);
  if (stored_crc != actual_crc) {
    return Status::Corruption("page checksum mismatch");
  }

  ByteReader r(page.substr(4));
  PageHeader hdr;
  if (!r.GetFixed32(&hdr.entry_count) || !r.GetFixed64(&hdr.min_sort_key) ||
      !r.GetFixed64(&hdr.max_sort_key) || !r.GetFixed64(&hdr.min_delete_key) ||
      !r.GetFixed64(&hdr.max_delete_key)) {
    return Status::Corruption("short page header");
  }
  entries->clear();
  entries->reserve(hdr.entry_count);
  for (uint32_t i = 0; i < hdr.entry_count; i++) {
    Entry e;
    if (!ReadEntry(&r, &e)) {
      return Status::Corruption("truncated page entry");
    }
    entries->push_back(std::move(e));
  }
  if (header != nullptr) *header = hdr;
  return Status::OK();
}

}  // namespace lethe
