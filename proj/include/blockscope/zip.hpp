#pragma once

// Minimal ZIP container support: enough for Scratch archives.
// Reading handles stored and deflated entries; writing emits stored or
// deflated entries. ZIP64 and encryption are not supported.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blockscope::zip {

class ZipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Entry {
  std::string name;
  std::uint16_t method = 0;  // 0 stored, 8 deflate
  std::uint32_t crc32 = 0;
  std::uint32_t compressed_size = 0;
  std::uint32_t uncompressed_size = 0;
  std::uint32_t local_header_offset = 0;
};

// Cheap signature check; does not validate the whole archive.
bool looks_like_zip(std::span<const std::uint8_t> bytes);

class Archive {
 public:
  // Throws ZipError when no valid central directory is found.
  explicit Archive(std::vector<std::uint8_t> bytes);

  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(std::string_view name) const;
  // Throws ZipError on unsupported method, corrupt data or CRC mismatch.
  std::string read(const Entry& entry) const;

 private:
  std::vector<std::uint8_t> bytes_;
  std::vector<Entry> entries_;
};

class Writer {
 public:
  void add(std::string name, std::string_view data, bool deflate = false);
  std::vector<std::uint8_t> finish() const;

 private:
  struct Pending {
    Entry entry;
    std::string payload;
  };
  std::vector<Pending> files_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace blockscope::zip
