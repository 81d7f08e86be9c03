#include "blockscope/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace blockscope::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kEndRecordSize = 22;

std::uint16_t u16(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 2 > b.size()) throw ZipError("truncated archive");
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t u32(std::span<const std::uint8_t> b, std::size_t at) {
  if (at + 4 > b.size()) throw ZipError("truncated archive");
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

std::string inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError("inflateInit failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw ZipError("corrupt deflate stream");
  return out;
}

std::string deflate_raw(std::string_view in) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw ZipError("deflateInit failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw ZipError("deflate failed");
  return out;
}

}  // namespace

bool looks_like_zip(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && bytes[0] == 'P' && bytes[1] == 'K' &&
         ((bytes[2] == 3 && bytes[3] == 4) || (bytes[2] == 5 && bytes[3] == 6));
}

Archive::Archive(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  std::span<const std::uint8_t> b(bytes_);
  if (b.size() < kEndRecordSize) throw ZipError("not a zip archive");
  // The end record sits within the last 22 + 65535 (comment) bytes.
  std::size_t lowest = b.size() > kEndRecordSize + 0xffff ? b.size() - kEndRecordSize - 0xffff : 0;
  std::optional<std::size_t> end_at;
  for (std::size_t i = b.size() - kEndRecordSize + 1; i-- > lowest;) {
    if (u32(b, i) == kEndSig) {
      end_at = i;
      break;
    }
  }
  if (!end_at) throw ZipError("not a zip archive");
  const std::uint16_t count = u16(b, *end_at + 10);
  const std::uint32_t cd_offset = u32(b, *end_at + 16);
  if (count == 0xffff || cd_offset == 0xffffffff) throw ZipError("ZIP64 archives are not supported");

  std::size_t at = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (u32(b, at) != kCentralSig) throw ZipError("corrupt central directory");
    Entry e;
    e.method = u16(b, at + 10);
    e.crc32 = u32(b, at + 16);
    e.compressed_size = u32(b, at + 20);
    e.uncompressed_size = u32(b, at + 24);
    const std::uint16_t name_len = u16(b, at + 28);
    const std::uint16_t extra_len = u16(b, at + 30);
    const std::uint16_t comment_len = u16(b, at + 32);
    e.local_header_offset = u32(b, at + 42);
    if (at + 46 + name_len > b.size()) throw ZipError("truncated central directory");
    e.name.assign(reinterpret_cast<const char*>(b.data() + at + 46), name_len);
    entries_.push_back(std::move(e));
    at += 46 + name_len + extra_len + comment_len;
  }
}

const Entry* Archive::find(std::string_view name) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
  return it == entries_.end() ? nullptr : &*it;
}

std::string Archive::read(const Entry& e) const {
  std::span<const std::uint8_t> b(bytes_);
  const std::size_t at = e.local_header_offset;
  if (u32(b, at) != kLocalSig) throw ZipError("corrupt local header for " + e.name);
  const std::size_t data_at = at + 30 + u16(b, at + 26) + u16(b, at + 28);
  if (data_at + e.compressed_size > b.size()) throw ZipError("truncated entry " + e.name);
  auto payload = b.subspan(data_at, e.compressed_size);

  std::string out;
  if (e.method == 0) {
    if (e.compressed_size != e.uncompressed_size) throw ZipError("size mismatch in " + e.name);
    out.assign(reinterpret_cast<const char*>(payload.data()), payload.size());
  } else if (e.method == 8) {
    out = inflate_raw(payload, e.uncompressed_size);
  } else {
    throw ZipError("unsupported compression method " + std::to_string(e.method) + " in " + e.name);
  }
  if (crc_of(out) != e.crc32) throw ZipError("CRC mismatch in " + e.name);
  return out;
}

void Writer::add(std::string name, std::string_view data, bool deflate) {
  Pending p;
  p.entry.name = std::move(name);
  p.entry.crc32 = crc_of(data);
  p.entry.uncompressed_size = static_cast<std::uint32_t>(data.size());
  if (deflate) {
    p.entry.method = 8;
    p.payload = deflate_raw(data);
  } else {
    p.payload = std::string(data);
  }
  p.entry.compressed_size = static_cast<std::uint32_t>(p.payload.size());
  files_.push_back(std::move(p));
}

std::vector<std::uint8_t> Writer::finish() const {
  std::vector<std::uint8_t> out;
  std::vector<std::uint32_t> offsets;
  for (const Pending& p : files_) {
    offsets.push_back(static_cast<std::uint32_t>(out.size()));
    put32(out, kLocalSig);
    put16(out, 20);
    put16(out, 0x0800);  // UTF-8 names
    put16(out, p.entry.method);
    put16(out, 0);
    put16(out, 0x21);  // 1980-01-01, fixed for reproducible archives
    put32(out, p.entry.crc32);
    put32(out, p.entry.compressed_size);
    put32(out, p.entry.uncompressed_size);
    put16(out, static_cast<std::uint16_t>(p.entry.name.size()));
    put16(out, 0);
    out.insert(out.end(), p.entry.name.begin(), p.entry.name.end());
    out.insert(out.end(), p.payload.begin(), p.payload.end());
  }
  const auto cd_start = static_cast<std::uint32_t>(out.size());
  for (std::size_t i = 0; i < files_.size(); ++i) {
    const Entry& e = files_[i].entry;
    put32(out, kCentralSig);
    put16(out, 20);
    put16(out, 20);
    put16(out, 0x0800);
    put16(out, e.method);
    put16(out, 0);
    put16(out, 0x21);
    put32(out, e.crc32);
    put32(out, e.compressed_size);
    put32(out, e.uncompressed_size);
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);
    put16(out, 0);
    put16(out, 0);
    put16(out, 0);
    put32(out, 0);
    put32(out, offsets[i]);
    out.insert(out.end(), e.name.begin(), e.name.end());
  }
  const auto cd_size = static_cast<std::uint32_t>(out.size()) - cd_start;
  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(files_.size()));
  put16(out, static_cast<std::uint16_t>(files_.size()));
  put32(out, cd_size);
  put32(out, cd_start);
  put16(out, 0);
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace blockscope::zip
