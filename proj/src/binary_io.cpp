#include "ensemblekit/binary_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

template <class U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

template <class U>
U get_le(std::string_view bytes, std::size_t pos) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void ByteWriter::put_u32(std::uint32_t v) { put_le(bytes_, v); }
void ByteWriter::put_u64(std::uint64_t v) { put_le(bytes_, v); }
void ByteWriter::put_f32(float v) { put_le(bytes_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::put_f64(double v) { put_le(bytes_, std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_string(std::string_view s) {
  put_u32(static_cast<std::uint32_t>(s.size()));
  bytes_.append(s);
}

void ByteReader::require(std::size_t n) const {
  if (remaining() < n) {
    throw CorruptionError("truncated payload: need " + std::to_string(n) +
                          " bytes at offset " + std::to_string(pos_) + ", have " +
                          std::to_string(remaining()));
  }
}

std::uint8_t ByteReader::get_u8() {
  require(1);
  return static_cast<std::uint8_t>(bytes_[pos_++]);
}

std::uint32_t ByteReader::get_u32() {
  require(4);
  auto v = get_le<std::uint32_t>(bytes_, pos_);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::get_u64() {
  require(8);
  auto v = get_le<std::uint64_t>(bytes_, pos_);
  pos_ += 8;
  return v;
}

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }
double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::string_view ByteReader::get_bytes(std::size_t n) {
  require(n);
  auto out = bytes_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::string ByteReader::get_string() {
  const std::uint32_t n = get_u32();
  return std::string(get_bytes(n));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot write " + path.string());
  }
}

}  // namespace ensemblekit
