#include "prefixgan/checkpoint.hpp"

#include <stdexcept>

namespace prefixgan {

BinWriter::BinWriter(const std::filesystem::path& file)
    : os_(file, std::ios::binary) {
  if (!os_) throw std::runtime_error("BinWriter: cannot open " + file.string());
}

void BinWriter::u32(std::uint32_t v) { os_.write(reinterpret_cast<const char*>(&v), 4); }
void BinWriter::u64(std::uint64_t v) { os_.write(reinterpret_cast<const char*>(&v), 8); }
void BinWriter::i32(std::int32_t v) { os_.write(reinterpret_cast<const char*>(&v), 4); }
void BinWriter::f64(double v) { os_.write(reinterpret_cast<const char*>(&v), 8); }

void BinWriter::str(const std::string& s) {
  u64(s.size());
  os_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinWriter::mat(const Mat& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  os_.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

void BinWriter::close() {
  os_.close();
  if (os_.fail()) throw std::runtime_error("BinWriter: write failure on close");
}

BinReader::BinReader(const std::filesystem::path& file)
    : is_(file, std::ios::binary) {
  if (!is_) throw std::runtime_error("BinReader: cannot open " + file.string());
}

std::uint32_t BinReader::u32() {
  std::uint32_t v = 0;
  is_.read(reinterpret_cast<char*>(&v), 4);
  if (!is_) throw std::runtime_error("BinReader: truncated blob");
  return v;
}

std::uint64_t BinReader::u64() {
  std::uint64_t v = 0;
  is_.read(reinterpret_cast<char*>(&v), 8);
  if (!is_) throw std::runtime_error("BinReader: truncated blob");
  return v;
}

std::int32_t BinReader::i32() {
  std::int32_t v = 0;
  is_.read(reinterpret_cast<char*>(&v), 4);
  if (!is_) throw std::runtime_error("BinReader: truncated blob");
  return v;
}

double BinReader::f64() {
  double v = 0;
  is_.read(reinterpret_cast<char*>(&v), 8);
  if (!is_) throw std::runtime_error("BinReader: truncated blob");
  return v;
}

std::string BinReader::str() {
  const std::uint64_t n = u64();
  std::string s(n, '\0');
  is_.read(s.data(), static_cast<std::streamsize>(n));
  if (!is_) throw std::runtime_error("BinReader: truncated blob");
  return s;
}

Mat BinReader::mat() {
  const std::uint64_t rows = u64();
  const std::uint64_t cols = u64();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  is_.read(reinterpret_cast<char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is_) throw std::runtime_error("BinReader: truncated blob");
  return m;
}

void write_blob_header(BinWriter& w, BlobKind kind) {
  w.u32(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(kind));
}

BlobKind read_blob_header(BinReader& r) {
  if (r.u32() != kCheckpointMagic) throw std::runtime_error("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported format version " +
                             std::to_string(version));
  return static_cast<BlobKind>(r.u32());
}

}  // namespace prefixgan
