#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "prefixgan/numeric.hpp"

namespace prefixgan {

/// Little-endian binary blob writer for model checkpoints.
class BinWriter {
 public:
  explicit BinWriter(const std::filesystem::path& file);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v);
  void f64(double v);
  void str(const std::string& s);
  void mat(const Mat& m);
  void close();

 private:
  std::ofstream os_;
};

class BinReader {
 public:
  explicit BinReader(const std::filesystem::path& file);
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32();
  double f64();
  std::string str();
  Mat mat();

 private:
  std::ifstream is_;
};

inline constexpr std::uint32_t kCheckpointMagic = 0x4b434750u;  // "PGCK"
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class BlobKind : std::uint32_t { oracle = 1, generator = 2, discriminator = 3 };

void write_blob_header(BinWriter& w, BlobKind kind);
BlobKind read_blob_header(BinReader& r);

}  // namespace prefixgan
