#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochagg/diagnostics.hpp"
#include "stochagg/grid.hpp"
#include "stochagg/stepper.hpp"

namespace stochagg {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary snapshot, little-endian throughout:
//   0  char[8]  "SAGGSNAP"
//   8  u32      version (1)
//   12 u32      reserved (0)
//   16 u64      nx
//   24 u64      ny
//   32 f64 x4   xmin, xmax, ymin, ymax
//   64 f64      t
//   72 f64[nx*ny] values, j-major with i contiguous
inline constexpr char kSnapshotMagic[8] = {'S', 'A', 'G', 'G', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 72;

struct Snapshot {
  Field field;
  double t = 0.0;
};

std::vector<unsigned char> encode_snapshot(const Field& u, double t);
Snapshot decode_snapshot(const std::vector<unsigned char>& bytes);
void write_snapshot(const Field& u, double t, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);

// 8-bit binary PGM (P5). Pixel = floor(255 * clamp(u/ubar, 0, 1) + 0.5);
// the first image row is j = ny-1 so +y points up.
unsigned char pgm_level(double u, double ubar);
std::vector<unsigned char> encode_pgm(const Field& u, double ubar);
void write_pgm(const Field& u, double ubar, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// File stem used for a record at time t, e.g. "u_t4".
std::string snapshot_stem(double t);

// series.csv sink (header + one diagnostics row per record).
class SeriesCsvSink : public PathSink {
 public:
  explicit SeriesCsvSink(const std::filesystem::path& path);
  void record(const DiagnosticsRow& row, const Field& u) override;
  void flush() override;

 private:
  std::ofstream out_;
};

// Writes <stem>.bin and optionally <stem>.pgm per record.
class SnapshotSink : public PathSink {
 public:
  SnapshotSink(std::filesystem::path dir, bool binary, bool pgm, double ubar);
  void record(const DiagnosticsRow& row, const Field& u) override;
  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  bool binary_;
  bool pgm_;
  double ubar_;
  std::vector<std::filesystem::path> written_;
};

// Per-step mass/min/max table.
std::string mass_series_csv(const PathResult& r);

}  // namespace stochagg
