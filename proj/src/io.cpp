#include "stochagg/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace stochagg {

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

template <typename T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(p[b]) << (8 * b);
  return std::bit_cast<T>(bits);
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const Field& u, double t) {
  const Grid2D& g = u.grid();
  std::vector<unsigned char> out;
  out.reserve(kSnapshotHeaderBytes + 8 * u.size());
  for (char ch : kSnapshotMagic) out.push_back(static_cast<unsigned char>(ch));
  put_le<std::uint32_t>(out, kSnapshotVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(g.nx));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(g.ny));
  for (double b : {g.xmin, g.xmax, g.ymin, g.ymax, t}) put_le<double>(out, b);
  for (double v : u.values()) put_le<double>(out, v);
  return out;
}

Snapshot decode_snapshot(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kSnapshotHeaderBytes) throw FormatError("snapshot: truncated header");
  if (std::memcmp(bytes.data(), kSnapshotMagic, sizeof kSnapshotMagic) != 0) throw FormatError("snapshot: bad magic");
  const unsigned char* p = bytes.data();
  if (get_le<std::uint32_t>(p + 8) != kSnapshotVersion) throw FormatError("snapshot: unsupported version");
  const std::uint64_t nx = get_le<std::uint64_t>(p + 16);
  const std::uint64_t ny = get_le<std::uint64_t>(p + 24);
  if (nx < 3 || ny < 3 || nx > (1u << 20) || ny > (1u << 20)) throw FormatError("snapshot: corrupt dimensions");
  const double xmin = get_le<double>(p + 32), xmax = get_le<double>(p + 40);
  const double ymin = get_le<double>(p + 48), ymax = get_le<double>(p + 56);
  const double t = get_le<double>(p + 64);
  const std::size_t need = kSnapshotHeaderBytes + 8 * nx * ny;
  if (bytes.size() < need) throw FormatError("snapshot: truncated payload");
  if (bytes.size() > need) throw FormatError("snapshot: trailing bytes after payload");
  Grid2D g;
  try {
    g = Grid2D(static_cast<int>(nx), static_cast<int>(ny), xmin, xmax, ymin, ymax);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("snapshot: corrupt header: ") + e.what());
  }
  std::vector<double> vals(nx * ny);
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = get_le<double>(p + kSnapshotHeaderBytes + 8 * k);
  Snapshot s{Field(g, std::move(vals)), t};
  s.field.require_finite("snapshot");
  return s;
}

void write_snapshot(const Field& u, double t, const std::filesystem::path& path) {
  write_bytes(path, encode_snapshot(u, t));
}

Snapshot read_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_bytes(path)); }

unsigned char pgm_level(double u, double ubar) {
  const double s = std::clamp(u / ubar, 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(255.0 * s + 0.5));
}

std::vector<unsigned char> encode_pgm(const Field& u, double ubar) {
  const Grid2D& g = u.grid();
  const std::string header = "P5\n" + std::to_string(g.nx) + " " + std::to_string(g.ny) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + u.size());
  for (int j = g.ny - 1; j >= 0; --j)
    for (int i = 0; i < g.nx; ++i) out.push_back(pgm_level(u(i, j), ubar));
  return out;
}

void write_pgm(const Field& u, double ubar, const std::filesystem::path& path) { write_bytes(path, encode_pgm(u, ubar)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string snapshot_stem(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "u_t%.6g", t);
  return buf;
}

SeriesCsvSink::SeriesCsvSink(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << series_header() << "\n";
}

void SeriesCsvSink::record(const DiagnosticsRow& row, const Field&) { out_ << series_line(row) << "\n"; }

void SeriesCsvSink::flush() { out_.flush(); }

SnapshotSink::SnapshotSink(std::filesystem::path dir, bool binary, bool pgm, double ubar)
    : dir_(std::move(dir)), binary_(binary), pgm_(pgm), ubar_(ubar) {}

void SnapshotSink::record(const DiagnosticsRow& row, const Field& u) {
  const std::string stem = snapshot_stem(row.t);
  if (binary_) {
    written_.push_back(dir_ / (stem + ".bin"));
    write_snapshot(u, row.t, written_.back());
  }
  if (pgm_) {
    written_.push_back(dir_ / (stem + ".pgm"));
    write_pgm(u, ubar_, written_.back());
  }
}

std::string mass_series_csv(const PathResult& r) {
  std::string s = "t,mass,min_u,max_u\n";
  char buf[128];
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.times[k], r.mass[k], r.min_u[k], r.max_u[k]);
    s += buf;
  }
  return s;
}

}  // namespace stochagg
