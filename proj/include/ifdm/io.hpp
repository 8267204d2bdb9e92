// Bit-exact field persistence and CSV diagnostics.
//
// FieldFile layout: a short ASCII header terminated by the "data <nbytes>"
// line, then the raw payload. Doubles are stored little-endian regardless
// of host, component slowest, x1 fastest.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ifdm/grid.hpp"

namespace ifdm {

inline constexpr const char* kFieldMagic = "IFDM";
inline constexpr int kFieldVersion = 1;

namespace detail {

inline std::uint64_t bswap64(std::uint64_t x) {
  x = ((x & 0x00000000FFFFFFFFull) << 32) | (x >> 32);
  x = ((x & 0x0000FFFF0000FFFFull) << 16) | ((x >> 16) & 0x0000FFFF0000FFFFull);
  x = ((x & 0x00FF00FF00FF00FFull) << 8) | ((x >> 8) & 0x00FF00FF00FF00FFull);
  return x;
}

inline void doubles_to_le(const Real* src, std::size_t count, std::vector<char>& out) {
  out.resize(count * 8);
  std::memcpy(out.data(), src, count * 8);
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t* p = reinterpret_cast<std::uint64_t*>(out.data());
    for (std::size_t i = 0; i < count; ++i) p[i] = bswap64(p[i]);
  }
}

inline void le_to_doubles(const char* src, std::size_t count, Real* dst) {
  std::memcpy(dst, src, count * 8);
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t* p = reinterpret_cast<std::uint64_t*>(dst);
    for (std::size_t i = 0; i < count; ++i) p[i] = bswap64(p[i]);
  }
}

inline std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace detail

inline void write_field(const std::string& path, const std::string& name,
                        const Field& f, Real sim_time = 0.0) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_field: cannot open " + path);
  const std::size_t nbytes = f.data.size() * 8;
  char timebuf[64];
  std::snprintf(timebuf, sizeof timebuf, "%.17g", sim_time);
  out << kFieldMagic << ' ' << kFieldVersion << '\n'
      << "name " << name << '\n'
      << "grid " << f.grid.n << ' ' << f.grid.n << ' ' << f.grid.n << '\n'
      << "components " << f.comps << '\n'
      << "dtype f64 little-endian\n"
      << "layout component-slowest x1-fastest\n"
      << "time " << timebuf << '\n'
      << "created " << detail::iso8601_now() << '\n'
      << "data " << nbytes << '\n';
  std::vector<char> payload;
  detail::doubles_to_le(f.data.data(), f.data.size(), payload);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write_field: short write to " + path);
}

struct LoadedField {
  Field field;
  std::string name;
  Real sim_time = 0.0;
};

inline LoadedField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_field: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("read_field: empty file " + path);
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != kFieldMagic)
      throw IoError("read_field: bad magic in " + path);
    if (version != kFieldVersion)
      throw IoError("read_field: unsupported version in " + path);
  }
  LoadedField res;
  int n = 0, comps = 0;
  std::size_t nbytes = 0;
  bool have_data = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "name") {
      ls >> res.name;
    } else if (key == "grid") {
      int n2 = 0, n3 = 0;
      ls >> n >> n2 >> n3;
      if (n != n2 || n != n3)
        throw IoError("read_field: non-cubic grid in " + path);
    } else if (key == "components") {
      ls >> comps;
    } else if (key == "time") {
      ls >> res.sim_time;
    } else if (key == "data") {
      ls >> nbytes;
      have_data = true;
      break;
    } else if (key == "dtype" || key == "layout" || key == "created") {
      // informational
    } else {
      throw IoError("read_field: unknown header key '" + key + "' in " + path);
    }
  }
  if (!have_data || n < 4 || comps < 1)
    throw IoError("read_field: incomplete header in " + path);
  const std::size_t expect =
      8ull * comps * static_cast<std::size_t>(n) * n * n;
  if (nbytes != expect)
    throw IoError("read_field: payload length mismatch in " + path);
  std::vector<char> payload(nbytes);
  in.read(payload.data(), static_cast<std::streamsize>(nbytes));
  if (static_cast<std::size_t>(in.gcount()) != nbytes)
    throw IoError("read_field: truncated payload in " + path);
  res.field = Field(PeriodicGrid(n), comps);
  detail::le_to_doubles(payload.data(), res.field.data.size(),
                        res.field.data.data());
  return res;
}

// Minimal CSV writer; always emits the header row first.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw IoError("CsvWriter: cannot open " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    out_ << '\n';
  }

  void row(const std::vector<Real>& values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << buf << (i + 1 < values.size() ? "," : "");
    }
    out_ << '\n';
  }

  void row_mixed(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << values[i] << (i + 1 < values.size() ? "," : "");
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace ifdm
