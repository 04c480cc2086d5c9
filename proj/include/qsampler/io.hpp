#ifndef QSAMPLER_IO_HPP
#define QSAMPLER_IO_HPP

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsampler/linalg.hpp"

namespace qsampler {

/// File-system failure while reading or writing an artifact.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

/// Numeric table with named columns.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width mismatch");
    rows.push_back(std::move(row));
  }
};

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

/// {"columns": [...], "rows": [[...], ...]}
inline nlohmann::json to_json(const Table& t) {
  return {{"columns", t.columns}, {"rows", t.rows}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

enum class TableFormat { csv, json };

inline TableFormat table_format_from_string(const std::string& s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "json") return TableFormat::json;
  throw InvalidArgument("format must be 'csv' or 'json', got '" + s + "'");
}

inline std::string to_string(TableFormat f) { return f == TableFormat::csv ? "csv" : "json"; }

/// Writes `<stem>.csv` or `<stem>.json` under `dir`; returns the file name.
inline std::string write_table(const std::filesystem::path& dir, const std::string& stem,
                               const Table& t, TableFormat format) {
  const std::string name = stem + (format == TableFormat::csv ? ".csv" : ".json");
  if (format == TableFormat::csv) {
    write_text(dir / name, to_csv(t));
  } else {
    write_json(dir / name, to_json(t));
  }
  return name;
}

// ---------------------------------------------------------------------------
// Complex arrays: little-endian IEEE-754 binary64 pairs (re, im), row-major.

namespace detail {

inline void put_le(std::string& out, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

inline double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::string encode_c128(const ComplexMatrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 16);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      detail::put_le(out, m(r, c).real());
      detail::put_le(out, m(r, c).imag());
    }
  return out;
}

inline ComplexMatrix decode_c128(const std::string& bytes, int n) {
  if (n < 1 || bytes.size() != static_cast<std::size_t>(n) * n * 16) {
    throw IoError("c128 payload has " + std::to_string(bytes.size()) +
                  " bytes, expected N*N*16 for N=" + std::to_string(n));
  }
  ComplexMatrix m(n, n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c, p += 16) m(r, c) = Complex(detail::get_le(p), detail::get_le(p + 8));
  return m;
}

inline nlohmann::json c128_sidecar(int n) {
  return {{"N", n}, {"layout", "row-major"}, {"format", "c128-interleaved"}};
}

/// Writes `<stem>.c128` and the sidecar `<stem>.c128.json`.
inline void write_c128(const std::filesystem::path& dir, const std::string& stem,
                       const ComplexMatrix& m) {
  detail::require_square(m, "write_c128");
  write_text(dir / (stem + ".c128"), encode_c128(m));
  write_json(dir / (stem + ".c128.json"), c128_sidecar(static_cast<int>(m.rows())));
}

/// Reads a matrix written by write_c128, checking the sidecar header.
inline ComplexMatrix read_c128(const std::filesystem::path& dir, const std::string& stem) {
  const auto header = nlohmann::json::parse(read_text(dir / (stem + ".c128.json")));
  if (header.value("layout", "") != "row-major" || header.value("format", "") != "c128-interleaved" ||
      !header.contains("N") || !header["N"].is_number_integer()) {
    throw IoError("unrecognized c128 sidecar for '" + stem + "'");
  }
  return decode_c128(read_text(dir / (stem + ".c128")), header["N"].get<int>());
}

/// [[re, im], ...] in row-major order.
inline nlohmann::json complex_pairs_json(const ComplexMatrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back({m(r, c).real(), m(r, c).imag()});
  return data;
}

}  // namespace qsampler

#endif  // QSAMPLER_IO_HPP
