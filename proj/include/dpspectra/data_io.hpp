//
// Copyright 2026 The dpspectra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// DataMatrix file formats.
//
// Binary: magic "DPSP", then p and n as little-endian uint64, then p*n
// little-endian IEEE-754 doubles in column-major order (sample by sample).
// CSV: p lines of n comma-separated values; column j is sample j.

#ifndef DPSPECTRA_DATA_IO_HPP_
#define DPSPECTRA_DATA_IO_HPP_

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dpspectra/errors.hpp"
#include "dpspectra/spiked_model.hpp"

namespace dpspectra {

namespace io_internal {

inline constexpr std::array<char, 4> kMagic = {'D', 'P', 'S', 'P'};

template <typename T>
void PutLittleEndian(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  unsigned char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

template <typename T>
T GetLittleEndian(std::istream& is) {
  static_assert(sizeof(T) == 8);
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw IoError("DPSP file truncated");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

inline std::string FormatDouble(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace io_internal

inline void WriteBinary(std::ostream& os, const DataMatrix& x) {
  os.write(io_internal::kMagic.data(), 4);
  io_internal::PutLittleEndian<std::uint64_t>(os, static_cast<std::uint64_t>(x.p()));
  io_internal::PutLittleEndian<std::uint64_t>(os, static_cast<std::uint64_t>(x.n()));
  const Matrix& m = x.columns();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) io_internal::PutLittleEndian<double>(os, m(i, j));
  }
  if (!os) throw IoError("failed writing DPSP stream");
}

inline DataMatrix ReadBinary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != io_internal::kMagic) {
    throw IoError("not a DPSP file (bad magic)");
  }
  const auto p = io_internal::GetLittleEndian<std::uint64_t>(is);
  const auto n = io_internal::GetLittleEndian<std::uint64_t>(is);
  if (p == 0 || n == 0 || p > (1ULL << 24) || n > (1ULL << 32)) {
    throw IoError("DPSP header has implausible dimensions");
  }
  Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = io_internal::GetLittleEndian<double>(is);
  }
  return DataMatrix(std::move(m));
}

inline void WriteCsv(std::ostream& os, const DataMatrix& x) {
  const Matrix& m = x.columns();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ',';
      os << io_internal::FormatDouble(m(i, j));
    }
    os << '\n';
  }
  if (!os) throw IoError("failed writing CSV stream");
}

inline DataMatrix ReadCsv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const char* first = line.data() + pos;
      const char* last = line.data() + comma;
      while (first < last && *first == ' ') ++first;
      double v = 0.0;
      auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last) {
        throw IoError("CSV: cannot parse value '" + std::string(first, last) + "'");
      }
      row.push_back(v);
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("CSV: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("CSV: no data");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return DataMatrix(std::move(m));
}

// Dispatches on extension: ".csv" is text, anything else is DPSP binary.
inline DataMatrix LoadDataMatrix(const std::string& path) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  std::ifstream in(path, csv ? std::ios::in : std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return csv ? ReadCsv(in) : ReadBinary(in);
}

inline void SaveDataMatrix(const std::string& path, const DataMatrix& x) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  std::ofstream out(path, csv ? std::ios::out : std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  if (csv) {
    WriteCsv(out, x);
  } else {
    WriteBinary(out, x);
  }
}

}  // namespace dpspectra

#endif  // DPSPECTRA_DATA_IO_HPP_
