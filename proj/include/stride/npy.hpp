/*
 * Copyright (c) 2026, The STRIDE Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Minimal NPY v1.0 reader/writer. Arrays are written as little-endian float32
// ('<f4'), C order. The reader accepts '<f4' and '<f8'.

#include "stride/common.hpp"
#include "stride/spectral_noise.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace stride::npy {

struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

inline std::string header_for(const std::vector<std::size_t>& shape) {
  std::ostringstream dict;
  dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string header = dict.str();
  // magic(6) + version(2) + length(2) + header + '\n' padded to a multiple of 64
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  return header;
}

inline void write(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
                  std::span<const double> values) {
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  detail::require(count == values.size(), "npy::write: shape does not match value count");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());

  const std::string header = header_for(shape);
  const char magic[] = {'\x93', 'N', 'U', 'M', 'P', 'Y', 1, 0};
  out.write(magic, sizeof(magic));
  const auto len = static_cast<std::uint16_t>(header.size());
  const char len_bytes[] = {static_cast<char>(len & 0xFF), static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<char> buffer(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto word = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) buffer[i * 4 + b] = static_cast<char>((word >> (8 * b)) & 0xFF);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) throw io_error("write failed: " + path.string());
}

inline Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  char prefix[10];
  in.read(prefix, 10);
  if (!in || std::memcmp(prefix, "\x93NUMPY", 6) != 0) throw io_error("not an NPY file: " + path.string());
  if (prefix[6] != 1) throw io_error("unsupported NPY version: " + path.string());
  const std::size_t len = static_cast<unsigned char>(prefix[8]) | (static_cast<unsigned char>(prefix[9]) << 8);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));

  std::smatch m;
  if (!std::regex_search(header, m, std::regex("'descr':\\s*'([<|>]?[fd][48])'")))
    throw io_error("NPY header missing descr: " + path.string());
  const std::string descr = m[1];
  const bool is_f8 = descr.back() == '8';
  if (descr.front() == '>') throw io_error("big-endian NPY not supported");
  if (header.find("'fortran_order': True") != std::string::npos) throw io_error("Fortran-order NPY not supported");

  Array array;
  if (!std::regex_search(header, m, std::regex("'shape':\\s*\\(([^)]*)\\)")))
    throw io_error("NPY header missing shape: " + path.string());
  const std::string dims = m[1];
  const std::regex number("\\d+");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), number); it != std::sregex_iterator(); ++it)
    array.shape.push_back(std::stoull(it->str()));

  std::size_t count = 1;
  for (std::size_t d : array.shape) count *= d;
  const std::size_t width = is_f8 ? 8 : 4;
  std::vector<unsigned char> raw(count * width);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw io_error("truncated NPY data: " + path.string());

  array.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < width; ++b) word |= static_cast<std::uint64_t>(raw[i * width + b]) << (8 * b);
    array.values[i] = is_f8 ? std::bit_cast<double>(word)
                            : static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(word)));
  }
  return array;
}

inline void write(const std::filesystem::path& path, const noise::NoiseField& field) {
  write(path, {field.channels, field.height, field.width}, field.data);
}

inline void write(const std::filesystem::path& path, const Grid& grid) {
  write(path, {grid.height(), grid.width(), grid.channels()}, std::span<const double>(grid.data(), grid.size()));
}

inline void write(const std::filesystem::path& path, const RowMatrix& matrix) {
  write(path, {static_cast<std::size_t>(matrix.rows()), static_cast<std::size_t>(matrix.cols())},
        std::span<const double>(matrix.data(), static_cast<std::size_t>(matrix.size())));
}

}  // namespace stride::npy
