// Copyright 2026 The speccf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared helpers for the versioned text model formats.

#ifndef SPECCF_SRC_TEXT_IO_HPP
#define SPECCF_SRC_TEXT_IO_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Core>

#include "speccf/error.hpp"

namespace speccf::text_io {

inline void write_double(std::ostream& out, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.write(buf, res.ptr - buf);
}

inline void write_row(std::ostream& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (i) out << ' ';
    write_double(out, row(i));
  }
  out << '\n';
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

inline std::int64_t parse_int(std::string_view tok, ErrorKind kind, const std::string& what) {
  std::int64_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(kind, what + ": '" + std::string(tok) + "' is not an integer");
  }
  return v;
}

inline double parse_double(std::string_view tok, std::int64_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec == std::errc::result_out_of_range) {
    throw Error(ErrorKind::kNonFinite,
                "value out of range at line " + std::to_string(line_no), line_no);
  }
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(ErrorKind::kParse,
                "bad number '" + std::string(tok) + "' at line " + std::to_string(line_no),
                line_no);
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::kNonFinite, "non-finite value at line " + std::to_string(line_no),
                line_no);
  }
  return v;
}

/// Line reader that tracks line numbers and reports truncation.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    return true;
  }

  std::int64_t line_no() const { return line_no_; }

  /// Reads a row of exactly `expected` numbers.
  Eigen::RowVectorXd row(Eigen::Index expected, const char* what) {
    std::string line;
    if (!next(line)) {
      throw Error(ErrorKind::kTruncated,
                  std::string("file truncated: missing ") + what + " at line " +
                      std::to_string(line_no_ + 1),
                  line_no_ + 1);
    }
    const auto tokens = split_ws(line);
    if (static_cast<Eigen::Index>(tokens.size()) != expected) {
      throw Error(ErrorKind::kDimensionMismatch,
                  std::string(what) + " at line " + std::to_string(line_no_) + " has " +
                      std::to_string(tokens.size()) + " values, expected " +
                      std::to_string(expected),
                  line_no_);
    }
    Eigen::RowVectorXd out(expected);
    for (Eigen::Index i = 0; i < expected; ++i) {
      out(i) = parse_double(tokens[static_cast<std::size_t>(i)], line_no_);
    }
    return out;
  }

  /// Throws if anything but blank lines follows.
  void expect_end() {
    std::string line;
    while (next(line)) {
      if (!split_ws(line).empty()) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "unexpected data after last row at line " + std::to_string(line_no_),
                    line_no_);
      }
    }
  }

 private:
  std::istream& in_;
  std::int64_t line_no_ = 0;
};

}  // namespace speccf::text_io

#endif  // SPECCF_SRC_TEXT_IO_HPP
