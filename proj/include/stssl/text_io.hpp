/**
 * Copyright 2026 The stssl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef STSSL_TEXT_IO_HPP
#define STSSL_TEXT_IO_HPP

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stssl {

// Splits one CSV record on commas and trims surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);

// Parses a numeric cell; throws IngestionError naming the source, row and column.
double parse_cell(const std::string& cell, const std::string& source, std::size_t row, std::size_t column);

/// Flat `key = value` text as used by config, manifest and synthetic-spec
/// files. `#` starts a comment; blank lines are ignored. Duplicate keys and
/// lines without `=` are ConfigError.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& source);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& source() const { return source_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Throws ConfigError for every key outside `known`.
  void reject_unknown(const std::vector<std::string>& known) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

std::string read_text_file(const std::string& path);

}  // namespace stssl

#endif  // STSSL_TEXT_IO_HPP
