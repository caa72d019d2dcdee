/*
 * SPDX-License-Identifier: Apache-2.0
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
 *
 * This file is part of waldo, a PDN tamper forensics toolkit.
 */

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace waldo {

/// Minimal TOML-style parser covering what run configurations need:
/// comments, [table.header] sections, and key = value lines with string,
/// boolean, integer, float, and single-line homogeneous array values.
/// Values are stored flat under dotted keys ("grid.points").
class TomlTable {
  public:
    using Value = std::variant<bool, int64_t, double, std::string,
                               std::vector<double>, std::vector<std::string>>;

    /// Parses source text. Throws ConfigError with a line number on syntax
    /// errors. `origin` names the source in error messages.
    static TomlTable parse(const std::string &text,
                           const std::string &origin = "config");
    static TomlTable parse_file(const std::string &path);

    bool contains(const std::string &key) const { return values_.count(key) > 0; }

    /// Typed getters; each returns the fallback when the key is absent and
    /// throws ConfigError on a type mismatch. Integers promote to double.
    bool get_bool(const std::string &key, bool fallback) const;
    int64_t get_int(const std::string &key, int64_t fallback) const;
    double get_double(const std::string &key, double fallback) const;
    std::string get_string(const std::string &key, const std::string &fallback) const;
    std::vector<double> get_double_array(const std::string &key,
                                         std::vector<double> fallback) const;

    /// Keys beginning with `prefix.`, with the prefix stripped to the next
    /// path segment, deduplicated ("parts" -> {"C0603-CAP-ASM", ...}).
    std::vector<std::string> subtables(const std::string &prefix) const;

    const std::map<std::string, Value> &values() const { return values_; }

  private:
    std::map<std::string, Value> values_;
};

} // namespace waldo
