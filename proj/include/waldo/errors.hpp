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

#include <stdexcept>
#include <string>

namespace waldo {

/// Bad run configuration or command-line usage. CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Missing, unreadable, or inconsistent data artifacts. CLI exit code 3.
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

/// A self-verification battery reported a failure. CLI exit code 4.
class CheckError : public std::runtime_error {
  public:
    explicit CheckError(const std::string &msg) : std::runtime_error(msg) {}
};

namespace exit_code {
constexpr int ok = 0;
constexpr int unexpected = 1;
constexpr int config_error = 2;
constexpr int data_error = 3;
constexpr int check_failure = 4;
} // namespace exit_code

} // namespace waldo
