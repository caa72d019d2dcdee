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

namespace waldo {

/// Execution policy for the data-parallel kernels. Every kernel has a plain
/// serial loop (the reference) and an OpenMP version; both must produce
/// bit-identical results, which the test suite asserts. Work units are
/// independent and seeded individually, so thread count and schedule never
/// influence the output.
enum class Exec {
    serial,
    parallel,
};

} // namespace waldo
