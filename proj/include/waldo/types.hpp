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
#include <string>
#include <vector>

namespace waldo {

/// The five part numbers populating the supply rail under test.
enum class PartId {
    C0603Cap,  // C0603-CAP-ASM, 10 uF
    C0402Cap1, // C0402-CAP-ASM-1, 0.1 uF
    C0805Cap,  // C0805-CAP-ASM, 10 uF
    C0402Cap2, // C0402-CAP-ASM-2, 2.2 uF
    Res0402,   // 0402-RES-ASM, 470 Ohm
};

constexpr int kNumParts = 5;

/// All parts in canonical board order. Branch layout and class plans follow
/// this order everywhere.
const std::vector<PartId> &all_parts();

std::string part_name(PartId id);
PartId part_from_name(const std::string &name); // throws ConfigError

enum class PartKind { Capacitor, Resistor };

/// Nominal electrical model of one part number.
/// value is farads for capacitors and ohms for resistors; esr/esl/cp are the
/// series resistance, series inductance and (resistors only) parallel
/// capacitance parasitics; count is the number of instances on the rail.
struct ComponentSpec {
    PartId part{};
    PartKind kind{};
    double value = 0;
    double esr = 0;
    double esl = 0;
    double cp = 0;
    int count = 0;
};

/// Validates invariants (positive value, nonnegative parasitics, cp only on
/// resistors, positive count). Throws std::invalid_argument.
void validate_census(const std::vector<ComponentSpec> &census);

/// Lumped model of everything on the rail that is not a discrete component:
/// port characteristic impedance, interplane capacitance, series spreading
/// inductance and plane resistance at the port, per-branch mounting
/// inductance, the regulator branch, and one damped plane mode (a series
/// R-L-C across the rail standing in for the first distributed plane
/// resonance, which the single interplane capacitor cannot reproduce).
/// A regulator with r = l = 0 is treated as absent rather than as a short;
/// mode_c = 0 disables the plane mode.
struct BoardModel {
    double z0 = 50.0;
    double c_plane = 0;
    double l_spread = 0;
    double r_plane = 0;
    double l_mount = 0;
    double vrm_r = 0;
    double vrm_l = 0;
    double mode_r = 0;
    double mode_l = 0;
    double mode_c = 0;
};

void validate_board(const BoardModel &board); // throws std::invalid_argument

/// Uniformly spaced frequency grid.
struct FrequencyGrid {
    double start_hz = 1e6;
    double stop_hz = 1e9;
    int points = 5000;

    double freq(int k) const {
        return start_hz + (stop_hz - start_hz) * static_cast<double>(k) /
                              static_cast<double>(points - 1);
    }
    double step() const {
        return (stop_hz - start_hz) / static_cast<double>(points - 1);
    }
    std::vector<double> freqs() const;
};

void validate_grid(const FrequencyGrid &grid); // throws std::invalid_argument

/// One physical component instance with sampled (possibly tampered) values.
struct Branch {
    PartId part{};
    PartKind kind{};
    double value = 0;
    double esr = 0;
    double esl = 0;
    double cp = 0;
};

/// A concrete board realization: every branch carries sampled values.
struct PdnInstance {
    std::vector<Branch> branches;
    BoardModel board;
};

/// |S11| magnitudes over a frequency grid plus the class label.
struct Trace {
    std::vector<double> magnitudes;
    int label = 0;
};

} // namespace waldo
