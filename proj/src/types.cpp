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

#include "waldo/types.hpp"

#include "waldo/errors.hpp"

#include <stdexcept>

namespace waldo {

const std::vector<PartId> &all_parts() {
    static const std::vector<PartId> parts = {
        PartId::C0603Cap, PartId::C0402Cap1, PartId::C0805Cap,
        PartId::C0402Cap2, PartId::Res0402,
    };
    return parts;
}

std::string part_name(PartId id) {
    switch (id) {
    case PartId::C0603Cap:
        return "C0603-CAP-ASM";
    case PartId::C0402Cap1:
        return "C0402-CAP-ASM-1";
    case PartId::C0805Cap:
        return "C0805-CAP-ASM";
    case PartId::C0402Cap2:
        return "C0402-CAP-ASM-2";
    case PartId::Res0402:
        return "0402-RES-ASM";
    }
    throw std::invalid_argument("unknown part id");
}

PartId part_from_name(const std::string &name) {
    for (PartId id : all_parts())
        if (part_name(id) == name)
            return id;
    throw ConfigError("unknown part number: " + name);
}

void validate_census(const std::vector<ComponentSpec> &census) {
    if (census.empty())
        throw std::invalid_argument("census: empty part list");
    for (const auto &c : census) {
        const std::string name = part_name(c.part);
        if (c.value <= 0)
            throw std::invalid_argument("census: " + name + ": value must be > 0");
        if (c.esr < 0 || c.esl < 0 || c.cp < 0)
            throw std::invalid_argument("census: " + name + ": parasitics must be >= 0");
        if (c.kind == PartKind::Capacitor && c.cp != 0)
            throw std::invalid_argument("census: " + name + ": capacitors carry no cp");
        if (c.count <= 0)
            throw std::invalid_argument("census: " + name + ": count must be positive");
    }
}

void validate_board(const BoardModel &board) {
    if (board.z0 <= 0)
        throw std::invalid_argument("board: z0 must be > 0");
    if (board.c_plane < 0 || board.l_spread < 0 || board.r_plane < 0 ||
        board.l_mount < 0 || board.vrm_r < 0 || board.vrm_l < 0 ||
        board.mode_r < 0 || board.mode_l < 0 || board.mode_c < 0)
        throw std::invalid_argument("board: parameters must be >= 0");
}

std::vector<double> FrequencyGrid::freqs() const {
    std::vector<double> out(static_cast<size_t>(points));
    for (int k = 0; k < points; ++k)
        out[static_cast<size_t>(k)] = freq(k);
    return out;
}

void validate_grid(const FrequencyGrid &grid) {
    if (!(grid.start_hz > 0))
        throw std::invalid_argument("grid: start_hz must be > 0");
    if (!(grid.start_hz < grid.stop_hz))
        throw std::invalid_argument("grid: start_hz must be < stop_hz");
    if (grid.points < 2)
        throw std::invalid_argument("grid: points must be >= 2");
}

} // namespace waldo
