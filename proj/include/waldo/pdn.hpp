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

#include "waldo/types.hpp"

#include <complex>
#include <vector>

namespace waldo {

/// Series R-L-C model of a mounted decoupling capacitor:
/// Z = esr + jw(esl + l_mount) + 1/(jwC).
/// Throws std::domain_error for f <= 0 or c <= 0.
std::complex<double> cap_branch_z(double c, double esr, double esl,
                                  double l_mount, double f);

/// Chip resistor model: (r + jw(esl + l_mount)) in parallel with the package
/// capacitance cp; the series branch alone when cp = 0.
/// Throws std::domain_error for f <= 0 or r <= 0.
std::complex<double> res_branch_z(double r, double esl, double cp,
                                  double l_mount, double f);

/// Dispatches on the branch kind.
std::complex<double> branch_z(const Branch &b, double l_mount, double f);

/// Port input impedance of the full rail:
/// Z(f) = jw*l_spread + r_plane + parallel( branches..., 1/(jw*c_plane),
///        vrm_r + jw*vrm_l ).
/// A branch that is exactly zero at f shorts the parallel block, leaving
/// only the series terms. The interplane capacitor is omitted when
/// c_plane = 0 and the regulator branch when vrm_r = vrm_l = 0.
std::complex<double> pdn_impedance(const PdnInstance &inst, double f);

/// Reflection coefficient of impedance z against a real reference z0.
/// Throws std::domain_error at the z = -z0 singularity.
std::complex<double> z_to_s11(std::complex<double> z, double z0);

/// Inverse map, Z = z0 (1 + s) / (1 - s). Throws std::domain_error at s = 1.
std::complex<double> s11_to_z(std::complex<double> s, double z0);

/// |S11| over the grid. Deterministic; magnitudes clamped to <= 1 to absorb
/// last-ulp roundoff on lossless configurations.
Trace sweep(const PdnInstance &inst, const FrequencyGrid &grid);

struct Resonance {
    double frequency_hz = 0;
    double magnitude = 0;
    int index = 0;
};

/// Strict interior local minima of the magnitude vector, sorted by magnitude
/// ascending (frequency ascending on ties). The first entry is the
/// fundamental resonance. Requires magnitudes.size() == grid.points >= 3.
std::vector<Resonance> find_resonances(const std::vector<double> &magnitudes,
                                       const FrequencyGrid &grid);

} // namespace waldo
