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

#include "waldo/pdn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace waldo {

using cplx = std::complex<double>;

std::complex<double> cap_branch_z(double c, double esr, double esl,
                                  double l_mount, double f) {
    if (!(f > 0))
        throw std::domain_error("cap_branch_z: frequency must be > 0");
    if (!(c > 0))
        throw std::domain_error("cap_branch_z: capacitance must be > 0");
    const double w = 2.0 * std::numbers::pi * f;
    return {esr, w * (esl + l_mount) - 1.0 / (w * c)};
}

std::complex<double> res_branch_z(double r, double esl, double cp,
                                  double l_mount, double f) {
    if (!(f > 0))
        throw std::domain_error("res_branch_z: frequency must be > 0");
    if (!(r > 0))
        throw std::domain_error("res_branch_z: resistance must be > 0");
    const double w = 2.0 * std::numbers::pi * f;
    const cplx series{r, w * (esl + l_mount)};
    if (cp == 0)
        return series;
    const cplx zc{0.0, -1.0 / (w * cp)};
    return series * zc / (series + zc);
}

std::complex<double> branch_z(const Branch &b, double l_mount, double f) {
    if (b.kind == PartKind::Capacitor)
        return cap_branch_z(b.value, b.esr, b.esl, l_mount, f);
    return res_branch_z(b.value, b.esl, b.cp, l_mount, f);
}

std::complex<double> pdn_impedance(const PdnInstance &inst, double f) {
    if (!(f > 0))
        throw std::domain_error("pdn_impedance: frequency must be > 0");
    const BoardModel &b = inst.board;
    const double w = 2.0 * std::numbers::pi * f;
    const cplx series{b.r_plane, w * b.l_spread};

    // Admittances are accumulated in sorted order so the sum is bit-identical
    // under any permutation of the branch list.
    std::vector<cplx> ys;
    ys.reserve(inst.branches.size() + 2);
    for (const Branch &br : inst.branches) {
        const cplx z = branch_z(br, b.l_mount, f);
        if (z == cplx{0.0, 0.0})
            return series; // a shorted branch shorts the whole parallel block
        ys.push_back(1.0 / z);
    }
    if (b.c_plane > 0)
        ys.push_back(cplx{0.0, w * b.c_plane});
    if (b.mode_c > 0) {
        const cplx zm{b.mode_r, w * b.mode_l - 1.0 / (w * b.mode_c)};
        if (zm == cplx{0.0, 0.0})
            return series;
        ys.push_back(1.0 / zm);
    }
    if (b.vrm_r > 0 || b.vrm_l > 0)
        ys.push_back(1.0 / cplx{b.vrm_r, w * b.vrm_l});
    if (ys.empty())
        throw std::domain_error("pdn_impedance: no parallel elements");

    std::sort(ys.begin(), ys.end(), [](const cplx &a, const cplx &c) {
        if (a.real() != c.real())
            return a.real() < c.real();
        return a.imag() < c.imag();
    });
    cplx y{0.0, 0.0};
    for (const cplx &yi : ys)
        y += yi;
    if (y == cplx{0.0, 0.0})
        throw std::domain_error("pdn_impedance: degenerate parallel block");
    return series + 1.0 / y;
}

std::complex<double> z_to_s11(std::complex<double> z, double z0) {
    if (!(z0 > 0))
        throw std::domain_error("z_to_s11: z0 must be > 0");
    const cplx denom = z + z0;
    if (denom == cplx{0.0, 0.0})
        throw std::domain_error("z_to_s11: z = -z0 singularity");
    return (z - z0) / denom;
}

std::complex<double> s11_to_z(std::complex<double> s, double z0) {
    if (!(z0 > 0))
        throw std::domain_error("s11_to_z: z0 must be > 0");
    const cplx denom = 1.0 - s;
    if (denom == cplx{0.0, 0.0})
        throw std::domain_error("s11_to_z: s = 1 singularity");
    return z0 * (1.0 + s) / denom;
}

Trace sweep(const PdnInstance &inst, const FrequencyGrid &grid) {
    validate_grid(grid);
    Trace t;
    t.magnitudes.resize(static_cast<size_t>(grid.points));
    for (int k = 0; k < grid.points; ++k) {
        const cplx z = pdn_impedance(inst, grid.freq(k));
        const double m = std::abs(z_to_s11(z, inst.board.z0));
        t.magnitudes[static_cast<size_t>(k)] = std::min(m, 1.0);
    }
    return t;
}

std::vector<Resonance> find_resonances(const std::vector<double> &magnitudes,
                                       const FrequencyGrid &grid) {
    if (magnitudes.size() != static_cast<size_t>(grid.points))
        throw std::invalid_argument("find_resonances: trace/grid size mismatch");
    if (grid.points < 3)
        throw std::invalid_argument("find_resonances: need at least 3 points");

    std::vector<Resonance> out;
    for (int k = 1; k + 1 < grid.points; ++k) {
        const double m = magnitudes[static_cast<size_t>(k)];
        if (m < magnitudes[static_cast<size_t>(k - 1)] &&
            m < magnitudes[static_cast<size_t>(k + 1)])
            out.push_back({grid.freq(k), m, k});
    }
    std::sort(out.begin(), out.end(), [](const Resonance &a, const Resonance &b) {
        if (a.magnitude != b.magnitude)
            return a.magnitude < b.magnitude;
        return a.frequency_hz < b.frequency_hz;
    });
    return out;
}

} // namespace waldo
