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

#include "waldo/exec.hpp"
#include "waldo/rng.hpp"
#include "waldo/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace waldo {

/// Which parasitic of the target part a tampered class perturbs.
enum class TamperField { None, Esl, Esr, Cp };

std::string tamper_field_name(TamperField f);

/// One row of the class plan. Genuine subgroups share class_id 0 and an
/// empty multiplier list; tampered classes 1-10 scale the target part's
/// value by one multiplier per trace and jitter a single parasitic.
struct ClassSpec {
    int class_id = 0;
    PartId target{};
    TamperField field = TamperField::None;
    std::vector<double> multipliers; // empty for genuine
    double halfwidth = 0.10;
    int traces = 0;
};

/// Human-readable class name ("Genuine", "C0603-CAP-ASM-T-ESL", ...).
std::string class_name(int class_id);

constexpr int kNumClasses = 11;

/// The full 15-row plan (5 genuine subgroups + 10 tampered classes) in
/// canonical order.
std::vector<ClassSpec> standard_plan(int genuine_per_subgroup,
                                     int tampered_per_class,
                                     double genuine_halfwidth = 0.10,
                                     double tampered_halfwidth = 0.20,
                                     std::vector<double> multipliers = {10.0, 100.0, 1000.0});

/// Expands the census into the branch list, every part at nominal.
PdnInstance nominal_instance(const std::vector<ComponentSpec> &census,
                             const BoardModel &board);

/// Genuine draw: every instance of subgroup_part gets its value and both
/// tolerance-listed parasitics (esl+esr for capacitors, esl+cp for the
/// resistor) drawn independently, uniform in +-halfwidth around nominal.
/// All other parts stay nominal.
PdnInstance sample_genuine(const std::vector<ComponentSpec> &census,
                           const BoardModel &board, PartId subgroup_part,
                           double halfwidth, Rng &rng);

/// Tampered draw: one multiplier chosen uniformly from spec.multipliers and
/// applied to the value of every instance of spec.target; the spec.field
/// parasitic of those instances drawn uniform in +-spec.halfwidth around
/// nominal; everything else nominal.
PdnInstance sample_tampered(const std::vector<ComponentSpec> &census,
                            const BoardModel &board, const ClassSpec &spec,
                            Rng &rng);

/// Row-major labeled trace matrix.
struct TraceMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> values; // n_rows * n_cols
    std::vector<int> labels;    // n_rows
    FrequencyGrid grid;

    double *row(int r) { return values.data() + static_cast<size_t>(r) * n_cols; }
    const double *row(int r) const {
        return values.data() + static_cast<size_t>(r) * n_cols;
    }
    std::span<const double> row_span(int r) const { return {row(r), static_cast<size_t>(n_cols)}; }
};

/// Samples and sweeps every trace of the plan. Per-trace rng streams are
/// derived from (master_seed, class_id, index within class), so the result
/// is bit-reproducible and independent of the execution policy.
TraceMatrix generate_dataset(const std::vector<ClassSpec> &plan,
                             const FrequencyGrid &grid,
                             const std::vector<ComponentSpec> &census,
                             const BoardModel &board, uint64_t master_seed,
                             Exec exec = Exec::parallel);

/// Per-feature mean and population standard deviation. Features whose
/// deviation is zero are only mean-centered on apply.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sigma; // 0 marks a constant feature
};

/// Fits on the given rows only (all rows when row_indices is empty).
/// Requires at least 2 rows.
Standardizer fit_standardizer(const TraceMatrix &m,
                              const std::vector<int> &row_indices = {});

/// Returns the standardized copy of the selected rows (all when empty), in
/// the order given. Labels are carried over.
TraceMatrix apply_standardizer(const Standardizer &s, const TraceMatrix &m,
                               const std::vector<int> &row_indices = {});

void standardize_row(const Standardizer &s, const double *in, double *out, int n);
void unstandardize_row(const Standardizer &s, const double *in, double *out, int n);

/// Stratified k-fold assignment; per-class fold sizes differ by at most 1.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignment; // per-row fold index in [0, k)
};

/// Throws std::invalid_argument for k < 2 or when a class (named in the
/// message) has fewer than k members.
FoldPlan stratified_kfold(const std::vector<int> &labels, int k, uint64_t seed);

/// Classic dynamic-programming DTW with |a_i - b_j| local cost and steps
/// {(i-1,j), (i,j-1), (i-1,j-1)}. Throws std::invalid_argument on empty input.
double dtw_distance(std::span<const double> a, std::span<const double> b);

/// A cost-minimizing warping path, as (i, j) pairs from (0,0) to (n-1,m-1).
/// The pointwise cost sum along the path equals dtw_distance(a, b).
std::vector<std::pair<int, int>> dtw_align(std::span<const double> a,
                                           std::span<const double> b);

} // namespace waldo
