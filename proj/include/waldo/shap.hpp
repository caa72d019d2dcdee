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

#include "waldo/forest.hpp"

#include <span>
#include <vector>

namespace waldo {

/// Cover-weighted expected leaf output of one tree, per class. This is the
/// model output when no feature is conditioned on.
std::vector<double> tree_expected_value(const Tree &tree, int n_classes);

/// Exact per-feature attributions of one tree for one class, conditioning by
/// per-node cover fractions along the paths. phi plus the tree's expected
/// value equals the tree output at x; features that appear in no split get
/// phi = 0. Throws std::invalid_argument when a node cover is missing
/// (<= 0) or covers are inconsistent with the children sums.
std::vector<double> tree_shap(const Tree &tree, std::span<const double> x,
                              int class_id, int n_features);

/// All classes at once (features x classes, row-major); the per-class
/// columns equal tree_shap for that class.
std::vector<double> tree_shap_all(const Tree &tree, std::span<const double> x,
                                  int n_features, int n_classes);

/// Exponential-cost reference: evaluates the Shapley sum directly, where
/// f(S) descends the tree following x on conditioned features and averaging
/// children by cover fractions otherwise. Feature count capped at 15.
std::vector<double> brute_force_shap(const Tree &tree, std::span<const double> x,
                                     int class_id, int n_features);

/// f(S) of the brute-force game, exposed for the oracle battery.
std::vector<double> brute_force_value(const Tree &tree, std::span<const double> x,
                                      uint32_t subset_mask, int n_classes);

struct ShapSampleRef {
    int row = 0;   // row index in the source matrix
    int label = 0; // class the sample was drawn for
};

/// Per-sample, per-feature, per-class attributions for a forest, plus the
/// per-class base values. Layout: values[(s * n_features + f) * n_classes + c].
struct ShapMatrix {
    int n_samples = 0;
    int n_features = 0;
    int n_classes = 0;
    std::vector<double> values;
    std::vector<double> base; // per class
    std::vector<ShapSampleRef> samples;

    double at(int s, int f, int c) const {
        return values[(static_cast<size_t>(s) * n_features + f) * n_classes + c];
    }
};

/// Mean over trees of tree_shap, matching the probability-averaged
/// prediction: base[c] + sum_f values[s,f,c] equals predict_proba(x)[c].
ShapMatrix forest_shap(const Forest &forest, const TraceMatrix &rows,
                       const std::vector<ShapSampleRef> &refs,
                       Exec exec = Exec::parallel);

struct RankedFeature {
    int feature = 0;
    double frequency_hz = 0;
    double mean_phi = 0;     // signed mean over the class's samples
    double var_phi = 0;      // population variance
    double mean_abs_phi = 0; // the ranking key
};

/// Per class: features ranked by mean |phi| over the samples drawn for that
/// class (descending; ties by feature index ascending).
struct FeatureRanking {
    std::vector<std::vector<RankedFeature>> per_class; // top_k entries each
};

FeatureRanking summarize(const ShapMatrix &shap, const FrequencyGrid &grid,
                         int top_k = 10);

struct BeeswarmRow {
    int sample = 0; // index into shap.samples
    int feature = 0;
    double frequency_hz = 0;
    double phi = 0;
    double feature_value = 0; // standardized
};

/// Rows for the top-`top_features` features of class_id (by mean |phi|),
/// one row per (feature, explained sample of that class).
std::vector<BeeswarmRow> export_beeswarm(const ShapMatrix &shap,
                                         const TraceMatrix &standardized_rows,
                                         const FrequencyGrid &grid, int class_id,
                                         int top_features = 20);

} // namespace waldo
