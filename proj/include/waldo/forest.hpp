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

#include "waldo/datagen.hpp"
#include "waldo/exec.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace waldo {

/// Axis-aligned decision tree node, stored flat. Internal nodes split on
/// x[feature] <= threshold (left) / > threshold (right); leaves carry the
/// per-class count distribution. Every node records its cover, the number of
/// training samples (bootstrap multiplicity included) that reached it.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double cover = 0.0;
    std::vector<double> counts; // leaves only, size n_classes

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes; // root at index 0

    /// Longest root-to-leaf path, in edges.
    int depth() const;
};

struct TrainConfig {
    int n_trees = 100;
    int max_features = 0; // 0 = ceil(sqrt(n_features))
    int min_leaf = 1;
    int max_depth = 0; // 0 = unlimited
    bool bootstrap = true;
    uint64_t seed = 0;
};

struct Forest {
    std::vector<Tree> trees;
    int n_classes = 0;
    int n_features = 0;
    TrainConfig config;
};

/// Gini impurity 1 - sum(p_i^2). Throws std::invalid_argument when the
/// counts sum to zero.
double gini(std::span<const double> counts);

/// Best (feature, threshold) over the candidate features, maximizing the
/// cover-weighted impurity decrease across midpoint thresholds between
/// consecutive distinct sorted values. Ties break toward the lower feature
/// index, then the lower threshold. nullopt when nothing decreases impurity.
std::optional<std::pair<int, double>>
best_split(const std::vector<std::vector<double>> &rows,
           const std::vector<int> &labels,
           const std::vector<int> &candidate_features, int n_classes,
           int min_leaf = 1);

/// Grows cfg.n_trees CART trees on seeded bootstrap resamples, features
/// re-subsampled at every node, grown to purity (or min_leaf / max_depth).
/// Deterministic given (matrix, cfg); Exec only changes the schedule.
/// Throws std::invalid_argument when fewer than 2 classes are present.
Forest train_forest(const TraceMatrix &matrix, const TrainConfig &cfg,
                    Exec exec = Exec::parallel);

/// Mean over trees of the normalized leaf distributions; sums to 1.
std::vector<double> predict_proba(const Forest &forest, std::span<const double> x);

/// argmax of predict_proba; ties resolve to the lowest class id.
int predict(const Forest &forest, std::span<const double> x);

/// Batch prediction (parallel over samples under Exec::parallel).
std::vector<int> predict_many(const Forest &forest, const TraceMatrix &rows,
                              Exec exec = Exec::parallel);

struct Metrics {
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion; // [true][predicted]
    std::vector<double> recall;              // per class
    int depth_min = 0;
    int depth_max = 0;
};

/// Confusion-derived metrics of predictions against labels.
Metrics evaluate(const Forest &forest, const TraceMatrix &test, Exec exec);

/// Stratified k-fold cross-validation. Per fold: fit the standardizer on the
/// train split only, transform both splits, train, evaluate. Returns one
/// Metrics per fold, with the fold forest's depth statistics.
std::vector<Metrics> cross_validate(const TraceMatrix &matrix, int k,
                                    const TrainConfig &cfg,
                                    Exec exec = Exec::parallel);

/// Structural equality (topology, thresholds, covers, counts); used by the
/// determinism tests.
bool forests_equal(const Forest &a, const Forest &b);

} // namespace waldo
