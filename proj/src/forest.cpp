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

#include "waldo/forest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <stdexcept>

namespace waldo {

int Tree::depth() const {
    if (nodes.empty())
        return 0;
    int max_depth = 0;
    // Iterative DFS with explicit depths.
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        const TreeNode &n = nodes[static_cast<size_t>(idx)];
        if (n.is_leaf()) {
            max_depth = std::max(max_depth, d);
        } else {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return max_depth;
}

double gini(std::span<const double> counts) {
    double total = 0.0;
    for (double c : counts) {
        if (c < 0)
            throw std::invalid_argument("gini: negative count");
        total += c;
    }
    if (total <= 0)
        throw std::invalid_argument("gini: empty distribution");
    double sum_sq = 0.0;
    for (double c : counts) {
        const double p = c / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

// Shared split search over a flat matrix and a row-index window.
struct SplitResult {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

// Scans one feature; updates best under the (gain, feature, threshold) tie
// order. Assumes candidate features are visited in ascending index order.
void scan_feature(const double *data, int stride,
                  std::span<const int> row_idx, const int *labels,
                  int n_classes, int feature, int min_leaf,
                  double parent_gini, std::vector<std::pair<double, int>> &scratch,
                  std::vector<double> &left_counts,
                  std::vector<double> &right_counts,
                  const std::vector<double> &total_counts, SplitResult &best) {
    const size_t n = row_idx.size();
    scratch.clear();
    for (int r : row_idx)
        scratch.emplace_back(data[static_cast<size_t>(r) * stride + feature],
                             labels[r]);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });

    left_counts.assign(static_cast<size_t>(n_classes), 0.0);
    right_counts = total_counts;
    const double total = static_cast<double>(n);

    for (size_t i = 0; i + 1 < n; ++i) {
        const int cls = scratch[i].second;
        left_counts[static_cast<size_t>(cls)] += 1.0;
        right_counts[static_cast<size_t>(cls)] -= 1.0;
        if (scratch[i].first == scratch[i + 1].first)
            continue; // thresholds only between distinct values
        const double n_left = static_cast<double>(i + 1);
        const double n_right = total - n_left;
        if (n_left < min_leaf || n_right < min_leaf)
            continue;
        const double decrease = parent_gini -
                                (n_left * gini(left_counts) +
                                 n_right * gini(right_counts)) /
                                    total;
        if (decrease > best.decrease) {
            double thr = (scratch[i].first + scratch[i + 1].first) / 2.0;
            // Adjacent representable values can round the midpoint up onto
            // the right value; fall back to the left value so the split
            // stays nonempty on both sides.
            if (thr >= scratch[i + 1].first)
                thr = scratch[i].first;
            best = {feature, thr, decrease};
        }
    }
}

class TreeBuilder {
  public:
    TreeBuilder(const TraceMatrix &m, const TrainConfig &cfg, int n_classes,
                Rng rng)
        : m_(m), cfg_(cfg), n_classes_(n_classes), rng_(rng) {
        max_features_ = cfg.max_features > 0
                            ? std::min(cfg.max_features, m.n_cols)
                            : static_cast<int>(
                                  std::ceil(std::sqrt(static_cast<double>(m.n_cols))));
        feature_pool_.resize(static_cast<size_t>(m.n_cols));
        for (int j = 0; j < m.n_cols; ++j)
            feature_pool_[static_cast<size_t>(j)] = j;
    }

    Tree build() {
        std::vector<int> rows;
        const size_t n = static_cast<size_t>(m_.n_rows);
        rows.reserve(n);
        if (cfg_.bootstrap) {
            for (size_t i = 0; i < n; ++i)
                rows.push_back(static_cast<int>(rng_.uniform_index(n)));
        } else {
            for (size_t i = 0; i < n; ++i)
                rows.push_back(static_cast<int>(i));
        }
        Tree tree;
        grow(tree, rows, 0);
        return tree;
    }

  private:
    std::vector<double> histogram(const std::vector<int> &rows) const {
        std::vector<double> counts(static_cast<size_t>(n_classes_), 0.0);
        for (int r : rows)
            counts[static_cast<size_t>(m_.labels[static_cast<size_t>(r)])] += 1.0;
        return counts;
    }

    // Samples max_features distinct features, returned in ascending order so
    // the tie rule (lowest feature index wins) is honored by a simple scan.
    std::vector<int> sample_features() {
        std::vector<int> &pool = feature_pool_;
        const size_t mf = static_cast<size_t>(max_features_);
        for (size_t i = 0; i < mf; ++i) {
            const size_t j = i + static_cast<size_t>(
                                     rng_.uniform_index(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> chosen(pool.begin(), pool.begin() + static_cast<long>(mf));
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    int grow(Tree &tree, const std::vector<int> &rows, int depth) {
        const int node_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::vector<double> counts = histogram(rows);
        tree.nodes[static_cast<size_t>(node_idx)].cover =
            static_cast<double>(rows.size());

        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](double c) { return c > 0; }) <= 1;
        const bool depth_capped = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
        std::optional<SplitResult> split;
        if (!pure && !depth_capped &&
            rows.size() >= 2 * static_cast<size_t>(cfg_.min_leaf)) {
            split = find_split(rows, counts);
        }
        if (!split) {
            tree.nodes[static_cast<size_t>(node_idx)].counts = std::move(counts);
            return node_idx;
        }

        std::vector<int> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (int r : rows) {
            const double v =
                m_.row(r)[split->feature];
            (v <= split->threshold ? left_rows : right_rows).push_back(r);
        }

        tree.nodes[static_cast<size_t>(node_idx)].feature = split->feature;
        tree.nodes[static_cast<size_t>(node_idx)].threshold = split->threshold;
        const int left = grow(tree, left_rows, depth + 1);
        const int right = grow(tree, right_rows, depth + 1);
        tree.nodes[static_cast<size_t>(node_idx)].left = left;
        tree.nodes[static_cast<size_t>(node_idx)].right = right;
        return node_idx;
    }

    std::optional<SplitResult> find_split(const std::vector<int> &rows,
                                          const std::vector<double> &counts) {
        const std::vector<int> features = sample_features();
        const double parent = gini(counts);
        SplitResult best;
        for (int f : features)
            scan_feature(m_.values.data(), m_.n_cols, rows, m_.labels.data(),
                         n_classes_, f, cfg_.min_leaf, parent, scratch_,
                         left_scratch_, right_scratch_, counts, best);
        if (best.feature < 0)
            return std::nullopt;
        return best;
    }

    const TraceMatrix &m_;
    const TrainConfig &cfg_;
    int n_classes_;
    int max_features_;
    Rng rng_;
    std::vector<int> feature_pool_;
    std::vector<std::pair<double, int>> scratch_;
    std::vector<double> left_scratch_, right_scratch_;
};

int count_classes(const std::vector<int> &labels) {
    int max_label = -1;
    for (int l : labels) {
        if (l < 0)
            throw std::invalid_argument("labels must be nonnegative");
        max_label = std::max(max_label, l);
    }
    return max_label + 1;
}

} // namespace

std::optional<std::pair<int, double>>
best_split(const std::vector<std::vector<double>> &rows,
           const std::vector<int> &labels,
           const std::vector<int> &candidate_features, int n_classes,
           int min_leaf) {
    if (rows.size() < 2)
        throw std::invalid_argument("best_split: need at least 2 rows");
    TraceMatrix m;
    m.n_rows = static_cast<int>(rows.size());
    m.n_cols = static_cast<int>(rows.front().size());
    m.labels = labels;
    m.values.reserve(static_cast<size_t>(m.n_rows) * m.n_cols);
    for (const auto &r : rows)
        m.values.insert(m.values.end(), r.begin(), r.end());

    std::vector<int> all_rows(rows.size());
    for (size_t i = 0; i < rows.size(); ++i)
        all_rows[i] = static_cast<int>(i);
    std::vector<double> counts(static_cast<size_t>(n_classes), 0.0);
    for (int l : labels)
        counts[static_cast<size_t>(l)] += 1.0;

    std::vector<int> features = candidate_features;
    std::sort(features.begin(), features.end());
    const double parent = gini(counts);
    SplitResult best;
    std::vector<std::pair<double, int>> scratch;
    std::vector<double> ls, rs;
    for (int f : features)
        scan_feature(m.values.data(), m.n_cols, all_rows, m.labels.data(),
                     n_classes, f, min_leaf, parent, scratch, ls, rs, counts,
                     best);
    if (best.feature < 0)
        return std::nullopt;
    return std::make_pair(best.feature, best.threshold);
}

Forest train_forest(const TraceMatrix &matrix, const TrainConfig &cfg,
                    Exec exec) {
    if (matrix.n_rows < 2)
        throw std::invalid_argument("train_forest: need at least 2 rows");
    if (cfg.n_trees < 1)
        throw std::invalid_argument("train_forest: need at least 1 tree");
    const int n_classes = count_classes(matrix.labels);
    std::set<int> distinct(matrix.labels.begin(), matrix.labels.end());
    if (distinct.size() < 2)
        throw std::invalid_argument("train_forest: single-class data");

    Forest forest;
    forest.n_classes = n_classes;
    forest.n_features = matrix.n_cols;
    forest.config = cfg;
    forest.trees.resize(static_cast<size_t>(cfg.n_trees));

    std::exception_ptr error;
    auto build_one = [&](int t) {
        Rng rng = derive_stream(cfg.seed, 0x7ee5ULL, static_cast<uint64_t>(t));
        TreeBuilder builder(matrix, cfg, n_classes, rng);
        forest.trees[static_cast<size_t>(t)] = builder.build();
    };

    if (exec == Exec::serial) {
        for (int t = 0; t < cfg.n_trees; ++t)
            build_one(t);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < cfg.n_trees; ++t) {
            try {
                build_one(t);
            } catch (...) {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
    }
    return forest;
}

namespace {

const TreeNode &leaf_for(const Tree &tree, std::span<const double> x) {
    const TreeNode *node = &tree.nodes.front();
    while (!node->is_leaf()) {
        const int next = x[static_cast<size_t>(node->feature)] <= node->threshold
                             ? node->left
                             : node->right;
        node = &tree.nodes[static_cast<size_t>(next)];
    }
    return *node;
}

} // namespace

std::vector<double> predict_proba(const Forest &forest, std::span<const double> x) {
    if (x.size() != static_cast<size_t>(forest.n_features))
        throw std::invalid_argument("predict_proba: feature dimension mismatch");
    std::vector<double> proba(static_cast<size_t>(forest.n_classes), 0.0);
    for (const Tree &tree : forest.trees) {
        const TreeNode &leaf = leaf_for(tree, x);
        for (int c = 0; c < forest.n_classes; ++c)
            proba[static_cast<size_t>(c)] +=
                leaf.counts[static_cast<size_t>(c)] / leaf.cover;
    }
    const double n = static_cast<double>(forest.trees.size());
    for (double &p : proba)
        p /= n;
    return proba;
}

int predict(const Forest &forest, std::span<const double> x) {
    const std::vector<double> proba = predict_proba(forest, x);
    int best = 0;
    for (int c = 1; c < forest.n_classes; ++c)
        if (proba[static_cast<size_t>(c)] > proba[static_cast<size_t>(best)])
            best = c;
    return best;
}

std::vector<int> predict_many(const Forest &forest, const TraceMatrix &rows,
                              Exec exec) {
    std::vector<int> out(static_cast<size_t>(rows.n_rows));
    std::exception_ptr error;
    auto one = [&](int r) { out[static_cast<size_t>(r)] = predict(forest, rows.row_span(r)); };
    if (exec == Exec::serial) {
        for (int r = 0; r < rows.n_rows; ++r)
            one(r);
    } else {
#pragma omp parallel for schedule(static)
        for (int r = 0; r < rows.n_rows; ++r) {
            try {
                one(r);
            } catch (...) {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
    }
    return out;
}

Metrics evaluate(const Forest &forest, const TraceMatrix &test, Exec exec) {
    const std::vector<int> pred = predict_many(forest, test, exec);
    Metrics m;
    m.confusion.assign(static_cast<size_t>(forest.n_classes),
                       std::vector<int>(static_cast<size_t>(forest.n_classes), 0));
    int correct = 0;
    for (int r = 0; r < test.n_rows; ++r) {
        const int truth = test.labels[static_cast<size_t>(r)];
        const int p = pred[static_cast<size_t>(r)];
        m.confusion[static_cast<size_t>(truth)][static_cast<size_t>(p)] += 1;
        if (truth == p)
            ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(test.n_rows);
    m.recall.assign(static_cast<size_t>(forest.n_classes), 0.0);
    for (int c = 0; c < forest.n_classes; ++c) {
        int row_total = 0;
        for (int p = 0; p < forest.n_classes; ++p)
            row_total += m.confusion[static_cast<size_t>(c)][static_cast<size_t>(p)];
        if (row_total > 0)
            m.recall[static_cast<size_t>(c)] =
                static_cast<double>(
                    m.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)]) /
                static_cast<double>(row_total);
    }
    int dmin = 0, dmax = 0;
    for (size_t t = 0; t < forest.trees.size(); ++t) {
        const int d = forest.trees[t].depth();
        if (t == 0) {
            dmin = dmax = d;
        } else {
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
    }
    m.depth_min = dmin;
    m.depth_max = dmax;
    return m;
}

std::vector<Metrics> cross_validate(const TraceMatrix &matrix, int k,
                                    const TrainConfig &cfg, Exec exec) {
    const FoldPlan folds =
        stratified_kfold(matrix.labels, k, mix_seed({cfg.seed, 0xf01d5ULL}));
    std::vector<Metrics> out;
    out.reserve(static_cast<size_t>(k));
    for (int fold = 0; fold < k; ++fold) {
        std::vector<int> train_rows, test_rows;
        for (int r = 0; r < matrix.n_rows; ++r)
            (folds.assignment[static_cast<size_t>(r)] == fold ? test_rows
                                                              : train_rows)
                .push_back(r);
        const Standardizer std_fit = fit_standardizer(matrix, train_rows);
        const TraceMatrix train = apply_standardizer(std_fit, matrix, train_rows);
        const TraceMatrix test = apply_standardizer(std_fit, matrix, test_rows);
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = mix_seed({cfg.seed, 0xf01dULL, static_cast<uint64_t>(fold)});
        const Forest forest = train_forest(train, fold_cfg, exec);
        out.push_back(evaluate(forest, test, exec));
    }
    return out;
}

bool forests_equal(const Forest &a, const Forest &b) {
    if (a.n_classes != b.n_classes || a.n_features != b.n_features ||
        a.trees.size() != b.trees.size())
        return false;
    for (size_t t = 0; t < a.trees.size(); ++t) {
        const auto &na = a.trees[t].nodes;
        const auto &nb = b.trees[t].nodes;
        if (na.size() != nb.size())
            return false;
        for (size_t i = 0; i < na.size(); ++i) {
            if (na[i].feature != nb[i].feature ||
                na[i].threshold != nb[i].threshold || na[i].left != nb[i].left ||
                na[i].right != nb[i].right || na[i].cover != nb[i].cover ||
                na[i].counts != nb[i].counts)
                return false;
        }
    }
    return true;
}

} // namespace waldo
