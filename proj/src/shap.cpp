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

#include "waldo/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace waldo {

namespace {

void validate_covers(const Tree &tree) {
    for (const TreeNode &n : tree.nodes) {
        if (!(n.cover > 0))
            throw std::invalid_argument("tree_shap: node without positive cover");
        if (!n.is_leaf()) {
            const double child_sum =
                tree.nodes[static_cast<size_t>(n.left)].cover +
                tree.nodes[static_cast<size_t>(n.right)].cover;
            if (std::abs(n.cover - child_sum) > 1e-9 * n.cover)
                throw std::invalid_argument(
                    "tree_shap: cover not conserved across a split");
        }
    }
}

// One entry per unique feature on the current root-to-node path. Slot 0 is
// a sentinel; pweight at slot m is the aggregated weight of the path-subsets
// with m conditioned ("hot") features.
struct PathElement {
    int feature = -1;
    double zero = 1.0; // flow fraction when the feature is not conditioned on
    double one = 1.0;  // 1 when x follows every split on this feature, else 0
    double pweight = 0.0;
};

void extend_path(PathElement *path, int len, double pz, double po, int feature) {
    path[len] = {feature, pz, po, len == 0 ? 1.0 : 0.0};
    const double denom = static_cast<double>(len + 1);
    for (int i = len - 1; i >= 0; --i) {
        path[i + 1].pweight += po * path[i].pweight * (i + 1) / denom;
        path[i].pweight = pz * path[i].pweight * (len - i) / denom;
    }
}

// Total subset weight with element `idx` removed; the factor (one - zero)
// times this is the element's share of the leaf value.
double unwound_sum(const PathElement *path, int len, int idx) {
    const int last = len - 1;
    const double o = path[idx].one;
    const double z = path[idx].zero;
    double total = 0.0;
    if (o != 0.0) {
        double next = 0.0;
        for (int m = last; m >= 1; --m) {
            const double tmp =
                path[m].pweight - z * next * (last - m) / static_cast<double>(last + 1);
            const double wp = tmp * (last + 1) / (m * o);
            total += wp;
            next = wp;
        }
    } else {
        for (int m = 0; m < last; ++m)
            total += path[m].pweight * (last + 1) /
                     (z * static_cast<double>(last - m));
    }
    return total;
}

// Removes element `idx` from the path, restoring the pweights of the shorter
// path (the exact inverse of extend_path).
void unwind_path(PathElement *path, int len, int idx) {
    const int last = len - 1;
    const double o = path[idx].one;
    const double z = path[idx].zero;
    if (o != 0.0) {
        double next = path[last].pweight;
        for (int m = last - 1; m >= 0; --m) {
            const double saved = path[m].pweight;
            path[m].pweight = next * (last + 1) / ((m + 1) * o);
            next = saved -
                   path[m].pweight * z * (last - m) / static_cast<double>(last + 1);
        }
    } else {
        for (int m = 0; m < last; ++m)
            path[m].pweight = path[m].pweight * (last + 1) /
                              (z * static_cast<double>(last - m));
    }
    for (int j = idx; j < last; ++j) {
        path[j].feature = path[j + 1].feature;
        path[j].zero = path[j + 1].zero;
        path[j].one = path[j + 1].one;
    }
}

class TreeShapEngine {
  public:
    TreeShapEngine(const Tree &tree, std::span<const double> x, int n_classes,
                   double *phi)
        : tree_(tree), x_(x), n_classes_(n_classes), phi_(phi) {
        const int levels = tree.depth() + 2;
        stride_ = levels + 1;
        arena_.resize(static_cast<size_t>(levels) * stride_);
    }

    void run() { recurse(0, nullptr, 0, 1.0, 1.0, -1, 0); }

  private:
    void recurse(int node_idx, const PathElement *parent, int parent_len,
                 double pz, double po, int feature, int level) {
        PathElement *path = arena_.data() + static_cast<size_t>(level) * stride_;
        std::copy(parent, parent + parent_len, path);
        int len = parent_len;
        extend_path(path, len, pz, po, feature);
        ++len;

        const TreeNode &node = tree_.nodes[static_cast<size_t>(node_idx)];
        if (node.is_leaf()) {
            for (int i = 1; i < len; ++i) {
                const double w = unwound_sum(path, len, i);
                const double scale = w * (path[i].one - path[i].zero);
                double *slot =
                    phi_ + static_cast<size_t>(path[i].feature) * n_classes_;
                for (int c = 0; c < n_classes_; ++c)
                    slot[c] += scale * node.counts[static_cast<size_t>(c)] / node.cover;
            }
            return;
        }

        const bool go_left =
            x_[static_cast<size_t>(node.feature)] <= node.threshold;
        const int hot = go_left ? node.left : node.right;
        const int cold = go_left ? node.right : node.left;
        const double hot_frac =
            tree_.nodes[static_cast<size_t>(hot)].cover / node.cover;
        const double cold_frac =
            tree_.nodes[static_cast<size_t>(cold)].cover / node.cover;

        double incoming_zero = 1.0;
        double incoming_one = 1.0;
        for (int j = 1; j < len; ++j) {
            if (path[j].feature == node.feature) {
                incoming_zero = path[j].zero;
                incoming_one = path[j].one;
                unwind_path(path, len, j);
                --len;
                break;
            }
        }

        recurse(hot, path, len, incoming_zero * hot_frac, incoming_one,
                node.feature, level + 1);
        recurse(cold, path, len, incoming_zero * cold_frac, 0.0, node.feature,
                level + 1);
    }

    const Tree &tree_;
    std::span<const double> x_;
    int n_classes_;
    double *phi_;
    int stride_;
    std::vector<PathElement> arena_;
};

} // namespace

std::vector<double> tree_expected_value(const Tree &tree, int n_classes) {
    std::vector<double> out(static_cast<size_t>(n_classes), 0.0);
    const double root_cover = tree.nodes.front().cover;
    for (const TreeNode &n : tree.nodes) {
        if (!n.is_leaf())
            continue;
        const double w = n.cover / root_cover;
        for (int c = 0; c < n_classes; ++c)
            out[static_cast<size_t>(c)] +=
                w * n.counts[static_cast<size_t>(c)] / n.cover;
    }
    return out;
}

std::vector<double> tree_shap_all(const Tree &tree, std::span<const double> x,
                                  int n_features, int n_classes) {
    validate_covers(tree);
    std::vector<double> phi(static_cast<size_t>(n_features) * n_classes, 0.0);
    if (tree.nodes.size() > 1) { // a lone leaf is a constant: all phi stay 0
        TreeShapEngine engine(tree, x, n_classes, phi.data());
        engine.run();
    }
    return phi;
}

std::vector<double> tree_shap(const Tree &tree, std::span<const double> x,
                              int class_id, int n_features) {
    int n_classes = 0;
    for (const TreeNode &n : tree.nodes)
        if (n.is_leaf()) {
            n_classes = static_cast<int>(n.counts.size());
            break;
        }
    if (class_id < 0 || class_id >= n_classes)
        throw std::invalid_argument("tree_shap: class id out of range");
    const std::vector<double> all = tree_shap_all(tree, x, n_features, n_classes);
    std::vector<double> out(static_cast<size_t>(n_features), 0.0);
    for (int f = 0; f < n_features; ++f)
        out[static_cast<size_t>(f)] =
            all[static_cast<size_t>(f) * n_classes + class_id];
    return out;
}

std::vector<double> brute_force_value(const Tree &tree, std::span<const double> x,
                                      uint32_t subset_mask, int n_classes) {
    std::vector<double> out(static_cast<size_t>(n_classes), 0.0);
    struct Frame {
        int node;
        double weight;
    };
    std::vector<Frame> stack{{0, 1.0}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        const TreeNode &n = tree.nodes[static_cast<size_t>(f.node)];
        if (n.is_leaf()) {
            for (int c = 0; c < n_classes; ++c)
                out[static_cast<size_t>(c)] +=
                    f.weight * n.counts[static_cast<size_t>(c)] / n.cover;
            continue;
        }
        if (subset_mask & (1u << n.feature)) {
            const int next = x[static_cast<size_t>(n.feature)] <= n.threshold
                                 ? n.left
                                 : n.right;
            stack.push_back({next, f.weight});
        } else {
            const double lc = tree.nodes[static_cast<size_t>(n.left)].cover;
            const double rc = tree.nodes[static_cast<size_t>(n.right)].cover;
            stack.push_back({n.left, f.weight * lc / n.cover});
            stack.push_back({n.right, f.weight * rc / n.cover});
        }
    }
    return out;
}

std::vector<double> brute_force_shap(const Tree &tree, std::span<const double> x,
                                     int class_id, int n_features) {
    if (n_features > 15)
        throw std::invalid_argument(
            "brute_force_shap: feature count above the exponential-cost cap");
    validate_covers(tree);
    int n_classes = 0;
    for (const TreeNode &n : tree.nodes)
        if (n.is_leaf()) {
            n_classes = static_cast<int>(n.counts.size());
            break;
        }
    if (class_id < 0 || class_id >= n_classes)
        throw std::invalid_argument("brute_force_shap: class id out of range");

    const uint32_t n_masks = 1u << n_features;
    std::vector<double> value(n_masks);
    for (uint32_t mask = 0; mask < n_masks; ++mask)
        value[mask] = brute_force_value(tree, x, mask,
                                        n_classes)[static_cast<size_t>(class_id)];

    std::vector<double> factorial(static_cast<size_t>(n_features) + 1, 1.0);
    for (size_t i = 1; i < factorial.size(); ++i)
        factorial[i] = factorial[i - 1] * static_cast<double>(i);
    const double denom = factorial[static_cast<size_t>(n_features)];

    std::vector<double> phi(static_cast<size_t>(n_features), 0.0);
    for (int i = 0; i < n_features; ++i) {
        const uint32_t bit = 1u << i;
        double acc = 0.0;
        for (uint32_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit)
                continue;
            const int s = std::popcount(mask);
            const double w = factorial[static_cast<size_t>(s)] *
                             factorial[static_cast<size_t>(n_features - s - 1)] /
                             denom;
            acc += w * (value[mask | bit] - value[mask]);
        }
        phi[static_cast<size_t>(i)] = acc;
    }
    return phi;
}

ShapMatrix forest_shap(const Forest &forest, const TraceMatrix &rows,
                       const std::vector<ShapSampleRef> &refs, Exec exec) {
    if (refs.size() != static_cast<size_t>(rows.n_rows))
        throw std::invalid_argument("forest_shap: refs/rows size mismatch");
    if (rows.n_cols != forest.n_features)
        throw std::invalid_argument("forest_shap: feature dimension mismatch");

    ShapMatrix shap;
    shap.n_samples = rows.n_rows;
    shap.n_features = forest.n_features;
    shap.n_classes = forest.n_classes;
    shap.samples = refs;
    shap.values.assign(static_cast<size_t>(shap.n_samples) * shap.n_features *
                           shap.n_classes,
                       0.0);
    shap.base.assign(static_cast<size_t>(shap.n_classes), 0.0);

    const double n_trees = static_cast<double>(forest.trees.size());
    for (const Tree &tree : forest.trees) {
        const std::vector<double> base = tree_expected_value(tree, forest.n_classes);
        for (int c = 0; c < forest.n_classes; ++c)
            shap.base[static_cast<size_t>(c)] += base[static_cast<size_t>(c)] / n_trees;
    }

    std::exception_ptr error;
    auto explain_one = [&](int s) {
        double *slot = shap.values.data() +
                       static_cast<size_t>(s) * shap.n_features * shap.n_classes;
        std::vector<double> acc(static_cast<size_t>(shap.n_features) *
                                    shap.n_classes,
                                0.0);
        for (const Tree &tree : forest.trees) {
            const std::vector<double> phi =
                tree_shap_all(tree, rows.row_span(s), forest.n_features,
                              forest.n_classes);
            for (size_t i = 0; i < phi.size(); ++i)
                acc[i] += phi[i];
        }
        for (size_t i = 0; i < acc.size(); ++i)
            slot[i] = acc[i] / n_trees;
    };

    if (exec == Exec::serial) {
        for (int s = 0; s < shap.n_samples; ++s)
            explain_one(s);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < shap.n_samples; ++s) {
            try {
                explain_one(s);
            } catch (...) {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
    }
    return shap;
}

namespace {

std::vector<RankedFeature> rank_class(const ShapMatrix &shap,
                                      const FrequencyGrid &grid, int class_id) {
    std::vector<int> members;
    for (int s = 0; s < shap.n_samples; ++s)
        if (shap.samples[static_cast<size_t>(s)].label == class_id)
            members.push_back(s);

    std::vector<RankedFeature> ranked;
    ranked.reserve(static_cast<size_t>(shap.n_features));
    const double n = static_cast<double>(members.size());
    for (int f = 0; f < shap.n_features; ++f) {
        RankedFeature rf;
        rf.feature = f;
        rf.frequency_hz = grid.freq(f);
        if (!members.empty()) {
            double sum = 0.0, abs_sum = 0.0;
            for (int s : members) {
                const double v = shap.at(s, f, class_id);
                sum += v;
                abs_sum += std::abs(v);
            }
            rf.mean_phi = sum / n;
            rf.mean_abs_phi = abs_sum / n;
            double sq = 0.0;
            for (int s : members) {
                const double d = shap.at(s, f, class_id) - rf.mean_phi;
                sq += d * d;
            }
            rf.var_phi = sq / n;
        }
        ranked.push_back(rf);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedFeature &a, const RankedFeature &b) {
                         if (a.mean_abs_phi != b.mean_abs_phi)
                             return a.mean_abs_phi > b.mean_abs_phi;
                         return a.feature < b.feature;
                     });
    return ranked;
}

} // namespace

FeatureRanking summarize(const ShapMatrix &shap, const FrequencyGrid &grid,
                         int top_k) {
    if (shap.n_samples == 0)
        throw std::invalid_argument("summarize: empty attribution matrix");
    FeatureRanking out;
    out.per_class.resize(static_cast<size_t>(shap.n_classes));
    for (int c = 0; c < shap.n_classes; ++c) {
        std::vector<RankedFeature> ranked = rank_class(shap, grid, c);
        const size_t keep =
            std::min(ranked.size(), static_cast<size_t>(std::max(top_k, 1)));
        ranked.resize(keep);
        out.per_class[static_cast<size_t>(c)] = std::move(ranked);
    }
    return out;
}

std::vector<BeeswarmRow> export_beeswarm(const ShapMatrix &shap,
                                         const TraceMatrix &standardized_rows,
                                         const FrequencyGrid &grid, int class_id,
                                         int top_features) {
    if (standardized_rows.n_rows != shap.n_samples)
        throw std::invalid_argument("export_beeswarm: rows/attribution mismatch");
    if (class_id < 0 || class_id >= shap.n_classes)
        throw std::invalid_argument("export_beeswarm: class id out of range");

    const std::vector<RankedFeature> ranked = rank_class(shap, grid, class_id);
    const size_t keep =
        std::min(ranked.size(), static_cast<size_t>(std::max(top_features, 1)));

    std::vector<BeeswarmRow> rows;
    for (size_t k = 0; k < keep; ++k) {
        const RankedFeature &rf = ranked[k];
        for (int s = 0; s < shap.n_samples; ++s) {
            if (shap.samples[static_cast<size_t>(s)].label != class_id)
                continue;
            rows.push_back({s, rf.feature, rf.frequency_hz,
                            shap.at(s, rf.feature, class_id),
                            standardized_rows.row(s)[rf.feature]});
        }
    }
    return rows;
}

} // namespace waldo
