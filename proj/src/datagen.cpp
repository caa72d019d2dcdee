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

#include "waldo/datagen.hpp"

#include "waldo/pdn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <map>
#include <stdexcept>

namespace waldo {

std::string tamper_field_name(TamperField f) {
    switch (f) {
    case TamperField::None:
        return "none";
    case TamperField::Esl:
        return "ESL";
    case TamperField::Esr:
        return "ESR";
    case TamperField::Cp:
        return "CP";
    }
    throw std::invalid_argument("unknown tamper field");
}

namespace {

struct TamperRow {
    int class_id;
    PartId target;
    TamperField field;
};

// Class ids 1-10 in table order.
const TamperRow kTamperRows[] = {
    {1, PartId::C0402Cap1, TamperField::Esl},
    {2, PartId::C0402Cap1, TamperField::Esr},
    {3, PartId::C0402Cap2, TamperField::Esl},
    {4, PartId::C0402Cap2, TamperField::Esr},
    {5, PartId::C0603Cap, TamperField::Esl},
    {6, PartId::C0603Cap, TamperField::Esr},
    {7, PartId::C0805Cap, TamperField::Esl},
    {8, PartId::C0805Cap, TamperField::Esr},
    {9, PartId::Res0402, TamperField::Cp},
    {10, PartId::Res0402, TamperField::Esl},
};

} // namespace

std::string class_name(int class_id) {
    if (class_id == 0)
        return "Genuine";
    for (const auto &row : kTamperRows)
        if (row.class_id == class_id)
            return part_name(row.target) + "-T-" + tamper_field_name(row.field);
    throw std::invalid_argument("class_name: class id out of range");
}

std::vector<ClassSpec> standard_plan(int genuine_per_subgroup,
                                     int tampered_per_class,
                                     double genuine_halfwidth,
                                     double tampered_halfwidth,
                                     std::vector<double> multipliers) {
    if (genuine_per_subgroup <= 0 || tampered_per_class <= 0)
        throw std::invalid_argument("standard_plan: trace counts must be positive");
    std::vector<ClassSpec> plan;
    plan.reserve(kNumParts + std::size(kTamperRows));
    for (PartId part : all_parts())
        plan.push_back({0, part, TamperField::None, {}, genuine_halfwidth,
                        genuine_per_subgroup});
    for (const auto &row : kTamperRows)
        plan.push_back({row.class_id, row.target, row.field, multipliers,
                        tampered_halfwidth, tampered_per_class});
    return plan;
}

PdnInstance nominal_instance(const std::vector<ComponentSpec> &census,
                             const BoardModel &board) {
    validate_census(census);
    validate_board(board);
    PdnInstance inst;
    inst.board = board;
    for (const ComponentSpec &c : census)
        for (int i = 0; i < c.count; ++i)
            inst.branches.push_back({c.part, c.kind, c.value, c.esr, c.esl, c.cp});
    return inst;
}

namespace {

double jitter(double nominal, double halfwidth, Rng &rng) {
    return rng.uniform(nominal * (1.0 - halfwidth), nominal * (1.0 + halfwidth));
}

} // namespace

PdnInstance sample_genuine(const std::vector<ComponentSpec> &census,
                           const BoardModel &board, PartId subgroup_part,
                           double halfwidth, Rng &rng) {
    PdnInstance inst = nominal_instance(census, board);
    for (Branch &br : inst.branches) {
        if (br.part != subgroup_part)
            continue;
        br.value = jitter(br.value, halfwidth, rng);
        br.esl = jitter(br.esl, halfwidth, rng);
        if (br.kind == PartKind::Capacitor)
            br.esr = jitter(br.esr, halfwidth, rng);
        else
            br.cp = jitter(br.cp, halfwidth, rng);
    }
    return inst;
}

PdnInstance sample_tampered(const std::vector<ComponentSpec> &census,
                            const BoardModel &board, const ClassSpec &spec,
                            Rng &rng) {
    if (spec.class_id < 1)
        throw std::invalid_argument("sample_tampered: class id must be >= 1");
    if (spec.multipliers.empty())
        throw std::invalid_argument("sample_tampered: empty multiplier set");
    PdnInstance inst = nominal_instance(census, board);
    const double mult =
        spec.multipliers[rng.uniform_index(spec.multipliers.size())];
    for (Branch &br : inst.branches) {
        if (br.part != spec.target)
            continue;
        br.value *= mult;
        switch (spec.field) {
        case TamperField::Esl:
            br.esl = jitter(br.esl, spec.halfwidth, rng);
            break;
        case TamperField::Esr:
            br.esr = jitter(br.esr, spec.halfwidth, rng);
            break;
        case TamperField::Cp:
            br.cp = jitter(br.cp, spec.halfwidth, rng);
            break;
        case TamperField::None:
            throw std::invalid_argument("sample_tampered: spec without field");
        }
    }
    return inst;
}

TraceMatrix generate_dataset(const std::vector<ClassSpec> &plan,
                             const FrequencyGrid &grid,
                             const std::vector<ComponentSpec> &census,
                             const BoardModel &board, uint64_t master_seed,
                             Exec exec) {
    if (plan.empty())
        throw std::invalid_argument("generate_dataset: empty plan");
    validate_grid(grid);
    validate_census(census);
    validate_board(board);

    struct RowJob {
        const ClassSpec *spec;
        int class_index; // index within the class across subgroups
    };
    std::vector<RowJob> jobs;
    std::map<int, int> class_offsets;
    for (const ClassSpec &spec : plan) {
        int &offset = class_offsets[spec.class_id];
        for (int i = 0; i < spec.traces; ++i)
            jobs.push_back({&spec, offset + i});
        offset += spec.traces;
    }

    TraceMatrix m;
    m.n_rows = static_cast<int>(jobs.size());
    m.n_cols = grid.points;
    m.grid = grid;
    m.values.resize(static_cast<size_t>(m.n_rows) * m.n_cols);
    m.labels.resize(static_cast<size_t>(m.n_rows));

    std::exception_ptr error;
    auto run_one = [&](int r) {
        const RowJob &job = jobs[static_cast<size_t>(r)];
        const ClassSpec &spec = *job.spec;
        Rng rng = derive_stream(master_seed, static_cast<uint64_t>(spec.class_id),
                                static_cast<uint64_t>(job.class_index));
        const PdnInstance inst =
            spec.class_id == 0
                ? sample_genuine(census, board, spec.target, spec.halfwidth, rng)
                : sample_tampered(census, board, spec, rng);
        const Trace t = sweep(inst, grid);
        std::memcpy(m.row(r), t.magnitudes.data(), sizeof(double) * m.n_cols);
        m.labels[static_cast<size_t>(r)] = spec.class_id;
    };

    if (exec == Exec::serial) {
        for (int r = 0; r < m.n_rows; ++r)
            run_one(r);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < m.n_rows; ++r) {
            try {
                run_one(r);
            } catch (...) {
#pragma omp critical
                if (!error)
                    error = std::current_exception();
            }
        }
        if (error)
            std::rethrow_exception(error);
    }
    return m;
}

Standardizer fit_standardizer(const TraceMatrix &m,
                              const std::vector<int> &row_indices) {
    std::vector<int> rows = row_indices;
    if (rows.empty())
        for (int r = 0; r < m.n_rows; ++r)
            rows.push_back(r);
    if (rows.size() < 2)
        throw std::invalid_argument("fit_standardizer: need at least 2 rows");

    const int n = m.n_cols;
    const double count = static_cast<double>(rows.size());
    Standardizer s;
    s.mean.assign(static_cast<size_t>(n), 0.0);
    s.sigma.assign(static_cast<size_t>(n), 0.0);

    // Two-pass moments per feature, summed in fixed row order; parallel over
    // features only, so the result never depends on the thread count.
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        double sum = 0.0;
        for (int r : rows)
            sum += m.row(r)[j];
        const double mean = sum / count;
        double sq = 0.0;
        for (int r : rows) {
            const double d = m.row(r)[j] - mean;
            sq += d * d;
        }
        double sigma = std::sqrt(sq / count);
        // Constant columns yield a roundoff-level sigma; dividing by it would
        // blow the feature up, so such columns are only centered.
        if (sigma <= 1e-14 * std::max(std::abs(mean), 1.0))
            sigma = 0.0;
        s.mean[static_cast<size_t>(j)] = mean;
        s.sigma[static_cast<size_t>(j)] = sigma;
    }
    return s;
}

void standardize_row(const Standardizer &s, const double *in, double *out, int n) {
    if (static_cast<size_t>(n) != s.mean.size())
        throw std::invalid_argument("standardize_row: width mismatch");
    for (int j = 0; j < n; ++j) {
        const double centered = in[j] - s.mean[static_cast<size_t>(j)];
        const double sg = s.sigma[static_cast<size_t>(j)];
        out[j] = sg > 0 ? centered / sg : centered;
    }
}

void unstandardize_row(const Standardizer &s, const double *in, double *out, int n) {
    if (static_cast<size_t>(n) != s.mean.size())
        throw std::invalid_argument("unstandardize_row: width mismatch");
    for (int j = 0; j < n; ++j) {
        const double sg = s.sigma[static_cast<size_t>(j)];
        out[j] = (sg > 0 ? in[j] * sg : in[j]) + s.mean[static_cast<size_t>(j)];
    }
}

TraceMatrix apply_standardizer(const Standardizer &s, const TraceMatrix &m,
                               const std::vector<int> &row_indices) {
    std::vector<int> rows = row_indices;
    if (rows.empty())
        for (int r = 0; r < m.n_rows; ++r)
            rows.push_back(r);

    TraceMatrix out;
    out.n_rows = static_cast<int>(rows.size());
    out.n_cols = m.n_cols;
    out.grid = m.grid;
    out.values.resize(static_cast<size_t>(out.n_rows) * out.n_cols);
    out.labels.resize(static_cast<size_t>(out.n_rows));
    for (int i = 0; i < out.n_rows; ++i) {
        const int r = rows[static_cast<size_t>(i)];
        standardize_row(s, m.row(r), out.row(i), m.n_cols);
        out.labels[static_cast<size_t>(i)] = m.labels[static_cast<size_t>(r)];
    }
    return out;
}

FoldPlan stratified_kfold(const std::vector<int> &labels, int k, uint64_t seed) {
    if (k < 2)
        throw std::invalid_argument("stratified_kfold: k must be >= 2");
    std::map<int, std::vector<int>> by_class;
    for (size_t r = 0; r < labels.size(); ++r)
        by_class[labels[r]].push_back(static_cast<int>(r));

    FoldPlan plan;
    plan.k = k;
    plan.assignment.assign(labels.size(), -1);
    for (auto &[cls, rows] : by_class) {
        if (static_cast<int>(rows.size()) < k)
            throw std::invalid_argument("stratified_kfold: class " +
                                        std::to_string(cls) + " has fewer than k members");
        Rng rng = derive_stream(seed, 0x5f01dULL, static_cast<uint64_t>(cls));
        rng.shuffle(rows);
        for (size_t i = 0; i < rows.size(); ++i)
            plan.assignment[static_cast<size_t>(rows[i])] =
                static_cast<int>(i % static_cast<size_t>(k));
    }
    return plan;
}

namespace {

size_t dtw_checked_sizes(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("dtw: empty input");
    return a.size() * b.size();
}

std::vector<double> dtw_matrix(std::span<const double> a,
                               std::span<const double> b) {
    const size_t n = a.size(), m = b.size();
    std::vector<double> d(n * m);
    auto at = [&](size_t i, size_t j) -> double & { return d[i * m + j]; };
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < m; ++j) {
            const double cost = std::abs(a[i] - b[j]);
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else if (i == 0)
                best = at(0, j - 1);
            else if (j == 0)
                best = at(i - 1, 0);
            else
                best = std::min({at(i - 1, j), at(i, j - 1), at(i - 1, j - 1)});
            at(i, j) = cost + best;
        }
    }
    return d;
}

} // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b) {
    dtw_checked_sizes(a, b);
    return dtw_matrix(a, b).back();
}

std::vector<std::pair<int, int>> dtw_align(std::span<const double> a,
                                           std::span<const double> b) {
    dtw_checked_sizes(a, b);
    const std::vector<double> d = dtw_matrix(a, b);
    const size_t m = b.size();
    auto at = [&](size_t i, size_t j) { return d[i * m + j]; };

    std::vector<std::pair<int, int>> path;
    size_t i = a.size() - 1, j = m - 1;
    path.emplace_back(static_cast<int>(i), static_cast<int>(j));
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            // Diagonal preferred on ties, then the (i-1, j) step.
            const double diag = at(i - 1, j - 1);
            const double up = at(i - 1, j);
            const double left = at(i, j - 1);
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        path.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace waldo
