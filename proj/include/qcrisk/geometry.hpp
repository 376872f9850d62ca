// Copyright 2026 The qcrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

/**
 * @file geometry.hpp
 * Feature-state geometry of a classifier: within-class spread (M1), class-mean
 * overlaps (M2), mean/operator alignment, the mean-subtracted Gram matrix, and
 * the state-discrimination error bound for equiangular frames.
 */

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "measurements.hpp"

namespace qcrisk {

using Grouped = std::vector<std::vector<CMatrix>>;

/// Buckets `features` by label into `k` classes.
[[nodiscard]] inline Grouped group_by_label(const std::vector<CMatrix> &features, const std::vector<int> &labels,
                                            std::size_t k) {
    if (features.size() != labels.size()) {
        throw DimensionError("feature and label counts differ");
    }
    Grouped g(k);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
            throw DomainError("label " + std::to_string(labels[i]) + " out of range");
        }
        g[static_cast<std::size_t>(labels[i])].push_back(features[i]);
    }
    return g;
}

[[nodiscard]] inline std::vector<CMatrix> class_means(const Grouped &grouped) {
    std::vector<CMatrix> means;
    means.reserve(grouped.size());
    for (std::size_t k = 0; k < grouped.size(); ++k) {
        const auto &cls = grouped[k];
        if (cls.empty()) {
            throw DomainError("class " + std::to_string(k) + " has no features");
        }
        CMatrix acc = CMatrix::Zero(cls.front().rows(), cls.front().cols());
        for (const auto &rho : cls) {
            if (rho.rows() != acc.rows() || rho.cols() != acc.cols()) {
                throw DimensionError("features of one class differ in dimension");
            }
            acc += rho;
        }
        means.push_back(acc / static_cast<double>(cls.size()));
    }
    return means;
}

/// Per-class sum of Frobenius distances to the class mean.
[[nodiscard]] inline std::vector<double> m1(const Grouped &grouped) {
    const auto means = class_means(grouped);
    std::vector<double> out;
    out.reserve(grouped.size());
    for (std::size_t k = 0; k < grouped.size(); ++k) {
        double s = 0.0;
        for (const auto &rho : grouped[k]) {
            s += frobenius_distance(rho, means[k]);
        }
        out.push_back(s);
    }
    return out;
}

/// M2(k, k') = Tr(mean_k mean_k').
[[nodiscard]] inline RMatrix m2(const std::vector<CMatrix> &means) {
    const auto k = static_cast<Eigen::Index>(means.size());
    RMatrix out(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            const double v = trace_product(means[static_cast<std::size_t>(i)], means[static_cast<std::size_t>(j)]).real();
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

/// A(k, k') = Tr(mean_k o_k').
[[nodiscard]] inline RMatrix alignment(const std::vector<CMatrix> &means, const std::vector<CMatrix> &ops) {
    RMatrix out(static_cast<Eigen::Index>(means.size()), static_cast<Eigen::Index>(ops.size()));
    for (std::size_t i = 0; i < means.size(); ++i) {
        for (std::size_t j = 0; j < ops.size(); ++j) {
            if (means[i].rows() != ops[j].rows() || means[i].cols() != ops[j].cols()) {
                throw DimensionError("class mean and operator dimensions differ");
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = trace_product(means[i], ops[j]).real();
        }
    }
    return out;
}

[[nodiscard]] inline RMatrix alignment(const std::vector<CMatrix> &means, const MeasurementSet &ms) {
    return alignment(means, ms.operators);
}

/// Real Hilbert-Schmidt inner products of the means after removing their
/// global average.
[[nodiscard]] inline RMatrix mean_subtracted_gram(const std::vector<CMatrix> &means) {
    if (means.empty()) {
        return {};
    }
    CMatrix mu = CMatrix::Zero(means.front().rows(), means.front().cols());
    for (const auto &m : means) {
        mu += m;
    }
    mu /= static_cast<double>(means.size());
    std::vector<CMatrix> dev;
    dev.reserve(means.size());
    for (const auto &m : means) {
        dev.push_back(m - mu);
    }
    const auto k = static_cast<Eigen::Index>(means.size());
    RMatrix out(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            // Re <A, B> = Re Tr(A^dagger B)
            out(i, j) = (dev[static_cast<std::size_t>(i)].conjugate().cwiseProduct(dev[static_cast<std::size_t>(j)]))
                            .sum()
                            .real();
        }
    }
    return out;
}

/// Gram matrix of real vectors.
[[nodiscard]] inline RMatrix vector_gram(const std::vector<RVector> &cols) {
    const auto k = static_cast<Eigen::Index>(cols.size());
    RMatrix out(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            out(i, j) = cols[static_cast<std::size_t>(i)].dot(cols[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

/// Lower bound on the error of discriminating K equiangular states with
/// pairwise fidelity F over m copies: (K-1)/(2K) F^(m/2). F is the squared
/// overlap |<psi_i|psi_j>|^2, hence the half exponent.
[[nodiscard]] inline double discrimination_lower_bound(std::size_t k, double fidelity, std::size_t m_meas) {
    if (k < 2) {
        throw DomainError("need at least two classes");
    }
    if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
        throw DomainError("fidelity must lie in [0, 1]");
    }
    if (m_meas < 1) {
        throw DomainError("measurement count must be >= 1");
    }
    const double kd = static_cast<double>(k);
    return (kd - 1.0) / (2.0 * kd) * std::pow(fidelity, static_cast<double>(m_meas) / 2.0);
}

/// Pairwise fidelity (K - 2^D) / (2^D (K - 1)) of a formal ETF with K > 2^D.
[[nodiscard]] inline double formal_etf_fidelity(std::size_t k, std::size_t d) {
    const double kd = static_cast<double>(k);
    const double dim = static_cast<double>(pow2(d));
    if (kd <= dim) {
        throw DomainError("formal ETF needs K > 2^D");
    }
    return (kd - dim) / (dim * (kd - 1.0));
}

struct GeometryReport {
    std::vector<double> m1_per_class;
    RMatrix m2_matrix;
    RMatrix alignment_matrix;
    RMatrix gram_mean_subtracted;
    std::vector<CMatrix> class_means;
};

[[nodiscard]] inline GeometryReport geometry_report(const std::vector<CMatrix> &features, const std::vector<int> &labels,
                                                    const std::vector<CMatrix> &ops) {
    const auto grouped = group_by_label(features, labels, ops.size());
    GeometryReport r;
    r.class_means = class_means(grouped);
    r.m1_per_class = m1(grouped);
    r.m2_matrix = m2(r.class_means);
    r.alignment_matrix = alignment(r.class_means, ops);
    r.gram_mean_subtracted = mean_subtracted_gram(r.class_means);
    return r;
}

namespace detail {

[[nodiscard]] inline nlohmann::json real_matrix_to_json(const RMatrix &m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace detail

inline void to_json(nlohmann::json &j, const GeometryReport &r) {
    j = nlohmann::json{{"m1_per_class", r.m1_per_class},
                       {"m2_matrix", detail::real_matrix_to_json(r.m2_matrix)},
                       {"alignment_matrix", detail::real_matrix_to_json(r.alignment_matrix)},
                       {"gram_mean_subtracted", detail::real_matrix_to_json(r.gram_mean_subtracted)}};
    j["class_means"] = nlohmann::json::array();
    for (const auto &m : r.class_means) {
        j["class_means"].push_back(detail::matrix_to_json(m));
    }
}

} // namespace qcrisk
