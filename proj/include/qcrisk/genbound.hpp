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
 * @file genbound.hpp
 * Robustness-based generalization bound: covering number of the encoded
 * state space, the number of occupied cover cells |T_D| and the assembled
 * bound.
 */

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace qcrisk {

/// ln of (28 N_ge / eps)^(4^m N_ge), evaluated in log space.
[[nodiscard]] inline double covering_number_log(std::size_t n_ge, std::size_t m, double eps) {
    if (!(eps > 0.0)) {
        throw DomainError("covering scale must be positive");
    }
    if (n_ge < 1) {
        throw DomainError("need at least one tunable encoding gate");
    }
    if (m < 1) {
        throw DomainError("gate arity must be >= 1");
    }
    return std::pow(4.0, static_cast<double>(m)) * static_cast<double>(n_ge) *
           std::log(28.0 * static_cast<double>(n_ge) / eps);
}

struct BoundInputs {
    std::size_t n = 1;     // training examples
    std::size_t k = 2;     // classes
    std::size_t n_ge = 1;  // tunable encoding gates
    std::size_t n_g = 1;   // total encoding gates
    std::size_t m = 1;     // largest gate arity
    double eps = 0.01;     // cover scale
    double delta = 0.05;   // confidence
    double l1 = 1.0;       // Lipschitz constant of the loss in h
    double c2 = 1.0;       // max operator norm
    double xi = 1.0;       // max per-sample loss
    std::size_t t_d = 1;   // occupied cells
    double diamond_norm = 1.0; // channel factor, taken as 1

    void validate() const {
        if (n < 1 || k < 1) {
            throw DomainError("n and K must be positive");
        }
        if (n_ge < 1 || n_ge > n_g) {
            throw DomainError("need 1 <= N_ge <= N_g");
        }
        if (m < 1) {
            throw DomainError("gate arity must be >= 1");
        }
        if (!(eps > 0.0)) {
            throw DomainError("epsilon must be positive");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw DomainError("delta must lie in (0, 1)");
        }
        if (!(l1 >= 0.0 && c2 >= 0.0 && xi >= 0.0) || !std::isfinite(l1) || !std::isfinite(c2) || !std::isfinite(xi)) {
            throw DomainError("L1, C2 and xi must be finite and non-negative");
        }
        if (t_d < 1 || t_d > n) {
            throw DomainError("T_D must lie in [1, n]");
        }
    }
};

struct BoundTerms {
    double robustness = 0.0; // 4 L1 K C2 eps
    double sqrt_term = 0.0;  // xi 3 sqrt(a)
    double linear_term = 0.0; // xi 2 a
    double total = 0.0;
};

/// 4 L1 K C2 eps + xi (3 sqrt(a) + 2 a) with
/// a = |T_D| 4^m N_ge ln(56 K N_ge / (eps delta)) / n.
[[nodiscard]] inline BoundTerms lemma3_terms(const BoundInputs &in) {
    in.validate();
    const double kd = static_cast<double>(in.k);
    const double nge = static_cast<double>(in.n_ge);
    const double log_term = std::log(56.0 * kd * nge / (in.eps * in.delta));
    const double a = static_cast<double>(in.t_d) * std::pow(4.0, static_cast<double>(in.m)) * nge * log_term /
                     static_cast<double>(in.n);
    BoundTerms t;
    t.robustness = 4.0 * in.l1 * kd * in.c2 * in.eps * in.diamond_norm;
    t.sqrt_term = in.xi * 3.0 * std::sqrt(a);
    t.linear_term = in.xi * 2.0 * a;
    t.total = t.robustness + t.sqrt_term + t.linear_term;
    return t;
}

[[nodiscard]] inline double lemma3_bound(const BoundInputs &in) { return lemma3_terms(in).total; }

// ---------------------------------------------------------------------------
// Occupied cells

struct PartitionEstimate {
    double epsilon = 0.0;
    std::vector<std::size_t> cell_centers; // sample index of each cell's center
    std::vector<int> cell_labels;
    std::size_t occupied = 0;
    std::vector<std::size_t> assignment; // sample -> cell
    std::vector<std::size_t> scan_order;
};

/// Greedy first-fit cover in index order: a sample joins the first cell of
/// its own label whose center lies within eps, otherwise it opens a new cell.
[[nodiscard]] inline PartitionEstimate estimate_t_d(std::size_t count, const std::vector<int> &labels, double eps,
                                                    const std::function<double(std::size_t, std::size_t)> &distance) {
    if (!(eps > 0.0)) {
        throw DomainError("epsilon must be positive");
    }
    if (labels.size() != count) {
        throw DimensionError("sample and label counts differ");
    }
    PartitionEstimate p;
    p.epsilon = eps;
    p.assignment.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        p.scan_order.push_back(i);
        bool placed = false;
        for (std::size_t c = 0; c < p.cell_centers.size() && !placed; ++c) {
            if (p.cell_labels[c] == labels[i] && distance(i, p.cell_centers[c]) <= eps) {
                p.assignment[i] = c;
                placed = true;
            }
        }
        if (!placed) {
            p.assignment[i] = p.cell_centers.size();
            p.cell_centers.push_back(i);
            p.cell_labels.push_back(labels[i]);
        }
    }
    p.occupied = p.cell_centers.size();
    return p;
}

/// Density matrices under the Frobenius distance.
[[nodiscard]] inline PartitionEstimate estimate_t_d(const std::vector<CMatrix> &states, const std::vector<int> &labels,
                                                    double eps) {
    return estimate_t_d(states.size(), labels, eps,
                        [&states](std::size_t a, std::size_t b) { return frobenius_distance(states[a], states[b]); });
}

/// Pure states; ||psi psi^dagger - phi phi^dagger||_F = sqrt(2 - 2 |<psi|phi>|^2).
[[nodiscard]] inline PartitionEstimate estimate_t_d(const std::vector<CVector> &states, const std::vector<int> &labels,
                                                    double eps) {
    return estimate_t_d(states.size(), labels, eps, [&states](std::size_t a, std::size_t b) {
        return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::norm(states[a].dot(states[b]))));
    });
}

struct LossConstants {
    double l1 = 0.0; // max_i ||h_i - y_i||_2
    double xi = 0.0; // max_i 1/2 ||h_i - y_i||^2
};

[[nodiscard]] inline LossConstants lipschitz_and_xi(const std::vector<RVector> &preds, const std::vector<RVector> &targets) {
    if (preds.size() != targets.size()) {
        throw DimensionError("prediction and label counts differ");
    }
    LossConstants c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double r = (preds[i] - targets[i]).norm();
        c.l1 = std::max(c.l1, r);
        c.xi = std::max(c.xi, 0.5 * r * r);
    }
    return c;
}

[[nodiscard]] inline std::string bound_csv_header() {
    return "n,K,N_ge,N_g,m,epsilon,delta,L1,C2,xi,T_D,diamond_norm,robustness_term,sqrt_term,linear_term,total";
}

inline void write_bound_row(const BoundInputs &in, const BoundTerms &t, std::ostream &out) {
    const auto old = out.precision(17);
    out << in.n << ',' << in.k << ',' << in.n_ge << ',' << in.n_g << ',' << in.m << ',' << in.eps << ',' << in.delta << ','
        << in.l1 << ',' << in.c2 << ',' << in.xi << ',' << in.t_d << ',' << in.diamond_norm << ',' << t.robustness << ','
        << t.sqrt_term << ',' << t.linear_term << ',' << t.total << '\n';
    out.precision(old);
}

} // namespace qcrisk
