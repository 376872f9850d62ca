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
 * @file concentration.hpp
 * Closed-form first and second Haar moments, Monte-Carlo estimators for them,
 * and empirical checks of how encoded-state overlaps and measured outputs of
 * deep random circuits concentrate.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "quantum_core.hpp"

namespace qcrisk {

namespace detail {

inline void check_square(const CMatrix &m, std::size_t d) {
    if (static_cast<std::size_t>(m.rows()) != d || static_cast<std::size_t>(m.cols()) != d) {
        throw DimensionError("expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
    }
}

} // namespace detail

/// E_W Tr(W A W^dagger B) = Tr A Tr B / d.
[[nodiscard]] inline Complex moment1_oracle(const CMatrix &a, const CMatrix &b, std::size_t d) {
    if (d < 1) {
        throw DomainError("dimension must be positive");
    }
    detail::check_square(a, d);
    detail::check_square(b, d);
    return a.trace() * b.trace() / static_cast<double>(d);
}

/// E_W Tr(W A W^dagger B) Tr(W C W^dagger D).
[[nodiscard]] inline Complex moment2_oracle(const CMatrix &a, const CMatrix &b, const CMatrix &c, const CMatrix &dm,
                                            std::size_t d) {
    if (d < 2) {
        throw DomainError("second moment needs d >= 2");
    }
    for (const auto *m : {&a, &b, &c, &dm}) {
        detail::check_square(*m, d);
    }
    const double dd = static_cast<double>(d);
    const Complex ta = a.trace();
    const Complex tb = b.trace();
    const Complex tc = c.trace();
    const Complex td = dm.trace();
    const Complex tac = trace_product(a, c);
    const Complex tbd = trace_product(b, dm);
    return (ta * tb * tc * td + tac * tbd) / (dd * dd - 1.0) - (tac * tb * td + ta * tc * tbd) / (dd * (dd * dd - 1.0));
}

struct MonteCarloEstimate {
    Complex mean{0.0, 0.0};
    double standard_error = 0.0; // sqrt(E|X - mean|^2 / M)
    std::size_t samples = 0;

    /// |mean - target| <= k standard errors; exact integrands (zero spread)
    /// are compared with a relative 1e-9 tolerance instead.
    [[nodiscard]] bool agrees_with(Complex target, double k = 3.0) const {
        const double tol = std::max(k * standard_error, 1e-9 * std::max(1.0, std::abs(target)));
        return std::abs(mean - target) <= tol;
    }
};

namespace detail {

struct ComplexAccumulator {
    Complex sum{0.0, 0.0};
    double sum_abs2 = 0.0;
    std::size_t count = 0;

    void add(Complex v) {
        sum += v;
        sum_abs2 += std::norm(v);
        ++count;
    }

    [[nodiscard]] MonteCarloEstimate finish() const {
        MonteCarloEstimate e;
        e.samples = count;
        if (count == 0) {
            return e;
        }
        const double m = static_cast<double>(count);
        e.mean = sum / m;
        const double var = std::max(0.0, sum_abs2 / m - std::norm(e.mean)) * m / std::max(1.0, m - 1.0);
        e.standard_error = std::sqrt(var / m);
        return e;
    }
};

} // namespace detail

/// Monte-Carlo E_W Tr(W A W^dagger B) for every (A, B) in `tuples`, sharing one
/// stream of Haar unitaries across tuples.
template <class Rng>
[[nodiscard]] std::vector<MonteCarloEstimate> haar_moment1_mc(const std::vector<std::array<CMatrix, 2>> &tuples,
                                                              std::size_t d, std::size_t samples, Rng &rng) {
    std::vector<detail::ComplexAccumulator> acc(tuples.size());
    for (std::size_t s = 0; s < samples; ++s) {
        const CMatrix w = haar_unitary(d, rng);
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            acc[t].add(trace_product(w * tuples[t][0] * w.adjoint(), tuples[t][1]));
        }
    }
    std::vector<MonteCarloEstimate> out;
    for (const auto &a : acc) {
        out.push_back(a.finish());
    }
    return out;
}

/// Monte-Carlo E_W Tr(W A W^dagger B) Tr(W C W^dagger D).
template <class Rng>
[[nodiscard]] std::vector<MonteCarloEstimate> haar_moment2_mc(const std::vector<std::array<CMatrix, 4>> &tuples,
                                                              std::size_t d, std::size_t samples, Rng &rng) {
    std::vector<detail::ComplexAccumulator> acc(tuples.size());
    for (std::size_t s = 0; s < samples; ++s) {
        const CMatrix w = haar_unitary(d, rng);
        const CMatrix wa = w.adjoint();
        for (std::size_t t = 0; t < tuples.size(); ++t) {
            const auto &[a, b, c, dm] = tuples[t];
            acc[t].add(trace_product(w * a * wa, b) * trace_product(w * c * wa, dm));
        }
    }
    std::vector<MonteCarloEstimate> out;
    for (const auto &a : acc) {
        out.push_back(a.finish());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deep random circuits

enum class ConcentrationQuantity { encoder_overlap, ansatz_output };

[[nodiscard]] inline std::string to_string(ConcentrationQuantity q) {
    return q == ConcentrationQuantity::encoder_overlap ? "encoder_overlap" : "ansatz_output";
}

/// How the encoder pair is drawn: both states random, or the first one drawn
/// once and held fixed.
enum class PairMode { both_random, fixed_first };

struct ConcentrationTrial {
    ConcentrationQuantity quantity = ConcentrationQuantity::encoder_overlap;
    std::size_t n_qubits = 0;
    std::size_t d_qubits = 0; // equals n_qubits for the encoder overlap
    std::size_t depth = 0;
    std::size_t trials = 0;
    double delta = 0.05;
    double expected = 0.0; // Haar mean
    double bound = 0.0;    // deviation allowed with probability 1 - delta
    double mean = 0.0;
    double variance = 0.0; // unbiased sample variance
    double violation_rate = 0.0;
    std::vector<double> values;

    [[nodiscard]] double standard_error() const {
        return std::sqrt(variance / static_cast<double>(std::max<std::size_t>(1, trials)));
    }
};

namespace detail {

inline void check_concentration_args(std::size_t n, std::size_t depth, std::size_t trials, double delta) {
    if (n < 1) {
        throw DomainError("need at least one qubit");
    }
    if (trials < 100) {
        throw DomainError("at least 100 trials are needed, got " + std::to_string(trials));
    }
    if (depth < 2 * n) {
        throw DomainError("depth " + std::to_string(depth) + " is below 2N = " + std::to_string(2 * n));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw DomainError("delta must lie in (0, 1)");
    }
}

/// |0...0> through the ansatz with angles uniform on [0, 2 pi).
[[nodiscard]] inline StateVector random_circuit_state(std::size_t n, std::size_t depth, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    std::vector<double> theta(AnsatzSpec::parameter_count(n, depth));
    for (auto &t : theta) {
        t = u(rng);
    }
    StateVector s(n);
    run_ansatz(s, depth, theta);
    return s;
}

inline void summarise(ConcentrationTrial &r, bool strict) {
    const double m = static_cast<double>(r.values.size());
    double sum = 0.0;
    for (double v : r.values) {
        sum += v;
    }
    r.mean = sum / m;
    double ss = 0.0;
    std::size_t bad = 0;
    for (double v : r.values) {
        ss += (v - r.mean) * (v - r.mean);
        const double dev = std::abs(v - r.expected);
        bad += (strict ? dev >= r.bound : dev > r.bound) ? 1 : 0;
    }
    r.variance = ss / (m - 1.0);
    r.violation_rate = static_cast<double>(bad) / m;
}

} // namespace detail

/// Overlaps |<psi_1|psi_2>|^2 of deep random-angle circuits on |0...0>,
/// checked against |v - 1/2^N| <= sqrt(3 / (2^(2N) delta)). Trial t draws its
/// angles from mix_seed(seed, .) so trials are order independent.
[[nodiscard]] inline ConcentrationTrial verify_encoder_concentration(std::size_t n, std::size_t depth,
                                                                     std::size_t trials, double delta,
                                                                     std::uint64_t seed,
                                                                     PairMode mode = PairMode::both_random) {
    detail::check_concentration_args(n, depth, trials, delta);
    ConcentrationTrial r;
    r.quantity = ConcentrationQuantity::encoder_overlap;
    r.n_qubits = n;
    r.d_qubits = n;
    r.depth = depth;
    r.trials = trials;
    r.delta = delta;
    const double dim = static_cast<double>(pow2(n));
    r.expected = 1.0 / dim;
    r.bound = std::sqrt(3.0 / (dim * dim * delta));
    const StateVector fixed = detail::random_circuit_state(n, depth, mix_seed(seed, ~std::uint64_t{0}));
    for (std::size_t t = 0; t < trials; ++t) {
        const StateVector a =
            mode == PairMode::fixed_first ? fixed : detail::random_circuit_state(n, depth, mix_seed(seed, 2 * t));
        const StateVector b = detail::random_circuit_state(n, depth, mix_seed(seed, 2 * t + 1));
        r.values.push_back(std::norm(a.amplitudes().dot(b.amplitudes())));
    }
    detail::summarise(r, false);
    return r;
}

/// Tr(rho o) for rho the first-D-qubit reduction of a deep random-angle
/// circuit on |0...0>, checked against
/// |v - Tr o / 2^D| < sqrt((Tr(o)^2 + 2 Tr(o^2)) / (2^(2D) delta)).
[[nodiscard]] inline ConcentrationTrial verify_ansatz_concentration(std::size_t n, std::size_t d, std::size_t depth,
                                                                    std::size_t trials, double delta,
                                                                    const CMatrix &o, std::uint64_t seed) {
    detail::check_concentration_args(n, depth, trials, delta);
    if (d < 1 || d > n) {
        throw DomainError("measured qubit count must lie in [1, N]");
    }
    detail::check_square(o, pow2(d));
    if (hermiticity_residual(o) > 1e-10) {
        throw DomainError("observable is not Hermitian");
    }
    ConcentrationTrial r;
    r.quantity = ConcentrationQuantity::ansatz_output;
    r.n_qubits = n;
    r.d_qubits = d;
    r.depth = depth;
    r.trials = trials;
    r.delta = delta;
    const double dim = static_cast<double>(pow2(d));
    const double tr = o.trace().real();
    const double tr2 = trace_product(o, o).real();
    r.expected = tr / dim;
    r.bound = std::sqrt((tr * tr + 2.0 * tr2) / (dim * dim * delta));
    for (std::size_t t = 0; t < trials; ++t) {
        const StateVector s = detail::random_circuit_state(n, depth, mix_seed(seed, t));
        r.values.push_back(expectation(reduce_to_leading(s.amplitudes(), n, d), o));
    }
    detail::summarise(r, true);
    return r;
}

[[nodiscard]] inline std::string concentration_csv_header() {
    return "quantity,N,D,depth,trials,delta,mean,variance,bound,violation_rate";
}

inline void write_concentration_row(const ConcentrationTrial &r, std::ostream &out) {
    const auto old = out.precision(17);
    out << to_string(r.quantity) << ',' << r.n_qubits << ',' << r.d_qubits << ',' << r.depth << ',' << r.trials << ','
        << r.delta << ',' << r.mean << ',' << r.variance << ',' << r.bound << ',' << r.violation_rate << '\n';
    out.precision(old);
}

} // namespace qcrisk
