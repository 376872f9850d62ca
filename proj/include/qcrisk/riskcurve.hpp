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
 * @file riskcurve.hpp
 * Risk-curve estimation: train over a grid of (n, N_t, T) tuples and seeds,
 * average the test losses, fit a polynomial in N_t and locate its minimum.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "classifier.hpp"
#include "mlp.hpp"

namespace qcrisk {

// ---------------------------------------------------------------------------
// Polynomial fitting

struct CurvePoint {
    double x = 0.0;    // N_t
    double mean = 0.0; // mean test loss over seeds
    double std = 0.0;  // sample standard deviation over seeds
    std::size_t seeds = 1;
};

struct Basin {
    double x = 0.0;
    double value = 0.0;
    bool interior = false; // false: the minimum sits on an endpoint
};

struct RiskCurveFit {
    std::vector<CurvePoint> points;
    std::size_t degree = 0;
    double x_center = 0.0; // t = (x - x_center) / x_half_width
    double x_half_width = 1.0;
    RVector scaled_coefficients; // ascending powers of t
    RVector coefficients;        // ascending powers of x
    double rss = 0.0;
    std::optional<Basin> basin;

    [[nodiscard]] double to_scaled(double x) const { return (x - x_center) / x_half_width; }

    [[nodiscard]] double operator()(double x) const {
        const double t = to_scaled(x);
        double v = 0.0;
        for (Eigen::Index j = scaled_coefficients.size() - 1; j >= 0; --j) {
            v = v * t + scaled_coefficients(j);
        }
        return v;
    }

    [[nodiscard]] double x_min() const {
        return std::min_element(points.begin(), points.end(), [](auto &a, auto &b) { return a.x < b.x; })->x;
    }
    [[nodiscard]] double x_max() const {
        return std::max_element(points.begin(), points.end(), [](auto &a, auto &b) { return a.x < b.x; })->x;
    }
};

namespace detail {

[[nodiscard]] inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

/// Coefficients of sum_j c_j ((x - c) / s)^j in powers of x.
[[nodiscard]] inline RVector unscale(const RVector &c, double center, double half) {
    RVector out = RVector::Zero(c.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        const double scale = c(j) / std::pow(half, static_cast<double>(j));
        for (Eigen::Index i = 0; i <= j; ++i) {
            out(i) += scale * binomial(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) *
                      std::pow(-center, static_cast<double>(j - i));
        }
    }
    return out;
}

} // namespace detail

/// Least-squares polynomial of the given degree through (x, mean) pairs.
/// Solves the normal equations in t = affine map of x onto [-1, 1].
[[nodiscard]] inline RiskCurveFit polyfit(const std::vector<CurvePoint> &points, std::size_t degree) {
    if (points.empty()) {
        throw DomainError("polyfit needs at least one point");
    }
    std::set<double> distinct;
    for (const auto &p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.mean)) {
            throw DomainError("polyfit input is not finite");
        }
        distinct.insert(p.x);
    }
    if (distinct.size() < degree + 1) {
        throw RankDeficiencyError("degree " + std::to_string(degree) + " needs " + std::to_string(degree + 1) +
                                  " distinct x values, have " + std::to_string(distinct.size()));
    }
    RiskCurveFit fit;
    fit.points = points;
    fit.degree = degree;
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    fit.x_center = 0.5 * (lo + hi);
    fit.x_half_width = hi > lo ? 0.5 * (hi - lo) : 1.0;

    const auto m = static_cast<Eigen::Index>(points.size());
    const auto p = static_cast<Eigen::Index>(degree + 1);
    RMatrix v(m, p);
    RVector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double t = fit.to_scaled(points[static_cast<std::size_t>(i)].x);
        double pw = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            v(i, j) = pw;
            pw *= t;
        }
        y(i) = points[static_cast<std::size_t>(i)].mean;
    }
    const RMatrix normal = v.transpose() * v;
    Eigen::LDLT<RMatrix> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-13 * ldlt.vectorD().maxCoeff()) {
        throw RankDeficiencyError("normal equations are singular");
    }
    fit.scaled_coefficients = ldlt.solve(v.transpose() * y);
    fit.coefficients = detail::unscale(fit.scaled_coefficients, fit.x_center, fit.x_half_width);
    fit.rss = (v * fit.scaled_coefficients - y).squaredNorm();
    return fit;
}

/// Fits every feasible degree in [lo, hi] and keeps the smallest one whose
/// residual is within 5% of the best.
[[nodiscard]] inline RiskCurveFit select_degree(const std::vector<CurvePoint> &points, std::size_t lo = 2,
                                                std::size_t hi = 4) {
    std::set<double> distinct;
    for (const auto &p : points) {
        distinct.insert(p.x);
    }
    const std::size_t max_deg = std::min(hi, distinct.size() - 1);
    if (max_deg < lo) {
        return polyfit(points, max_deg);
    }
    // residuals at round-off level count as equal
    double floor = 0.0;
    for (const auto &p : points) {
        floor += p.mean * p.mean;
    }
    floor *= 1e-20;
    std::vector<RiskCurveFit> fits;
    double best = INFINITY;
    for (std::size_t d = lo; d <= max_deg; ++d) {
        fits.push_back(polyfit(points, d));
        best = std::min(best, fits.back().rss);
    }
    for (auto &f : fits) {
        if (f.rss <= 1.05 * best + floor) {
            return f;
        }
    }
    return fits.back();
}

/// Real roots of sum_j c_j t^j via the companion matrix.
[[nodiscard]] inline std::vector<double> real_roots(RVector c, double imag_tol = 1e-8) {
    Eigen::Index n = c.size() - 1;
    const double scale = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
    while (n > 0 && std::abs(c(n)) <= 1e-14 * scale) {
        --n;
    }
    if (n < 1) {
        return {};
    }
    RMatrix comp = RMatrix::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) {
        comp(i, i - 1) = 1.0;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        comp(i, n - 1) = -c(i) / c(n);
    }
    Eigen::EigenSolver<RMatrix> es(comp, false);
    std::vector<double> roots;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) < imag_tol) {
            roots.push_back(z.real());
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

/// Global minimum of the fitted curve on [x_lo, x_hi]: critical points from
/// the derivative roots, compared with both endpoints.
[[nodiscard]] inline Basin find_basin(const RiskCurveFit &fit, double x_lo, double x_hi) {
    if (!(x_lo <= x_hi)) {
        throw DomainError("basin domain is empty");
    }
    const auto &c = fit.scaled_coefficients;
    RVector deriv = RVector::Zero(std::max<Eigen::Index>(1, c.size() - 1));
    for (Eigen::Index j = 1; j < c.size(); ++j) {
        deriv(j - 1) = static_cast<double>(j) * c(j);
    }
    Basin best{x_lo, fit(x_lo), false};
    const auto consider = [&](double x, bool interior) {
        const double v = fit(x);
        if (v < best.value) {
            best = {x, v, interior};
        }
    };
    consider(x_hi, false);
    const double t_lo = fit.to_scaled(x_lo);
    const double t_hi = fit.to_scaled(x_hi);
    for (double t : real_roots(deriv)) {
        if (t > t_lo && t < t_hi) {
            consider(fit.x_center + fit.x_half_width * t, true);
        }
    }
    return best;
}

[[nodiscard]] inline Basin find_basin(const RiskCurveFit &fit) { return find_basin(fit, fit.x_min(), fit.x_max()); }

// ---------------------------------------------------------------------------
// Sweeps

enum class ClassifierKind { qc, mlp, both };

struct SweepTuple {
    std::size_t n = 0;        // training examples
    std::size_t n_params = 0; // N_t
    std::size_t epochs = 0;   // T
};

struct SweepPlan {
    std::vector<SweepTuple> tuples;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    ClassifierKind kind = ClassifierKind::qc;
    Dataset dataset;
    double train_ratio = 0.75;
    QcTrainConfig qc;   // encoder, measurements, learning rate, batch, loss
    MlpTrainConfig mlp; // learning rate and batch
    std::size_t threads = 1;

    [[nodiscard]] bool runs_qc() const { return kind != ClassifierKind::mlp; }
    [[nodiscard]] bool runs_mlp() const { return kind != ClassifierKind::qc; }

    void validate() const {
        if (tuples.empty()) {
            throw DomainError("sweep plan has no tuples");
        }
        if (seeds.empty()) {
            throw DomainError("sweep plan has no seeds");
        }
        for (const auto &t : tuples) {
            if (t.n == 0 || t.n % dataset.num_classes != 0) {
                throw DomainError("tuple train size " + std::to_string(t.n) + " is not a positive multiple of K");
            }
            if (runs_qc()) {
                (void)layers_for_parameter_count(t.n_params, qc.enc.n_qubits);
            }
            if (runs_mlp() && t.n_params == 0) {
                throw DomainError("MLP parameter count must be positive");
            }
        }
    }
};

struct SweepRun {
    std::string kind;
    std::size_t tuple = 0;
    std::uint64_t seed = 0;
    TrainRecord record;
};

/// Applies `job(i)` for i in [0, count) on `threads` workers. Results must be
/// written to slot i so completion order does not matter.
template <class Job> void parallel_for(std::size_t count, std::size_t threads, Job job) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            job(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// One training run per (kind, tuple, seed): stratified split with the seed,
/// a class-balanced subsample of n training examples, then training.
[[nodiscard]] inline std::vector<SweepRun> run_sweep(const SweepPlan &plan) {
    plan.validate();
    std::vector<SweepRun> runs;
    for (const std::string kind : {"qc", "mlp"}) {
        if ((kind == "qc" && !plan.runs_qc()) || (kind == "mlp" && !plan.runs_mlp())) {
            continue;
        }
        for (std::size_t t = 0; t < plan.tuples.size(); ++t) {
            for (auto seed : plan.seeds) {
                runs.push_back({kind, t, seed, {}});
            }
        }
    }
    parallel_for(runs.size(), plan.threads, [&](std::size_t i) {
        auto &run = runs[i];
        const auto &tuple = plan.tuples[run.tuple];
        Split data = split(plan.dataset, plan.train_ratio, run.seed);
        if (data.train.size() < tuple.n) {
            throw DomainError("tuple asks for " + std::to_string(tuple.n) + " training examples, split has " +
                              std::to_string(data.train.size()));
        }
        data.train = balanced_subsample(data.train, tuple.n, run.seed);
        if (run.kind == "qc") {
            QcTrainConfig cfg = plan.qc;
            cfg.n_layers = layers_for_parameter_count(tuple.n_params, cfg.enc.n_qubits);
            cfg.epochs = tuple.epochs;
            cfg.seed = run.seed;
            cfg.record_geometry = false;
            run.record = train_qc(data, cfg);
        } else {
            MlpTrainConfig cfg = plan.mlp;
            cfg.hidden = mlp_hidden_for_params(tuple.n_params, plan.dataset.feature_dim(), plan.dataset.num_classes);
            cfg.epochs = tuple.epochs;
            cfg.seed = run.seed;
            run.record = train_mlp(data, cfg);
        }
    });
    return runs;
}

enum class LossAggregation { final_epoch, tail_average };

/// Mean and sample std of the test loss per tuple for one classifier kind.
[[nodiscard]] inline std::vector<CurvePoint> aggregate(const std::vector<SweepRun> &runs, const SweepPlan &plan,
                                                       const std::string &kind,
                                                       LossAggregation how = LossAggregation::final_epoch,
                                                       std::size_t tail = 5) {
    std::vector<CurvePoint> pts;
    for (std::size_t t = 0; t < plan.tuples.size(); ++t) {
        std::vector<double> losses;
        for (const auto &r : runs) {
            if (r.kind == kind && r.tuple == t) {
                losses.push_back(how == LossAggregation::final_epoch ? r.record.final_metrics().test_loss
                                                                     : r.record.tail_test_loss(tail));
            }
        }
        if (losses.empty()) {
            continue;
        }
        CurvePoint p;
        p.x = static_cast<double>(plan.tuples[t].n_params);
        p.seeds = losses.size();
        for (double l : losses) {
            p.mean += l;
        }
        p.mean /= static_cast<double>(losses.size());
        if (losses.size() > 1) {
            double ss = 0.0;
            for (double l : losses) {
                ss += (l - p.mean) * (l - p.mean);
            }
            p.std = std::sqrt(ss / static_cast<double>(losses.size() - 1));
        }
        pts.push_back(p);
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Output

inline void to_json(nlohmann::json &j, const RiskCurveFit &f) {
    j = nlohmann::json{{"degree", f.degree},
                       {"coefficients", std::vector<double>(f.coefficients.data(), f.coefficients.data() + f.coefficients.size())},
                       {"scaled_coefficients",
                        std::vector<double>(f.scaled_coefficients.data(),
                                            f.scaled_coefficients.data() + f.scaled_coefficients.size())},
                       {"x_center", f.x_center},
                       {"x_half_width", f.x_half_width},
                       {"rss", f.rss}};
    j["points"] = nlohmann::json::array();
    for (const auto &p : f.points) {
        j["points"].push_back({{"N_t", p.x}, {"mean_loss", p.mean}, {"std_loss", p.std}, {"seeds", p.seeds}});
    }
    if (f.basin) {
        j["basin"] = {{"N_t_star", f.basin->x}, {"fitted_loss", f.basin->value}, {"interior", f.basin->interior},
                      {"boundary", !f.basin->interior}};
    } else {
        j["basin"] = nullptr;
    }
}

[[nodiscard]] inline std::string riskcurve_csv_header() { return "series,N_t,mean_loss,std_loss,fitted_loss"; }

/// Data points followed by the fitted curve on a uniform grid.
inline void write_riskcurve_csv(const RiskCurveFit &f, std::ostream &out, std::size_t grid = 100) {
    const auto old = out.precision(17);
    out << riskcurve_csv_header() << '\n';
    for (const auto &p : f.points) {
        out << "point," << p.x << ',' << p.mean << ',' << p.std << ',' << f(p.x) << '\n';
    }
    const double lo = f.x_min();
    const double hi = f.x_max();
    if (lo == hi) {
        grid = 1;
    }
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = grid == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
        out << "grid," << x << ",,," << f(x) << '\n';
    }
    out.precision(old);
}

} // namespace qcrisk
