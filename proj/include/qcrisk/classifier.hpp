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
 * @file classifier.hpp
 * The quantum classifier h_k(x) = Tr(rho(x) o_k), its loss variants,
 * parameter-shift gradients, AdaGrad and the mini-batch training loop.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "data_io.hpp"
#include "geometry.hpp"
#include "measurements.hpp"
#include "quantum_core.hpp"

namespace qcrisk {

// ---------------------------------------------------------------------------
// Loss

enum class LossVariant { plain_mse, regularized_rho_o, regularized_rho_fixed_o };

[[nodiscard]] inline std::string to_string(LossVariant v) {
    switch (v) {
    case LossVariant::plain_mse:
        return "plain_mse";
    case LossVariant::regularized_rho_o:
        return "regularized_rho_o";
    case LossVariant::regularized_rho_fixed_o:
        return "regularized_rho_fixed_o";
    }
    return "?";
}

[[nodiscard]] inline LossVariant loss_variant_from_string(const std::string &s) {
    if (s == "plain_mse") {
        return LossVariant::plain_mse;
    }
    if (s == "regularized_rho_o") {
        return LossVariant::regularized_rho_o;
    }
    if (s == "regularized_rho_fixed_o") {
        return LossVariant::regularized_rho_fixed_o;
    }
    throw DomainError("unknown loss variant '" + s + "'");
}

struct LossConfig {
    LossVariant variant = LossVariant::plain_mse;
    double lambda_rho = 0.0;
    double lambda_o = 0.0;
    bool etf_label_mode = false;

    [[nodiscard]] bool penalises_rho() const noexcept { return variant != LossVariant::plain_mse; }
    [[nodiscard]] bool penalises_o() const noexcept { return variant == LossVariant::regularized_rho_o; }

    /// C1 = K sqrt(n_c lambda_o lambda_rho).
    [[nodiscard]] double c1(std::size_t k, std::size_t n_c) const {
        return static_cast<double>(k) * std::sqrt(static_cast<double>(n_c) * lambda_o * lambda_rho);
    }

    void validate(std::size_t k, std::size_t n_c) const {
        if (lambda_rho < 0.0 || lambda_o < 0.0) {
            throw DomainError("regularisation weights must be non-negative");
        }
        if (variant == LossVariant::regularized_rho_o) {
            if (lambda_o > static_cast<double>(n_c) * lambda_rho) {
                throw DomainError("lambda_o must not exceed n_c * lambda_rho");
            }
            if (c1(k, n_c) > 1.0) {
                throw DomainError("C1 = K sqrt(n_c lambda_o lambda_rho) exceeds 1");
            }
        }
    }
};

/// Target vector for class `label`: one-hot, or column `label` of the K x K
/// simplex ETF sqrt(K/(K-1)) (I - 11^T/K) in ETF-label mode.
[[nodiscard]] inline RVector label_target(int label, std::size_t k, bool etf_mode) {
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
        throw DomainError("label " + std::to_string(label) + " out of range");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    if (!etf_mode) {
        RVector y = RVector::Zero(kk);
        y(label) = 1.0;
        return y;
    }
    if (k < 2) {
        throw DomainError("ETF labels need at least two classes");
    }
    const double kd = static_cast<double>(k);
    RVector y = RVector::Constant(kk, -1.0 / kd);
    y(label) += 1.0;
    return std::sqrt(kd / (kd - 1.0)) * y;
}

struct LossBreakdown {
    double risk = 0.0;        // mean of 1/2 ||h - y||^2
    double rho_penalty = 0.0; // lambda_rho / 2 sum_i ||rho_i||_F^2
    double o_penalty = 0.0;   // lambda_o / 2 sum_k ||o_k||_F^2
    double total = 0.0;
};

[[nodiscard]] inline double empirical_risk(const std::vector<RVector> &preds, const std::vector<RVector> &targets) {
    if (preds.size() != targets.size()) {
        throw DimensionError("prediction and label counts differ");
    }
    if (preds.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != targets[i].size()) {
            throw DimensionError("prediction and label lengths differ");
        }
        s += 0.5 * (preds[i] - targets[i]).squaredNorm();
    }
    return s / static_cast<double>(preds.size());
}

/// Objective of the configured variant. The penalties sum over the features
/// and operators passed in.
[[nodiscard]] inline LossBreakdown loss(const std::vector<RVector> &preds, const std::vector<RVector> &targets,
                                        const std::vector<CMatrix> &features, const std::vector<CMatrix> &ops,
                                        const LossConfig &cfg) {
    LossBreakdown b;
    b.risk = empirical_risk(preds, targets);
    if (cfg.penalises_rho()) {
        for (const auto &rho : features) {
            b.rho_penalty += 0.5 * cfg.lambda_rho * rho.squaredNorm();
        }
    }
    if (cfg.penalises_o()) {
        for (const auto &o : ops) {
            b.o_penalty += 0.5 * cfg.lambda_o * o.squaredNorm();
        }
    }
    b.total = b.risk + b.rho_penalty + b.o_penalty;
    return b;
}

/// Collapsed configuration of the regularized objective: every sample of
/// class k sits at a |k><k| and o_k = b |k><k|. Inside this family the
/// objective is 1/2 (ab - 1)^2 + lambda_rho n a^2 / 2 + lambda_o K b^2 / 2,
/// stationary at ab = 1 - C1 and b / a = sqrt(n_c lambda_rho / lambda_o).
struct CollapsedOptimum {
    std::vector<CMatrix> means;
    std::vector<CMatrix> ops;
    double a = 0.0;
    double b = 0.0;
    double c1 = 0.0;
};

[[nodiscard]] inline CollapsedOptimum collapsed_optimum(std::size_t k, std::size_t d, std::size_t n_c, double lambda_rho,
                                                        double lambda_o) {
    if (pow2(d) < k || k < 2 || n_c < 1) {
        throw DomainError("collapsed optimum needs 2 <= K <= 2^D and n_c >= 1");
    }
    if (!(lambda_rho > 0.0 && lambda_o > 0.0)) {
        throw DomainError("collapsed optimum needs positive regularisation weights");
    }
    LossConfig cfg{LossVariant::regularized_rho_o, lambda_rho, lambda_o, false};
    cfg.validate(k, n_c);
    CollapsedOptimum opt;
    opt.c1 = cfg.c1(k, n_c);
    const double ratio = std::sqrt(static_cast<double>(n_c) * lambda_rho / lambda_o); // b / a
    opt.a = std::sqrt((1.0 - opt.c1) / ratio);
    opt.b = ratio * opt.a;
    const auto dim = static_cast<Eigen::Index>(pow2(d));
    for (std::size_t c = 0; c < k; ++c) {
        CMatrix p = CMatrix::Zero(dim, dim);
        p(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) = 1.0;
        opt.means.push_back(opt.a * p);
        opt.ops.push_back(opt.b * p);
    }
    return opt;
}

// ---------------------------------------------------------------------------
// Hypothesis

/// Feature state after the ansatz, as a raw matrix.
[[nodiscard]] inline CMatrix feature_after_ansatz(StateVector state, std::size_t n_layers,
                                                  std::span<const double> theta, std::size_t d_keep) {
    run_ansatz(state, n_layers, theta);
    return reduce_to_leading(state.amplitudes(), state.n_qubits(), d_keep);
}

[[nodiscard]] inline RVector predict_from_feature(const CMatrix &rho, const std::vector<CMatrix> &ops) {
    RVector h(static_cast<Eigen::Index>(ops.size()));
    for (std::size_t k = 0; k < ops.size(); ++k) {
        h(static_cast<Eigen::Index>(k)) = expectation(rho, ops[k]);
    }
    return h;
}

[[nodiscard]] inline RVector predict(const EncoderInput &x, const EncoderSpec &enc, const AnsatzSpec &ansatz,
                                     const MeasurementSet &ms) {
    const StateVector out = apply_ansatz(encode(enc, x), ansatz);
    return predict_from_feature(reduce_to_leading(out.amplitudes(), out.n_qubits(), ms.d_qubits), ms.operators);
}

/// Index of the largest entry; ties go to the lowest index.
[[nodiscard]] inline int argmax(const RVector &h) {
    int best = 0;
    for (Eigen::Index k = 1; k < h.size(); ++k) {
        if (h(k) > h(best)) {
            best = static_cast<int>(k);
        }
    }
    return best;
}

/// Trained or trainable classifier: encoder, ansatz depth, operators, angles.
struct QcModel {
    EncoderSpec enc;
    std::size_t n_layers = 0;
    MeasurementSet ms;
    RVector theta;

    [[nodiscard]] AnsatzSpec ansatz() const { return {enc.n_qubits, n_layers, theta}; }
    [[nodiscard]] std::size_t parameter_count() const { return AnsatzSpec::parameter_count(enc.n_qubits, n_layers); }

    [[nodiscard]] CMatrix feature(const EncoderInput &x) const {
        return feature_after_ansatz(encode(enc, x), n_layers, std::span<const double>(theta.data(), theta.size()),
                                    ms.d_qubits);
    }
    [[nodiscard]] RVector predict(const EncoderInput &x) const { return predict_from_feature(feature(x), ms.operators); }
};

// ---------------------------------------------------------------------------
// Gradient

/// Batch objective as a function of the ansatz angles (finite-difference
/// oracle and line-search helper).
[[nodiscard]] inline double batch_objective(const std::vector<StateVector> &encoded, const std::vector<RVector> &targets,
                                            std::size_t n_layers, const RVector &theta, const MeasurementSet &ms,
                                            const LossConfig &cfg) {
    std::vector<RVector> preds;
    std::vector<CMatrix> feats;
    for (const auto &s : encoded) {
        feats.push_back(feature_after_ansatz(s, n_layers, std::span<const double>(theta.data(), theta.size()),
                                             ms.d_qubits));
        preds.push_back(predict_from_feature(feats.back(), ms.operators));
    }
    return loss(preds, targets, feats, ms.operators, cfg).total;
}

/// Exact gradient of batch_objective by the two-point parameter shift. Each
/// angle enters one rotation, so every entry of rho is a first-order
/// sinusoid in it and d rho = (rho(+pi/2) - rho(-pi/2)) / 2 holds exactly.
[[nodiscard]] inline RVector gradient(const std::vector<StateVector> &encoded, const std::vector<RVector> &targets,
                                      std::size_t n_layers, const RVector &theta, const MeasurementSet &ms,
                                      const LossConfig &cfg) {
    if (encoded.size() != targets.size()) {
        throw DimensionError("sample and label counts differ");
    }
    const auto p = theta.size();
    RVector grad = RVector::Zero(p);
    if (encoded.empty()) {
        return grad;
    }
    const double inv_b = 1.0 / static_cast<double>(encoded.size());
    const std::size_t d = ms.d_qubits;
    RVector shifted = theta;
    const auto view = [&shifted] { return std::span<const double>(shifted.data(), shifted.size()); };

    for (std::size_t i = 0; i < encoded.size(); ++i) {
        const CMatrix rho = feature_after_ansatz(encoded[i], n_layers, view(), d);
        const RVector resid = predict_from_feature(rho, ms.operators) - targets[i];
        // d objective / d rho, as a matrix G with d objective = Re Tr(G d rho)
        CMatrix g = CMatrix::Zero(rho.rows(), rho.cols());
        for (std::size_t k = 0; k < ms.size(); ++k) {
            g += (inv_b * resid(static_cast<Eigen::Index>(k))) * ms.operators[k];
        }
        if (cfg.penalises_rho()) {
            g += cfg.lambda_rho * rho;
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            shifted(j) = theta(j) + kPi / 2.0;
            const CMatrix plus = feature_after_ansatz(encoded[i], n_layers, view(), d);
            shifted(j) = theta(j) - kPi / 2.0;
            const CMatrix minus = feature_after_ansatz(encoded[i], n_layers, view(), d);
            shifted(j) = theta(j);
            grad(j) += 0.5 * trace_product(g, plus - minus).real();
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// AdaGrad

struct AdaGradState {
    RVector accumulator;
};

inline constexpr double kAdaGradEps = 1e-10;

/// accumulator += g^2; params -= lr g / (sqrt(accumulator) + 1e-10).
inline void adagrad_step(RVector &params, const RVector &grad, AdaGradState &state, double lr) {
    if (!(lr > 0.0)) {
        throw DomainError("learning rate must be positive");
    }
    if (grad.size() != params.size()) {
        throw DimensionError("gradient and parameter lengths differ");
    }
    if (state.accumulator.size() == 0) {
        state.accumulator = RVector::Zero(params.size());
    }
    if (state.accumulator.size() != params.size()) {
        throw DimensionError("optimizer state has wrong length");
    }
    state.accumulator.array() += grad.array().square();
    params.array() -= lr * grad.array() / (state.accumulator.array().sqrt() + kAdaGradEps);
}

// ---------------------------------------------------------------------------
// Training record

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    std::vector<double> m1;                  // per class, on the train features
    RMatrix m2;                              // class-mean overlaps, train features
    std::vector<std::array<double, 3>> bloch; // train features, only when D = 1
};

struct TrainRecord {
    std::string model; // "qc" or "mlp"
    std::size_t n = 0; // train size
    std::size_t n_params = 0;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    double lr = 0.0;
    std::size_t batch = 0;
    std::vector<int> train_labels;
    std::vector<EpochMetrics> history; // epochs + 1 entries, entry 0 before training
    RVector params;

    [[nodiscard]] const EpochMetrics &final_metrics() const { return history.back(); }

    /// Mean test loss over the last `tail` entries.
    [[nodiscard]] double tail_test_loss(std::size_t tail) const {
        const std::size_t t = std::clamp<std::size_t>(tail, 1, history.size());
        double s = 0.0;
        for (std::size_t i = history.size() - t; i < history.size(); ++i) {
            s += history[i].test_loss;
        }
        return s / static_cast<double>(t);
    }
};

inline void write_jsonl(const TrainRecord &r, std::ostream &out) {
    for (const auto &e : r.history) {
        nlohmann::json j{{"model", r.model},         {"seed", r.seed},          {"n", r.n},
                         {"N_t", r.n_params},        {"T", r.epochs},           {"learning_rate", r.lr},
                         {"batch_size", r.batch},    {"epoch", e.epoch},        {"train_loss", e.train_loss},
                         {"test_loss", e.test_loss}, {"train_acc", e.train_acc}, {"test_acc", e.test_acc},
                         {"m1", e.m1},               {"m2", detail::real_matrix_to_json(e.m2)}};
        if (!e.bloch.empty()) {
            j["bloch"] = e.bloch;
            j["bloch_labels"] = r.train_labels;
        }
        out << j.dump() << '\n';
    }
}

[[nodiscard]] inline std::string summary_csv_header() {
    return "seed,n,N_t,T,final_train_loss,final_test_loss,final_train_acc,final_test_acc";
}

inline void write_summary_row(const TrainRecord &r, std::ostream &out) {
    const auto &f = r.final_metrics();
    const auto old = out.precision(17);
    out << r.seed << ',' << r.n << ',' << r.n_params << ',' << r.epochs << ',' << f.train_loss << ',' << f.test_loss
        << ',' << f.train_acc << ',' << f.test_acc << '\n';
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Training

struct QcTrainConfig {
    EncoderSpec enc;
    std::size_t n_layers = 3;
    MeasurementSet ms;
    std::size_t epochs = 50;
    double lr = 0.5;
    std::size_t batch = 4;
    std::uint64_t seed = 0;
    LossConfig loss;
    bool record_geometry = true;
};

struct Evaluation {
    std::vector<CMatrix> features;
    std::vector<RVector> preds;
    LossBreakdown loss;
    double accuracy = 0.0;
};

[[nodiscard]] inline Evaluation evaluate(const std::vector<StateVector> &encoded, const std::vector<int> &labels,
                                         const std::vector<RVector> &targets, std::size_t n_layers, const RVector &theta,
                                         const MeasurementSet &ms, const LossConfig &cfg) {
    Evaluation ev;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        ev.features.push_back(feature_after_ansatz(encoded[i], n_layers, std::span<const double>(theta.data(), theta.size()),
                                                   ms.d_qubits));
        ev.preds.push_back(predict_from_feature(ev.features.back(), ms.operators));
        correct += argmax(ev.preds.back()) == labels[i] ? 1 : 0;
    }
    ev.loss = loss(ev.preds, targets, ev.features, ms.operators, cfg);
    ev.accuracy = encoded.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(encoded.size());
    return ev;
}

/// Uniform [0, 2 pi) start angles.
[[nodiscard]] inline RVector initial_angles(std::size_t count, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    RVector theta(static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        theta(j) = u(rng);
    }
    return theta;
}

namespace detail {

inline void check_training_data(const Split &data, std::size_t k) {
    if (data.train.empty() || data.test.empty()) {
        throw DomainError("train and test sets must both be non-empty");
    }
    if (data.train.num_classes != k) {
        throw DimensionError("dataset has " + std::to_string(data.train.num_classes) + " classes, model outputs " +
                             std::to_string(k));
    }
}

[[nodiscard]] inline std::vector<RVector> targets_for(const Dataset &ds, std::size_t k, bool etf) {
    std::vector<RVector> t;
    for (const auto &e : ds.examples) {
        t.push_back(label_target(e.label, k, etf));
    }
    return t;
}

} // namespace detail

/// Mini-batch AdaGrad on the ansatz angles. The operators stay fixed, so the
/// lambda_o penalty is a constant offset of the objective.
[[nodiscard]] inline TrainRecord train_qc(const Split &data, const QcTrainConfig &cfg) {
    const std::size_t k = cfg.ms.size();
    detail::check_training_data(data, k);
    if (cfg.batch == 0) {
        throw DomainError("batch size must be >= 1");
    }
    if (cfg.ms.d_qubits > cfg.enc.n_qubits) {
        throw DimensionError("measurement acts on more qubits than the circuit has");
    }
    cfg.loss.validate(k, data.train.size() / k);

    std::vector<StateVector> enc_train;
    std::vector<StateVector> enc_test;
    for (const auto &e : data.train.examples) {
        enc_train.push_back(encode(cfg.enc, e.features));
    }
    for (const auto &e : data.test.examples) {
        enc_test.push_back(encode(cfg.enc, e.features));
    }
    const auto y_train = data.train.labels();
    const auto y_test = data.test.labels();
    const auto t_train = detail::targets_for(data.train, k, cfg.loss.etf_label_mode);
    const auto t_test = detail::targets_for(data.test, k, cfg.loss.etf_label_mode);

    TrainRecord rec;
    rec.model = "qc";
    rec.n = data.train.size();
    rec.n_params = AnsatzSpec::parameter_count(cfg.enc.n_qubits, cfg.n_layers);
    rec.epochs = cfg.epochs;
    rec.seed = cfg.seed;
    rec.lr = cfg.lr;
    rec.batch = cfg.batch;
    rec.train_labels = y_train;

    std::mt19937_64 rng(cfg.seed);
    RVector theta = initial_angles(rec.n_params, rng);
    AdaGradState opt;

    const auto record = [&](std::size_t epoch) {
        const auto tr = evaluate(enc_train, y_train, t_train, cfg.n_layers, theta, cfg.ms, cfg.loss);
        const auto te = evaluate(enc_test, y_test, t_test, cfg.n_layers, theta, cfg.ms, cfg.loss);
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = tr.loss.total;
        m.test_loss = te.loss.total;
        m.train_acc = tr.accuracy;
        m.test_acc = te.accuracy;
        if (cfg.record_geometry) {
            const auto grouped = group_by_label(tr.features, y_train, k);
            m.m1 = m1(grouped);
            m.m2 = m2(class_means(grouped));
            if (cfg.ms.d_qubits == 1) {
                for (const auto &rho : tr.features) {
                    m.bloch.push_back(bloch_vector(rho));
                }
            }
        }
        rec.history.push_back(std::move(m));
    };

    record(0);
    std::vector<std::size_t> order(enc_train.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch);
            std::vector<StateVector> xb;
            std::vector<RVector> yb;
            for (std::size_t i = start; i < stop; ++i) {
                xb.push_back(enc_train[order[i]]);
                yb.push_back(t_train[order[i]]);
            }
            adagrad_step(theta, gradient(xb, yb, cfg.n_layers, theta, cfg.ms, cfg.loss), opt, cfg.lr);
        }
        record(epoch);
    }
    rec.params = theta;
    return rec;
}

// ---------------------------------------------------------------------------
// Model files

inline void to_json(nlohmann::json &j, const QcModel &m) {
    j = nlohmann::json{{"model", "qc"},
                       {"encoder", m.enc.kind == EncoderKind::basis ? "basis" : "amplitude"},
                       {"n_qubits", m.enc.n_qubits},
                       {"gate_counts",
                        {{"total", m.enc.total_gates}, {"tunable", m.enc.tunable_gates}, {"max_arity", m.enc.max_arity}}},
                       {"n_layers", m.n_layers},
                       {"measurement", m.ms},
                       {"theta", std::vector<double>(m.theta.data(), m.theta.data() + m.theta.size())}};
}

inline void from_json(const nlohmann::json &j, QcModel &m) {
    const auto n = j.at("n_qubits").get<std::size_t>();
    const auto kind = j.at("encoder").get<std::string>();
    if (kind == "basis") {
        m.enc = EncoderSpec::basis(n);
    } else if (kind == "amplitude") {
        m.enc = EncoderSpec::amplitude(n, 0, 0, 1);
    } else {
        throw DomainError("unknown encoder kind '" + kind + "'");
    }
    if (j.contains("gate_counts")) {
        const auto &g = j.at("gate_counts");
        m.enc.total_gates = g.at("total").get<std::size_t>();
        m.enc.tunable_gates = g.at("tunable").get<std::size_t>();
        m.enc.max_arity = g.at("max_arity").get<std::size_t>();
    }
    m.n_layers = j.at("n_layers").get<std::size_t>();
    m.ms = j.at("measurement").get<MeasurementSet>();
    const auto theta = j.at("theta").get<std::vector<double>>();
    m.theta = Eigen::Map<const RVector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    m.ansatz().check();
}

} // namespace qcrisk
