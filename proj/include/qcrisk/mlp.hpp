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
 * @file mlp.hpp
 * One-hidden-layer perceptron baseline: ReLU hidden layer, softmax output,
 * the same 1/2 ||p - y||^2 loss as the quantum model, AdaGrad training.
 */

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "classifier.hpp"

namespace qcrisk {

/// Parameters are stored flat: W1 (h x d, row-major), b1, W2 (K x h,
/// row-major), b2.
struct MlpSpec {
    std::size_t d = 0;
    std::size_t h = 0;
    std::size_t k = 0;
    RVector params;

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    MlpSpec() = default;
    MlpSpec(std::size_t d_in, std::size_t hidden, std::size_t classes)
        : d(d_in), h(hidden), k(classes), params(RVector::Zero(static_cast<Eigen::Index>(parameter_count(d_in, hidden, classes)))) {
        if (d == 0 || h == 0 || k == 0) {
            throw DomainError("MLP widths must be positive");
        }
    }

    [[nodiscard]] static std::size_t parameter_count(std::size_t d, std::size_t h, std::size_t k) {
        return d * h + h + h * k + k;
    }
    [[nodiscard]] std::size_t parameter_count() const { return parameter_count(d, h, k); }

    [[nodiscard]] Eigen::Map<const RowMajor> w1() const { return {params.data(), ei(h), ei(d)}; }
    [[nodiscard]] Eigen::Map<const RVector> b1() const { return {params.data() + d * h, ei(h)}; }
    [[nodiscard]] Eigen::Map<const RowMajor> w2() const { return {params.data() + d * h + h, ei(k), ei(h)}; }
    [[nodiscard]] Eigen::Map<const RVector> b2() const { return {params.data() + d * h + h + h * k, ei(k)}; }

    /// Uniform +-1/sqrt(fan_in) initialisation.
    void initialise(std::mt19937_64 &rng) {
        std::uniform_real_distribution<double> u1(-1.0 / std::sqrt(static_cast<double>(d)), 1.0 / std::sqrt(static_cast<double>(d)));
        std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(static_cast<double>(h)), 1.0 / std::sqrt(static_cast<double>(h)));
        const std::size_t first = d * h + h;
        for (std::size_t i = 0; i < parameter_count(); ++i) {
            params(ei(i)) = i < first ? u1(rng) : u2(rng);
        }
    }

  private:
    [[nodiscard]] static Eigen::Index ei(std::size_t v) { return static_cast<Eigen::Index>(v); }
};

struct MlpForward {
    RVector z1;
    RVector a1;
    RVector p;
};

[[nodiscard]] inline MlpForward mlp_forward(const MlpSpec &net, const RVector &x) {
    if (static_cast<std::size_t>(x.size()) != net.d) {
        throw DimensionError("MLP input has length " + std::to_string(x.size()) + ", expected " + std::to_string(net.d));
    }
    MlpForward f;
    f.z1 = net.w1() * x + net.b1();
    f.a1 = f.z1.cwiseMax(0.0);
    const RVector z2 = net.w2() * f.a1 + net.b2();
    const RVector e = (z2.array() - z2.maxCoeff()).exp();
    f.p = e / e.sum();
    return f;
}

[[nodiscard]] inline RVector mlp_predict(const MlpSpec &net, const RVector &x) { return mlp_forward(net, x).p; }

/// Mean 1/2 ||p - y||^2 over the batch.
[[nodiscard]] inline double mlp_loss(const MlpSpec &net, const std::vector<RVector> &xs, const std::vector<RVector> &ys) {
    std::vector<RVector> preds;
    for (const auto &x : xs) {
        preds.push_back(mlp_predict(net, x));
    }
    return empirical_risk(preds, ys);
}

/// Backpropagated gradient of mlp_loss, laid out like MlpSpec::params.
[[nodiscard]] inline RVector mlp_gradient(const MlpSpec &net, const std::vector<RVector> &xs, const std::vector<RVector> &ys) {
    if (xs.size() != ys.size()) {
        throw DimensionError("sample and label counts differ");
    }
    const auto d = static_cast<Eigen::Index>(net.d);
    const auto h = static_cast<Eigen::Index>(net.h);
    const auto k = static_cast<Eigen::Index>(net.k);
    RVector grad = RVector::Zero(net.params.size());
    if (xs.empty()) {
        return grad;
    }
    Eigen::Map<MlpSpec::RowMajor> gw1(grad.data(), h, d);
    Eigen::Map<RVector> gb1(grad.data() + d * h, h);
    Eigen::Map<MlpSpec::RowMajor> gw2(grad.data() + d * h + h, k, h);
    Eigen::Map<RVector> gb2(grad.data() + d * h + h + h * k, k);
    const double inv_b = 1.0 / static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto f = mlp_forward(net, xs[i]);
        const RVector g = inv_b * (f.p - ys[i]);
        // softmax Jacobian: dz2 = p * (g - <p, g>)
        const RVector dz2 = f.p.cwiseProduct((g.array() - f.p.dot(g)).matrix());
        gw2 += dz2 * f.a1.transpose();
        gb2 += dz2;
        const RVector da = net.w2().transpose() * dz2;
        const RVector dz1 = (f.z1.array() > 0.0).select(da, 0.0);
        gw1 += dz1 * xs[i].transpose();
        gb1 += dz1;
    }
    return grad;
}

/// Hidden width whose parameter count is closest to `n_params`
/// (d h + h + h K + K), at least 1.
[[nodiscard]] inline std::size_t mlp_hidden_for_params(std::size_t n_params, std::size_t d, std::size_t k) {
    const double h = (static_cast<double>(n_params) - static_cast<double>(k)) / static_cast<double>(d + 1 + k);
    return static_cast<std::size_t>(std::max(1.0, std::round(h)));
}

struct MlpTrainConfig {
    std::size_t hidden = 8;
    std::size_t epochs = 50;
    double lr = 0.01;
    std::size_t batch = 4;
    std::uint64_t seed = 0;
};

[[nodiscard]] inline TrainRecord train_mlp(const Split &data, const MlpTrainConfig &cfg) {
    const std::size_t k = data.train.num_classes;
    detail::check_training_data(data, k);
    if (cfg.batch == 0) {
        throw DomainError("batch size must be >= 1");
    }
    std::vector<RVector> x_train;
    std::vector<RVector> x_test;
    for (const auto &e : data.train.examples) {
        x_train.push_back(feature_as_real(e.features));
    }
    for (const auto &e : data.test.examples) {
        x_test.push_back(feature_as_real(e.features));
    }
    const auto y_train = data.train.labels();
    const auto y_test = data.test.labels();
    const auto t_train = detail::targets_for(data.train, k, false);
    const auto t_test = detail::targets_for(data.test, k, false);

    MlpSpec net(static_cast<std::size_t>(x_train.front().size()), cfg.hidden, k);
    std::mt19937_64 rng(cfg.seed);
    net.initialise(rng);

    TrainRecord rec;
    rec.model = "mlp";
    rec.n = data.train.size();
    rec.n_params = net.parameter_count();
    rec.epochs = cfg.epochs;
    rec.seed = cfg.seed;
    rec.lr = cfg.lr;
    rec.batch = cfg.batch;
    rec.train_labels = y_train;

    const auto eval = [&net](const std::vector<RVector> &xs, const std::vector<int> &labels,
                             const std::vector<RVector> &ts, double &loss_out, double &acc_out) {
        std::vector<RVector> preds;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            preds.push_back(mlp_predict(net, xs[i]));
            correct += argmax(preds.back()) == labels[i] ? 1 : 0;
        }
        loss_out = empirical_risk(preds, ts);
        acc_out = static_cast<double>(correct) / static_cast<double>(xs.size());
    };
    const auto record = [&](std::size_t epoch) {
        EpochMetrics m;
        m.epoch = epoch;
        eval(x_train, y_train, t_train, m.train_loss, m.train_acc);
        eval(x_test, y_test, t_test, m.test_loss, m.test_acc);
        rec.history.push_back(std::move(m));
    };

    AdaGradState opt;
    record(0);
    std::vector<std::size_t> order(x_train.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch);
            std::vector<RVector> xb;
            std::vector<RVector> yb;
            for (std::size_t i = start; i < stop; ++i) {
                xb.push_back(x_train[order[i]]);
                yb.push_back(t_train[order[i]]);
            }
            adagrad_step(net.params, mlp_gradient(net, xb, yb), opt, cfg.lr);
        }
        record(epoch);
    }
    rec.params = net.params;
    return rec;
}

} // namespace qcrisk
