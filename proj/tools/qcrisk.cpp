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
// qcrisk command-line tool: config-driven experiments with JSON / CSV output.

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "qcrisk/qcrisk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qcrisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

/// Input problems found after the config parsed (unreadable data or model
/// files). Reported with exit status 1 like config errors.
class InputError : public Error {
  public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Config access with dotted field paths in every error

class Node {
  public:
    Node(const json &j, std::string path) : j_(&j), path_(std::move(path)) {}

    [[nodiscard]] const std::string &path() const { return path_; }
    [[nodiscard]] const json &raw() const { return *j_; }
    [[nodiscard]] std::string child_path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] bool has(const std::string &key) const {
        return j_->is_object() && j_->contains(key) && !j_->at(key).is_null();
    }

    [[nodiscard]] Node at(const std::string &key) const {
        if (!has(key)) {
            throw ConfigError(child_path(key), "missing");
        }
        return {j_->at(key), child_path(key)};
    }

    /// Section that may be absent; an absent one reads as an empty object.
    [[nodiscard]] Node section(const std::string &key) const {
        static const json empty = json::object();
        if (!has(key)) {
            return {empty, child_path(key)};
        }
        const Node n = at(key);
        if (!n.raw().is_object()) {
            throw ConfigError(n.path(), "expected an object");
        }
        return n;
    }

    template <class T> [[nodiscard]] T as() const {
        const json &v = *j_;
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ConfigError(path_, "expected true or false");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError(path_, "expected a string");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_unsigned()) {
                throw ConfigError(path_, "expected a non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ConfigError(path_, "expected a number");
            }
        }
        return v.get<T>();
    }

    template <class T> [[nodiscard]] T get(const std::string &key) const { return at(key).as<T>(); }

    template <class T> [[nodiscard]] T get(const std::string &key, T fallback) const {
        return has(key) ? at(key).as<T>() : fallback;
    }

    template <class T> [[nodiscard]] std::vector<T> list(const std::string &key) const {
        const Node n = at(key);
        if (!n.raw().is_array() || n.raw().empty()) {
            throw ConfigError(n.path(), "expected a non-empty array");
        }
        std::vector<T> out;
        for (std::size_t i = 0; i < n.raw().size(); ++i) {
            out.push_back(Node(n.raw().at(i), n.path() + "[" + std::to_string(i) + "]").as<T>());
        }
        return out;
    }

    /// Rejects keys outside `allowed` so typos do not pass silently.
    void only(std::initializer_list<const char *> allowed) const {
        if (!j_->is_object()) {
            return;
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto &[k, v] : j_->items()) {
            if (!ok.contains(k)) {
                throw ConfigError(child_path(k), "unknown field");
            }
        }
    }

  private:
    const json *j_;
    std::string path_;
};

template <class Fn> auto field_check(const std::string &path, Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError &) {
        throw;
    } catch (const Error &e) {
        throw ConfigError(path, e.what());
    }
}

void require(bool ok, const std::string &path, const std::string &what) {
    if (!ok) {
        throw ConfigError(path, what);
    }
}

// ---------------------------------------------------------------------------
// Shared sections

struct Context {
    fs::path out_dir;
    bool quiet = false;
    std::optional<std::uint64_t> seed_override;

    void log(const std::string &msg) const {
        if (!quiet) {
            std::cerr << "qcrisk: " << msg << '\n';
        }
    }

    [[nodiscard]] std::string resolve(const Node &n) const {
        const fs::path p = n.as<std::string>();
        if (!fs::exists(p)) {
            throw ConfigError(n.path(), "file not found: " + p.string());
        }
        return p.string();
    }
};

struct DataSection {
    Dataset dataset;
    double train_ratio = 0.75;
    std::optional<std::size_t> n_train;
};

DataSection read_dataset(const Node &root, const Context &ctx) {
    const Node d = root.section("dataset");
    d.only({"kind", "bits", "images", "labels", "keep_classes", "per_class", "train_ratio", "n_train"});
    DataSection out;
    const auto kind = d.get<std::string>("kind", "parity");
    if (kind == "parity") {
        const auto bits = d.get<std::size_t>("bits", 6);
        out.dataset = field_check(d.child_path("bits"), [&] { return gen_parity(bits); });
        out.train_ratio = d.get<double>("train_ratio", 0.75);
    } else if (kind == "idx") {
        const auto images = ctx.resolve(d.at("images"));
        const auto labels = ctx.resolve(d.at("labels"));
        const auto keep = d.get<std::size_t>("keep_classes", 9);
        const auto per_class = d.get<std::size_t>("per_class", 20);
        require(keep >= 2, d.child_path("keep_classes"), "need at least two classes");
        require(per_class >= 2, d.child_path("per_class"), "need at least two images per class");
        try {
            out.dataset = preprocess_images(load_idx(images, labels), keep, per_class);
        } catch (const Error &e) {
            throw InputError(d.path() + ": " + e.what());
        }
        out.train_ratio = d.get<double>("train_ratio", 0.5);
    } else {
        throw ConfigError(d.child_path("kind"), "expected 'parity' or 'idx', got '" + kind + "'");
    }
    require(out.train_ratio > 0.0 && out.train_ratio < 1.0, d.child_path("train_ratio"), "must lie in (0, 1)");
    if (d.has("n_train")) {
        out.n_train = d.get<std::size_t>("n_train");
        require(*out.n_train > 0 && *out.n_train % out.dataset.num_classes == 0, d.child_path("n_train"),
                "must be a positive multiple of the class count " + std::to_string(out.dataset.num_classes));
    }
    return out;
}

Split make_split(const DataSection &ds, std::uint64_t seed, const std::string &path) {
    return field_check(path, [&] {
        Split s = split(ds.dataset, ds.train_ratio, seed);
        if (ds.n_train) {
            s.train = balanced_subsample(s.train, *ds.n_train, seed);
        }
        return s;
    });
}

MeasurementSet read_measurement(const Node &m, const Context &ctx) {
    m.only({"kind", "classes", "qubits", "path", "scale"});
    const auto kind = m.get<std::string>("kind", "basis");
    MeasurementSet ms;
    const auto build = [&](auto fn) { return field_check(m.path(), fn); };
    if (kind == "basis") {
        ms = build([&] { return basis_measurements(m.get<std::size_t>("classes", 2), m.get<std::size_t>("qubits", 1)); });
    } else if (kind == "simplex_etf") {
        ms = build([&] { return simplex_etf_operators(m.get<std::size_t>("classes"), m.get<std::size_t>("qubits")); });
    } else if (kind == "pauli") {
        ms = pauli_measurements();
    } else if (kind == "sic_povm") {
        ms = qubit_sic_povm();
    } else if (kind == "file") {
        const auto path = ctx.resolve(m.at("path"));
        try {
            std::ifstream in(path);
            ms = json::parse(in).get<MeasurementSet>();
        } catch (const std::exception &e) {
            throw InputError(m.child_path("path") + ": " + e.what());
        }
    } else {
        throw ConfigError(m.child_path("kind"), "expected basis, simplex_etf, pauli, sic_povm or file");
    }
    if (m.has("scale")) {
        const double s = m.get<double>("scale");
        require(s > 0.0, m.child_path("scale"), "must be positive");
        ms = ms.scaled(s);
    }
    return ms;
}

struct CircuitSection {
    EncoderSpec enc;
    std::size_t layers = 3;
    MeasurementSet ms;
};

CircuitSection read_circuit(const Node &root, const Dataset &ds, const Context &ctx) {
    const Node c = root.section("circuit");
    c.only({"n_qubits", "layers", "encoder", "measurement"});
    CircuitSection out;
    const std::size_t dim = ds.feature_dim();
    const bool amplitude = ds.kind == DataKind::amplitude;
    const std::size_t natural = amplitude ? log2_exact(dim) : dim;
    const auto n = c.get<std::size_t>("n_qubits", natural);
    require(n == natural, c.child_path("n_qubits"),
            "dataset features need " + std::to_string(natural) + " qubits, config says " + std::to_string(n));

    const Node e = c.section("encoder");
    e.only({"kind", "total_gates", "tunable_gates", "max_arity"});
    const auto kind = e.get<std::string>("kind", amplitude ? "amplitude" : "basis");
    require(kind == (amplitude ? "amplitude" : "basis"), e.child_path("kind"),
            std::string("dataset needs the ") + (amplitude ? "amplitude" : "basis") + " encoder");
    if (amplitude) {
        // bookkeeping counts for the bound; default to one gate per amplitude
        out.enc = EncoderSpec::amplitude(n, e.get<std::size_t>("total_gates", dim - 1),
                                         e.get<std::size_t>("tunable_gates", dim - 1), e.get<std::size_t>("max_arity", n));
    } else {
        out.enc = EncoderSpec::basis(n);
    }
    require(out.enc.tunable_gates >= 1 && out.enc.tunable_gates <= out.enc.total_gates && out.enc.max_arity >= 1,
            e.path(), "need 1 <= tunable_gates <= total_gates and max_arity >= 1");

    out.layers = c.get<std::size_t>("layers", 3);
    require(out.layers >= 1, c.child_path("layers"), "must be >= 1");
    out.ms = read_measurement(c.section("measurement"), ctx);
    require(out.ms.d_qubits <= n, c.child_path("measurement"), "acts on more qubits than the circuit has");
    require(out.ms.size() == ds.num_classes, c.child_path("measurement"),
            "has " + std::to_string(out.ms.size()) + " operators for " + std::to_string(ds.num_classes) + " classes");
    return out;
}

struct TrainingSection {
    ClassifierKind model = ClassifierKind::qc;
    std::size_t epochs = 50;
    double lr = 0.5;
    std::size_t batch = 4;
    std::uint64_t seed = 0;
    LossConfig loss;
    MlpTrainConfig mlp;
};

TrainingSection read_training(const Node &root, const Context &ctx) {
    const Node t = root.section("training");
    t.only({"model", "epochs", "learning_rate", "batch_size", "seed", "loss", "mlp"});
    TrainingSection out;
    const auto model = t.get<std::string>("model", "qc");
    if (model == "qc") {
        out.model = ClassifierKind::qc;
    } else if (model == "mlp") {
        out.model = ClassifierKind::mlp;
    } else if (model == "both") {
        out.model = ClassifierKind::both;
    } else {
        throw ConfigError(t.child_path("model"), "expected qc, mlp or both");
    }
    out.epochs = t.get<std::size_t>("epochs", 50);
    out.lr = t.get<double>("learning_rate", 0.5);
    require(out.lr > 0.0, t.child_path("learning_rate"), "must be positive");
    out.batch = t.get<std::size_t>("batch_size", 4);
    require(out.batch >= 1, t.child_path("batch_size"), "must be >= 1");
    out.seed = ctx.seed_override.value_or(t.get<std::uint64_t>("seed", 0));

    const Node l = t.section("loss");
    l.only({"variant", "lambda_rho", "lambda_o", "etf_labels"});
    out.loss.variant = field_check(l.child_path("variant"),
                                   [&] { return loss_variant_from_string(l.get<std::string>("variant", "plain_mse")); });
    out.loss.lambda_rho = l.get<double>("lambda_rho", 0.0);
    out.loss.lambda_o = l.get<double>("lambda_o", 0.0);
    out.loss.etf_label_mode = l.get<bool>("etf_labels", false);
    require(out.loss.lambda_rho >= 0.0 && out.loss.lambda_o >= 0.0, l.path(), "regularisation weights must be >= 0");

    const Node m = t.section("mlp");
    m.only({"hidden", "learning_rate", "batch_size"});
    out.mlp.hidden = m.get<std::size_t>("hidden", 8);
    out.mlp.lr = m.get<double>("learning_rate", 0.01);
    out.mlp.batch = m.get<std::size_t>("batch_size", 4);
    out.mlp.epochs = out.epochs;
    out.mlp.seed = out.seed;
    require(out.mlp.hidden >= 1, m.child_path("hidden"), "must be >= 1");
    require(out.mlp.lr > 0.0, m.child_path("learning_rate"), "must be positive");
    require(out.mlp.batch >= 1, m.child_path("batch_size"), "must be >= 1");
    return out;
}

QcTrainConfig qc_config(const CircuitSection &c, const TrainingSection &t) {
    QcTrainConfig cfg;
    cfg.enc = c.enc;
    cfg.n_layers = c.layers;
    cfg.ms = c.ms;
    cfg.epochs = t.epochs;
    cfg.lr = t.lr;
    cfg.batch = t.batch;
    cfg.seed = t.seed;
    cfg.loss = t.loss;
    return cfg;
}

std::optional<QcModel> read_model_file(const Node &root, const Context &ctx) {
    if (!root.has("model")) {
        return std::nullopt;
    }
    const auto path = ctx.resolve(root.at("model"));
    try {
        std::ifstream in(path);
        return json::parse(in).get<QcModel>();
    } catch (const std::exception &e) {
        throw InputError("model: " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output helpers

std::ofstream open_out(const Context &ctx, const std::string &name) {
    std::ofstream out(ctx.out_dir / name);
    if (!out) {
        throw std::runtime_error("cannot write " + (ctx.out_dir / name).string());
    }
    return out;
}

void write_json(const Context &ctx, const std::string &name, const json &j) {
    auto out = open_out(ctx, name);
    out << j.dump(2) << '\n';
}

json measurement_summary(const MeasurementSet &ms) {
    const auto v = validate_set(ms);
    return {{"name", ms.name},
            {"d_qubits", ms.d_qubits},
            {"operators", ms.size()},
            {"hermitian", v.hermitian},
            {"orthogonal", v.orthogonal},
            {"ortho_constant", v.fitted_b ? json(*v.fitted_b) : json(nullptr)},
            {"norm_bound", v.norm_bound},
            {"span_rank", v.span_rank}};
}

std::vector<CMatrix> features_of(const QcModel &model, const Dataset &ds) {
    std::vector<CMatrix> out;
    for (const auto &e : ds.examples) {
        out.push_back(model.feature(e.features));
    }
    return out;
}

double min_interclass_distance(const std::vector<CMatrix> &feats, const std::vector<int> &labels) {
    double best = INFINITY;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        for (std::size_t j = i + 1; j < feats.size(); ++j) {
            if (labels[i] != labels[j]) {
                best = std::min(best, frobenius_distance(feats[i], feats[j]));
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Commands. Each returns a runner: validation happens before the lambda is
// built, the lambda does the work.

using Runner = std::function<void()>;

Runner cmd_train(const Node &root, const Context &ctx) {
    root.only({"dataset", "circuit", "training", "output_dir"});
    const auto data = read_dataset(root, ctx);
    const auto training = read_training(root, ctx);
    const Split sp = make_split(data, training.seed, "dataset");
    const bool qc = training.model != ClassifierKind::mlp;
    const bool mlp = training.model != ClassifierKind::qc;
    std::optional<QcTrainConfig> qcfg;
    if (qc) {
        const auto circuit = read_circuit(root, data.dataset, ctx);
        qcfg = qc_config(circuit, training);
        field_check("training.loss", [&] { qcfg->loss.validate(circuit.ms.size(), sp.train.size() / circuit.ms.size()); });
    }
    return [=, &ctx] {
        auto jsonl = open_out(ctx, "train_record.jsonl");
        auto csv = open_out(ctx, "summary.csv");
        csv << "model," << summary_csv_header() << '\n';
        if (qc) {
            ctx.log("training quantum classifier, " + std::to_string(qcfg->epochs) + " epochs");
            const auto rec = train_qc(sp, *qcfg);
            write_jsonl(rec, jsonl);
            csv << "qc,";
            write_summary_row(rec, csv);
            const QcModel model{qcfg->enc, qcfg->n_layers, qcfg->ms, rec.params};
            write_json(ctx, "model.json", model);
            const auto feats = features_of(model, sp.train);
            json g{{"model", "qc"},
                   {"split", "train"},
                   {"n", sp.train.size()},
                   {"epoch", rec.epochs},
                   {"report", geometry_report(feats, sp.train.labels(), qcfg->ms.operators)}};
            write_json(ctx, "geometry.json", g);
            const auto &f = rec.final_metrics();
            ctx.log("qc final train loss " + std::to_string(f.train_loss) + ", train acc " + std::to_string(f.train_acc) +
                    ", test acc " + std::to_string(f.test_acc));
        }
        if (mlp) {
            ctx.log("training MLP baseline, hidden width " + std::to_string(training.mlp.hidden));
            const auto rec = train_mlp(sp, training.mlp);
            write_jsonl(rec, jsonl);
            csv << "mlp,";
            write_summary_row(rec, csv);
            const auto &f = rec.final_metrics();
            ctx.log("mlp final train loss " + std::to_string(f.train_loss) + ", test acc " + std::to_string(f.test_acc));
        }
    };
}

Runner cmd_riskcurve(const Node &root, const Context &ctx) {
    root.only({"dataset", "circuit", "training", "sweep", "output_dir"});
    const auto data = read_dataset(root, ctx);
    const auto training = read_training(root, ctx);
    const Node s = root.section("sweep");
    s.only({"tuples", "grid", "seeds", "aggregation", "tail", "degree", "threads"});

    SweepPlan plan;
    plan.dataset = data.dataset;
    plan.train_ratio = data.train_ratio;
    plan.kind = training.model;
    if (plan.runs_qc()) {
        const auto circuit = read_circuit(root, data.dataset, ctx);
        plan.qc = qc_config(circuit, training);
    }
    plan.mlp = training.mlp;

    if (s.has("tuples")) {
        const Node t = s.at("tuples");
        require(t.raw().is_array() && !t.raw().empty(), t.path(), "expected a non-empty array");
        for (std::size_t i = 0; i < t.raw().size(); ++i) {
            const Node e(t.raw().at(i), t.path() + "[" + std::to_string(i) + "]");
            e.only({"n", "N_t", "T"});
            plan.tuples.push_back({e.get<std::size_t>("n"), e.get<std::size_t>("N_t"), e.get<std::size_t>("T")});
        }
    } else {
        // grid over ansatz depth: N_t = 3 N L
        const Node g = s.at("grid");
        g.only({"n", "layers", "T"});
        require(plan.runs_qc(), g.path(), "a layer grid needs the quantum classifier; list tuples for an MLP-only sweep");
        const auto n = g.get<std::size_t>("n");
        const auto epochs = g.get<std::size_t>("T");
        for (auto layers : g.list<std::size_t>("layers")) {
            require(layers >= 1, g.child_path("layers"), "entries must be >= 1");
            plan.tuples.push_back({n, AnsatzSpec::parameter_count(plan.qc.enc.n_qubits, layers), epochs});
        }
    }
    auto seeds = s.has("seeds") ? s.list<std::uint64_t>("seeds") : std::vector<std::uint64_t>{0, 1, 2};
    if (ctx.seed_override) {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            seeds[i] = *ctx.seed_override + i;
        }
    }
    plan.seeds = seeds;
    plan.threads = s.get<std::size_t>("threads", 1);
    require(plan.threads >= 1, s.child_path("threads"), "must be >= 1");
    const auto how_name = s.get<std::string>("aggregation", "final");
    require(how_name == "final" || how_name == "tail", s.child_path("aggregation"), "expected 'final' or 'tail'");
    const auto how = how_name == "final" ? LossAggregation::final_epoch : LossAggregation::tail_average;
    const auto tail = s.get<std::size_t>("tail", 5);
    require(tail >= 1, s.child_path("tail"), "must be >= 1");
    std::optional<std::size_t> degree = 3;
    if (s.has("degree")) {
        const Node d = s.at("degree");
        if (d.raw().is_string()) {
            require(d.as<std::string>() == "auto", d.path(), "expected an integer or 'auto'");
            degree.reset();
        } else {
            degree = d.as<std::size_t>();
        }
    }
    field_check("sweep", [&] { plan.validate(); });
    for (std::size_t i = 0; i < plan.tuples.size(); ++i) {
        for (auto seed : plan.seeds) {
            const Split sp = make_split(data, seed, "dataset");
            require(sp.train.size() >= plan.tuples[i].n, "sweep.tuples[" + std::to_string(i) + "].n",
                    "exceeds the " + std::to_string(sp.train.size()) + " training examples of the split");
        }
        if (plan.runs_qc()) {
            const std::size_t k = plan.qc.ms.size();
            field_check("training.loss", [&] { plan.qc.loss.validate(k, plan.tuples[i].n / k); });
        }
    }

    return [=, &ctx] {
        ctx.log("running " + std::to_string(plan.tuples.size() * plan.seeds.size() * (plan.kind == ClassifierKind::both ? 2 : 1)) +
                " training runs");
        const auto runs = run_sweep(plan);
        auto csv = open_out(ctx, "sweep_runs.csv");
        csv << "model,N_t,n,T,seed,final_test_loss,tail_test_loss,final_test_acc\n";
        csv.precision(17);
        for (const auto &r : runs) {
            const auto &t = plan.tuples[r.tuple];
            csv << r.kind << ',' << t.n_params << ',' << t.n << ',' << t.epochs << ',' << r.seed << ','
                << r.record.final_metrics().test_loss << ',' << r.record.tail_test_loss(tail) << ','
                << r.record.final_metrics().test_acc << '\n';
        }
        for (const std::string kind : {"qc", "mlp"}) {
            if ((kind == "qc" && !plan.runs_qc()) || (kind == "mlp" && !plan.runs_mlp())) {
                continue;
            }
            const auto pts = aggregate(runs, plan, kind, how, tail);
            std::set<double> xs;
            for (const auto &p : pts) {
                xs.insert(p.x);
            }
            RiskCurveFit fit = degree ? polyfit(pts, std::min(*degree, xs.size() - 1)) : select_degree(pts);
            fit.basin = find_basin(fit);
            json j = fit;
            j["model"] = kind;
            j["aggregation"] = how_name;
            j["tail"] = tail;
            j["seeds"] = plan.seeds;
            write_json(ctx, "riskcurve_" + kind + ".json", j);
            auto out = open_out(ctx, "riskcurve_" + kind + ".csv");
            write_riskcurve_csv(fit, out);
            ctx.log(kind + ": degree " + std::to_string(fit.degree) + " fit, basin at N_t = " +
                    std::to_string(fit.basin->x) + (fit.basin->interior ? " (interior)" : " (boundary)"));
        }
    };
}

Runner cmd_diagnose(const Node &root, const Context &ctx) {
    root.only({"dataset", "circuit", "training", "model", "diagnose", "output_dir"});
    const auto data = read_dataset(root, ctx);
    const auto training = read_training(root, ctx);
    const Split sp = make_split(data, training.seed, "dataset");
    auto model = read_model_file(root, ctx);
    const bool from_file = model.has_value();
    if (!model) {
        const auto circuit = read_circuit(root, data.dataset, ctx);
        std::mt19937_64 rng(training.seed);
        model = QcModel{circuit.enc, circuit.layers, circuit.ms,
                        initial_angles(AnsatzSpec::parameter_count(circuit.enc.n_qubits, circuit.layers), rng)};
    }
    require(model->ms.size() == data.dataset.num_classes, "model", "operator count does not match the class count");
    const std::size_t dim = data.dataset.feature_dim();
    const bool amplitude = data.dataset.kind == DataKind::amplitude;
    require(model->enc.n_qubits == (amplitude ? log2_exact(dim) : dim) &&
                (model->enc.kind == EncoderKind::amplitude) == amplitude,
            "model", "encoder does not fit the dataset features");
    const Node d = root.section("diagnose");
    d.only({"epsilon"});
    std::optional<double> eps;
    if (d.has("epsilon")) {
        eps = d.get<double>("epsilon");
        require(*eps > 0.0, d.child_path("epsilon"), "must be positive");
    }

    return [=, &ctx] {
        const auto feats = features_of(*model, sp.train);
        const auto labels = sp.train.labels();
        std::size_t correct = 0;
        for (std::size_t i = 0; i < feats.size(); ++i) {
            correct += argmax(predict_from_feature(feats[i], model->ms.operators)) == labels[i] ? 1 : 0;
        }
        const double sep = min_interclass_distance(feats, labels);
        const double e = eps.value_or(0.5 * sep);
        const auto cells = estimate_t_d(feats, labels, e);
        json j{{"model_source", from_file ? "file" : "random"},
               {"seed", training.seed},
               {"n_layers", model->n_layers},
               {"split", "train"},
               {"n", sp.train.size()},
               {"train_accuracy", static_cast<double>(correct) / static_cast<double>(feats.size())},
               {"measurement", measurement_summary(model->ms)},
               {"min_interclass_distance", sep},
               {"partition", {{"epsilon", e}, {"occupied_cells", cells.occupied}}},
               {"report", geometry_report(feats, labels, model->ms.operators)}};
        write_json(ctx, "geometry.json", j);
        ctx.log("occupied cells " + std::to_string(cells.occupied) + " at epsilon " + std::to_string(e));
    };
}

CMatrix pauli_string(const Node &n) {
    const auto s = n.as<std::string>();
    require(!s.empty() && s.size() <= 4, n.path(), "expected 1 to 4 Pauli letters");
    CMatrix out = CMatrix::Identity(1, 1);
    for (char c : s) {
        CMatrix p;
        switch (c) {
        case 'I':
            p = pauli::identity();
            break;
        case 'X':
            p = pauli::x();
            break;
        case 'Y':
            p = pauli::y();
            break;
        case 'Z':
            p = pauli::z();
            break;
        default:
            throw ConfigError(n.path(), std::string("unknown Pauli letter '") + c + "'");
        }
        out = kron(out, p);
    }
    return out;
}

Runner cmd_concentrate(const Node &root, const Context &ctx) {
    root.only({"concentration", "output_dir"});
    const Node c = root.section("concentration");
    c.only({"n_qubits", "depth", "trials", "delta", "seed", "observable", "pair_mode", "quantities"});
    const auto ns = c.has("n_qubits") ? c.list<std::size_t>("n_qubits") : std::vector<std::size_t>{4, 6};
    const std::optional<std::size_t> depth = c.has("depth") ? std::optional(c.get<std::size_t>("depth")) : std::nullopt;
    const auto trials = c.get<std::size_t>("trials", 2000);
    const auto delta = c.get<double>("delta", 0.05);
    const auto seed = ctx.seed_override.value_or(c.get<std::uint64_t>("seed", 0));
    const CMatrix obs = c.has("observable") ? pauli_string(c.at("observable")) : pauli::z();
    const std::size_t d = log2_exact(static_cast<std::size_t>(obs.rows()));
    const auto mode_name = c.get<std::string>("pair_mode", "both_random");
    require(mode_name == "both_random" || mode_name == "fixed_first", c.child_path("pair_mode"),
            "expected both_random or fixed_first");
    const auto mode = mode_name == "both_random" ? PairMode::both_random : PairMode::fixed_first;
    const auto quantities =
        c.has("quantities") ? c.list<std::string>("quantities") : std::vector<std::string>{"encoder_overlap", "ansatz_output"};
    for (std::size_t i = 0; i < quantities.size(); ++i) {
        require(quantities[i] == "encoder_overlap" || quantities[i] == "ansatz_output",
                c.child_path("quantities") + "[" + std::to_string(i) + "]", "expected encoder_overlap or ansatz_output");
    }
    for (auto n : ns) {
        require(n >= 1 && n <= 14, c.child_path("n_qubits"), "entries must lie in [1, 14]");
        require(d <= n, c.child_path("observable"), "acts on more qubits than N = " + std::to_string(n));
        const std::size_t dep = depth.value_or(2 * n);
        field_check(c.path(), [&] { detail::check_concentration_args(n, dep, trials, delta); });
    }

    return [=, &ctx] {
        auto csv = open_out(ctx, "concentration.csv");
        csv << concentration_csv_header() << '\n';
        json rows = json::array();
        for (auto n : ns) {
            const std::size_t dep = depth.value_or(2 * n);
            for (const auto &q : quantities) {
                const auto r = q == "encoder_overlap"
                                   ? verify_encoder_concentration(n, dep, trials, delta, mix_seed(seed, n), mode)
                                   : verify_ansatz_concentration(n, d, dep, trials, delta, obs, mix_seed(seed, 100 + n));
                write_concentration_row(r, csv);
                rows.push_back({{"quantity", q},
                                {"N", n},
                                {"D", r.d_qubits},
                                {"depth", dep},
                                {"trials", trials},
                                {"delta", delta},
                                {"expected", r.expected},
                                {"mean", r.mean},
                                {"variance", r.variance},
                                {"standard_error", r.standard_error()},
                                {"bound", r.bound},
                                {"violation_rate", r.violation_rate}});
                ctx.log(q + " N=" + std::to_string(n) + ": violation rate " + std::to_string(r.violation_rate));
            }
        }
        write_json(ctx, "concentration.json", {{"seed", seed}, {"pair_mode", mode_name}, {"trials", rows}});
    };
}

Runner cmd_bound(const Node &root, const Context &ctx) {
    root.only({"dataset", "circuit", "training", "model", "bound", "output_dir"});
    const auto data = read_dataset(root, ctx);
    const auto training = read_training(root, ctx);
    const Split sp = make_split(data, training.seed, "dataset");
    const auto model = read_model_file(root, ctx);
    const auto circuit = read_circuit(root, data.dataset, ctx);
    const EncoderSpec enc = model ? model->enc : circuit.enc;
    const MeasurementSet ms = model ? model->ms : circuit.ms;
    require(ms.size() == data.dataset.num_classes, "model", "operator count does not match the class count");

    const Node b = root.section("bound");
    b.only({"epsilon", "delta", "L1", "C2", "xi", "T_D", "diamond_norm"});
    BoundInputs in;
    in.n = sp.train.size();
    in.k = data.dataset.num_classes;
    in.n_ge = enc.tunable_gates;
    in.n_g = enc.total_gates;
    in.m = enc.max_arity;
    in.eps = b.get<double>("epsilon", 0.01);
    in.delta = b.get<double>("delta", 0.05);
    in.c2 = b.get<double>("C2", ms.norm_bound);
    in.diamond_norm = b.get<double>("diamond_norm", 1.0);
    // without a model: L1 and xi for predictions in the probability simplex
    // against one-hot labels, and the worst case T_D = n
    in.l1 = b.get<double>("L1", std::sqrt(2.0));
    in.xi = b.get<double>("xi", 1.0);
    in.t_d = b.get<std::size_t>("T_D", in.n);
    const bool user_l1 = b.has("L1");
    const bool user_xi = b.has("xi");
    const bool user_td = b.has("T_D");
    field_check("bound", [&] { in.validate(); });

    return [=, &ctx] {
        BoundInputs actual = in;
        json sources{{"L1", user_l1 ? "config" : "default"}, {"xi", user_xi ? "config" : "default"},
                     {"T_D", user_td ? "config" : "default"}};
        if (model) {
            const auto feats = features_of(*model, sp.train);
            std::vector<RVector> preds;
            std::vector<RVector> targets;
            for (std::size_t i = 0; i < feats.size(); ++i) {
                preds.push_back(predict_from_feature(feats[i], ms.operators));
                targets.push_back(label_target(sp.train.examples[i].label, in.k, training.loss.etf_label_mode));
            }
            const auto lc = lipschitz_and_xi(preds, targets);
            if (!user_l1) {
                actual.l1 = lc.l1;
                sources["L1"] = "model";
            }
            if (!user_xi) {
                actual.xi = lc.xi;
                sources["xi"] = "model";
            }
            if (!user_td) {
                actual.t_d = estimate_t_d(feats, sp.train.labels(), in.eps).occupied;
                sources["T_D"] = "model";
            }
        }
        const auto terms = lemma3_terms(actual);
        auto csv = open_out(ctx, "bound.csv");
        csv << bound_csv_header() << '\n';
        write_bound_row(actual, terms, csv);
        write_json(ctx, "bound.json",
                   {{"inputs",
                     {{"n", actual.n},
                      {"K", actual.k},
                      {"N_ge", actual.n_ge},
                      {"N_g", actual.n_g},
                      {"m", actual.m},
                      {"epsilon", actual.eps},
                      {"delta", actual.delta},
                      {"L1", actual.l1},
                      {"C2", actual.c2},
                      {"xi", actual.xi},
                      {"T_D", actual.t_d},
                      {"diamond_norm", actual.diamond_norm}}},
                    {"sources", sources},
                    {"covering_number_log", covering_number_log(actual.n_ge, actual.m, actual.eps)},
                    {"terms",
                     {{"robustness", terms.robustness},
                      {"sqrt_term", terms.sqrt_term},
                      {"linear_term", terms.linear_term},
                      {"total", terms.total}}}});
        ctx.log("bound total " + std::to_string(terms.total) + " with T_D = " + std::to_string(actual.t_d));
    };
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"qcrisk: quantum classifier risk experiments"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto *seed_opt = app.add_option("--seed", seed, "overrides the seed in the config");
    app.add_option("--out", out_dir, "output directory (overrides output_dir in the config)");
    app.add_flag("--quiet", quiet, "no progress messages");
    app.fallthrough();

    const std::map<std::string, std::function<Runner(const Node &, const Context &)>> commands{
        {"train", cmd_train},       {"riskcurve", cmd_riskcurve}, {"diagnose", cmd_diagnose},
        {"concentrate", cmd_concentrate}, {"bound", cmd_bound}};
    const std::map<std::string, std::string> help{
        {"train", "train a quantum classifier and/or the MLP baseline"},
        {"riskcurve", "sweep parameter counts and fit the risk curve"},
        {"diagnose", "feature-state geometry of a saved or random model"},
        {"concentrate", "concentration of deep random circuits"},
        {"bound", "evaluate the generalization bound"}};
    for (const auto &[name, fn] : commands) {
        app.add_subcommand(name, help.at(name));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    Context ctx;
    ctx.quiet = quiet;
    if (*seed_opt) {
        ctx.seed_override = seed;
    }

    Runner run;
    try {
        json cfg;
        try {
            std::ifstream in(config_path);
            cfg = json::parse(in);
        } catch (const json::parse_error &e) {
            throw ConfigError("<config>", std::string("not valid JSON: ") + e.what());
        }
        if (!cfg.is_object()) {
            throw ConfigError("<config>", "top level must be an object");
        }
        const Node root(cfg, "");
        if (!out_dir.empty()) {
            ctx.out_dir = out_dir;
        } else {
            const auto d = root.get<std::string>("output_dir", "qcrisk_out");
            ctx.out_dir = d;
        }
        run = commands.at(command)(root, ctx);
    } catch (const ConfigError &e) {
        std::cerr << "qcrisk: config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InputError &e) {
        std::cerr << "qcrisk: input error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        std::cerr << "qcrisk: validation failed: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        fs::create_directories(ctx.out_dir);
        run();
    } catch (const std::exception &e) {
        std::cerr << "qcrisk: " << command << " failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    ctx.log("wrote results to " + ctx.out_dir.string());
    return kExitOk;
}
