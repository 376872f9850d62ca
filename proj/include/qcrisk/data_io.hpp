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
 * @file data_io.hpp
 * Datasets: the parity set, stratified splits, class-balanced subsampling,
 * IDX image files and the flatten / pad / normalise pipeline that turns
 * 28x28 images into 10-qubit amplitude vectors.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "quantum_core.hpp"

namespace qcrisk {

enum class DataKind { bitstring, amplitude };

struct Example {
    EncoderInput features;
    int label = 0;
};

/// Labelled examples whose labels cover 0..K-1.
struct Dataset {
    std::vector<Example> examples;
    std::size_t num_classes = 0;
    DataKind kind = DataKind::bitstring;

    [[nodiscard]] std::size_t size() const noexcept { return examples.size(); }
    [[nodiscard]] bool empty() const noexcept { return examples.empty(); }

    [[nodiscard]] std::vector<int> labels() const {
        std::vector<int> out;
        out.reserve(examples.size());
        for (const auto &e : examples) {
            out.push_back(e.label);
        }
        return out;
    }

    [[nodiscard]] std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> c(num_classes, 0);
        for (const auto &e : examples) {
            ++c.at(static_cast<std::size_t>(e.label));
        }
        return c;
    }

    /// Feature dimension: bit length or vector length.
    [[nodiscard]] std::size_t feature_dim() const {
        if (examples.empty()) {
            return 0;
        }
        return std::visit([](const auto &f) { return static_cast<std::size_t>(f.size()); }, examples.front().features);
    }

    /// Throws DomainError if labels are out of range or amplitude features are
    /// not unit vectors of power-of-two length.
    void check() const {
        for (const auto &e : examples) {
            if (e.label < 0 || static_cast<std::size_t>(e.label) >= num_classes) {
                throw DomainError("label " + std::to_string(e.label) + " outside [0, " + std::to_string(num_classes) + ")");
            }
            if (const auto *v = std::get_if<RVector>(&e.features)) {
                if (!is_power_of_two(static_cast<std::size_t>(v->size())) || std::abs(v->norm() - 1.0) > 1e-9) {
                    throw DomainError("amplitude feature is not a unit vector of power-of-two length");
                }
            }
        }
    }
};

struct Split {
    Dataset train;
    Dataset test;
};

/// Real-valued view of a feature, used by the classical baseline.
[[nodiscard]] inline RVector feature_as_real(const EncoderInput &x) {
    if (const auto *bits = std::get_if<Bits>(&x)) {
        RVector v(static_cast<Eigen::Index>(bits->size()));
        for (std::size_t i = 0; i < bits->size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = (*bits)[i];
        }
        return v;
    }
    return std::get<RVector>(x);
}

/// All 2^d bitstrings; label 1 when the number of zeros is even, else 0.
[[nodiscard]] inline Dataset gen_parity(std::size_t d) {
    if (d < 1 || d > 24) {
        throw DomainError("parity bit length must lie in [1, 24]");
    }
    Dataset ds;
    ds.num_classes = 2;
    ds.kind = DataKind::bitstring;
    for (std::size_t v = 0; v < pow2(d); ++v) {
        Bits bits(d);
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < d; ++i) {
            bits[i] = static_cast<std::uint8_t>((v >> (d - 1 - i)) & 1U);
            zeros += bits[i] == 0 ? 1 : 0;
        }
        ds.examples.push_back({std::move(bits), zeros % 2 == 0 ? 1 : 0});
    }
    return ds;
}

namespace detail {

[[nodiscard]] inline std::vector<std::vector<std::size_t>> indices_by_class(const Dataset &ds) {
    std::vector<std::vector<std::size_t>> by(ds.num_classes);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        by.at(static_cast<std::size_t>(ds.examples[i].label)).push_back(i);
    }
    return by;
}

[[nodiscard]] inline Dataset subset(const Dataset &ds, const std::vector<std::size_t> &idx) {
    Dataset out;
    out.num_classes = ds.num_classes;
    out.kind = ds.kind;
    out.examples.reserve(idx.size());
    for (auto i : idx) {
        out.examples.push_back(ds.examples[i]);
    }
    return out;
}

} // namespace detail

/// Stratified shuffle split. Every class contributes floor(ratio * c_min)
/// training examples, c_min being the smallest class size, so train class
/// counts are exactly equal; the rest goes to the test set.
[[nodiscard]] inline Split split(const Dataset &ds, double train_ratio, std::uint64_t seed) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
        throw DomainError("train ratio must lie in (0, 1)");
    }
    if (ds.num_classes == 0 || ds.empty()) {
        throw DomainError("cannot split an empty dataset");
    }
    auto by = detail::indices_by_class(ds);
    std::size_t c_min = by.front().size();
    for (const auto &c : by) {
        c_min = std::min(c_min, c.size());
    }
    const auto per_class = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(c_min) + 1e-9));
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t k = 0; k < by.size(); ++k) {
        if (per_class == 0) {
            throw DomainError("class " + std::to_string(k) + " has " + std::to_string(by[k].size()) +
                              " examples, too few for a split at ratio " + std::to_string(train_ratio));
        }
        std::shuffle(by[k].begin(), by[k].end(), rng);
        train_idx.insert(train_idx.end(), by[k].begin(), by[k].begin() + static_cast<std::ptrdiff_t>(per_class));
        test_idx.insert(test_idx.end(), by[k].begin() + static_cast<std::ptrdiff_t>(per_class), by[k].end());
    }
    return {detail::subset(ds, train_idx), detail::subset(ds, test_idx)};
}

/// Class-balanced subsample of n examples (n / K per class).
[[nodiscard]] inline Dataset balanced_subsample(const Dataset &ds, std::size_t n, std::uint64_t seed) {
    if (ds.num_classes == 0 || n % ds.num_classes != 0) {
        throw DomainError("subsample size " + std::to_string(n) + " is not a multiple of the class count");
    }
    const std::size_t per_class = n / ds.num_classes;
    auto by = detail::indices_by_class(ds);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < by.size(); ++k) {
        if (by[k].size() < per_class) {
            throw DomainError("class " + std::to_string(k) + " has fewer than " + std::to_string(per_class) +
                              " examples");
        }
        std::shuffle(by[k].begin(), by[k].end(), rng);
        idx.insert(idx.end(), by[k].begin(), by[k].begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    return detail::subset(ds, idx);
}

// ---------------------------------------------------------------------------
// IDX files

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct RawImages {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<std::uint8_t>> images; // row-major pixels
    std::vector<std::uint8_t> labels;
};

namespace detail {

[[nodiscard]] inline std::vector<std::uint8_t> read_all(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IdxError("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[nodiscard]] inline std::uint32_t read_be32(const std::vector<std::uint8_t> &buf, std::size_t off, const std::string &path) {
    if (off + 4 > buf.size()) {
        throw IdxTruncatedError(path + ": truncated header");
    }
    return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) | (std::uint32_t{buf[off + 2]} << 8) |
           std::uint32_t{buf[off + 3]};
}

inline void write_be32(std::ostream &out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    out.write(b, 4);
}

} // namespace detail

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
[[nodiscard]] inline RawImages load_idx(const std::string &images_path, const std::string &labels_path) {
    const auto img = detail::read_all(images_path);
    const auto lbl = detail::read_all(labels_path);

    if (detail::read_be32(img, 0, images_path) != kIdxImageMagic) {
        throw IdxBadMagicError(images_path + ": not an IDX image file");
    }
    if (detail::read_be32(lbl, 0, labels_path) != kIdxLabelMagic) {
        throw IdxBadMagicError(labels_path + ": not an IDX label file");
    }
    const std::size_t n_img = detail::read_be32(img, 4, images_path);
    RawImages raw;
    raw.rows = detail::read_be32(img, 8, images_path);
    raw.cols = detail::read_be32(img, 12, images_path);
    const std::size_t n_lbl = detail::read_be32(lbl, 4, labels_path);
    if (n_img != n_lbl) {
        throw IdxCountMismatchError("image count " + std::to_string(n_img) + " != label count " + std::to_string(n_lbl));
    }
    const std::size_t pixels = raw.rows * raw.cols;
    if (img.size() < 16 + n_img * pixels) {
        throw IdxTruncatedError(images_path + ": truncated pixel data");
    }
    if (lbl.size() < 8 + n_lbl) {
        throw IdxTruncatedError(labels_path + ": truncated label data");
    }
    raw.images.reserve(n_img);
    for (std::size_t i = 0; i < n_img; ++i) {
        const auto first = img.begin() + static_cast<std::ptrdiff_t>(16 + i * pixels);
        raw.images.emplace_back(first, first + static_cast<std::ptrdiff_t>(pixels));
    }
    raw.labels.assign(lbl.begin() + 8, lbl.begin() + 8 + static_cast<std::ptrdiff_t>(n_lbl));
    return raw;
}

/// Writes `raw` as an IDX image / label pair.
inline void write_idx(const RawImages &raw, const std::string &images_path, const std::string &labels_path) {
    if (raw.images.size() != raw.labels.size()) {
        throw DimensionError("image and label counts differ");
    }
    std::ofstream img(images_path, std::ios::binary);
    std::ofstream lbl(labels_path, std::ios::binary);
    if (!img || !lbl) {
        throw IdxError("cannot write IDX files");
    }
    detail::write_be32(img, kIdxImageMagic);
    detail::write_be32(img, static_cast<std::uint32_t>(raw.images.size()));
    detail::write_be32(img, static_cast<std::uint32_t>(raw.rows));
    detail::write_be32(img, static_cast<std::uint32_t>(raw.cols));
    for (const auto &im : raw.images) {
        if (im.size() != raw.rows * raw.cols) {
            throw DimensionError("image has wrong pixel count");
        }
        img.write(reinterpret_cast<const char *>(im.data()), static_cast<std::streamsize>(im.size()));
    }
    detail::write_be32(lbl, kIdxLabelMagic);
    detail::write_be32(lbl, static_cast<std::uint32_t>(raw.labels.size()));
    lbl.write(reinterpret_cast<const char *>(raw.labels.data()), static_cast<std::streamsize>(raw.labels.size()));
}

/// First `per_class` images of each class 0..keep_classes-1 in file order,
/// scaled to [0, 1], flattened, zero-padded to the next power of two
/// (784 -> 1024) and normalised to unit Euclidean norm.
[[nodiscard]] inline Dataset preprocess_images(const RawImages &raw, std::size_t keep_classes = 9,
                                               std::size_t per_class = 20) {
    const std::size_t pixels = raw.rows * raw.cols;
    std::size_t padded = 1;
    while (padded < pixels) {
        padded <<= 1;
    }
    std::vector<std::vector<std::size_t>> chosen(keep_classes);
    for (std::size_t i = 0; i < raw.images.size(); ++i) {
        const std::size_t c = raw.labels[i];
        if (c < keep_classes && chosen[c].size() < per_class) {
            chosen[c].push_back(i);
        }
    }
    Dataset ds;
    ds.num_classes = keep_classes;
    ds.kind = DataKind::amplitude;
    for (std::size_t c = 0; c < keep_classes; ++c) {
        if (chosen[c].size() < per_class) {
            throw DomainError("class " + std::to_string(c) + " has only " + std::to_string(chosen[c].size()) +
                              " images, need " + std::to_string(per_class));
        }
        for (auto i : chosen[c]) {
            RVector v = RVector::Zero(static_cast<Eigen::Index>(padded));
            for (std::size_t p = 0; p < pixels; ++p) {
                v(static_cast<Eigen::Index>(p)) = raw.images[i][p] / 255.0;
            }
            const double norm = v.norm();
            if (norm == 0.0) {
                throw ZeroNormError("image " + std::to_string(i) + " is all zeros and cannot be normalised");
            }
            ds.examples.push_back({RVector(v / norm), static_cast<int>(c)});
        }
    }
    return ds;
}

/// One row per example: features flattened, label in the last column.
inline void export_csv(const Dataset &ds, std::ostream &out) {
    const std::size_t d = ds.feature_dim();
    for (std::size_t i = 0; i < d; ++i) {
        out << 'x' << i << ',';
    }
    out << "label\n";
    out.precision(17);
    for (const auto &e : ds.examples) {
        const RVector v = feature_as_real(e.features);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out << v(i) << ',';
        }
        out << e.label << '\n';
    }
}

} // namespace qcrisk
