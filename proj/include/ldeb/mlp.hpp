// Copyright 2026 The LDEB Authors.
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

// Feed-forward network: sparse count input, relu hidden layers, a 2-unit
// output layer, mean squared error against one-hot targets, and plain
// mini-batch SGD.
//
// The first layer never materializes dense input: its forward pass sums the
// weight columns of the tokens present, and its SGD update touches only those
// columns. Deeper layers use dense Eigen products over the batch.
//
// Loss of a batch of B rows is sum_b sum_o (y_bo - t_bo)^2 / (2B), i.e. the
// mean over both batch rows and output units.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ldeb/dataset.hpp"
#include "ldeb/error.hpp"
#include "ldeb/featurize.hpp"
#include "ldeb/rng.hpp"

namespace ldeb {

enum class OutputActivation { Identity, Sigmoid, Softmax };

inline std::string_view to_string(OutputActivation a) {
  switch (a) {
    case OutputActivation::Identity: return "identity";
    case OutputActivation::Sigmoid: return "sigmoid";
    case OutputActivation::Softmax: return "softmax";
  }
  return "identity";
}

inline OutputActivation output_activation_from_string(std::string_view s) {
  if (s == "identity" || s == "linear") return OutputActivation::Identity;
  if (s == "sigmoid") return OutputActivation::Sigmoid;
  if (s == "softmax") return OutputActivation::Softmax;
  throw Error(ErrorKind::Config, "unknown output activation '" + std::string(s) + "'");
}

inline constexpr std::size_t kMlpOutputs = 2;

struct MlpConfig {
  std::vector<std::size_t> hidden{891, 828, 734};
  OutputActivation output = OutputActivation::Identity;
  double init_range = 0.05;  // weights ~ U[-init_range, init_range], biases 0
  double learning_rate = 0.01;
  std::size_t batch_size = 20;
  std::size_t epochs = 80;
  std::uint64_t seed = 0;
};

inline void validate(const MlpConfig& c) {
  for (auto w : c.hidden) {
    if (w < 1) throw Error(ErrorKind::Config, "hidden layer widths must be >= 1");
  }
  if (c.batch_size < 1) throw Error(ErrorKind::Config, "batch size must be >= 1");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw Error(ErrorKind::Config, "learning rate must be finite and non-negative");
  }
  if (!(c.init_range >= 0.0) || !std::isfinite(c.init_range)) {
    throw Error(ErrorKind::Config, "init range must be finite and non-negative");
  }
}

struct MlpModel {
  MlpConfig config;
  std::size_t input_dim = 0;
  std::vector<Eigen::MatrixXd> weights;  // layer k: (width_k x width_{k-1})
  std::vector<Eigen::VectorXd> biases;

  std::size_t num_layers() const noexcept { return weights.size(); }
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double loss = 0.0;
};

inline MlpModel init_mlp(const MlpConfig& config, std::size_t input_dim) {
  validate(config);
  if (input_dim < 1) throw Error(ErrorKind::ShapeMismatch, "input dimension must be >= 1");
  MlpModel m;
  m.config = config;
  m.input_dim = input_dim;
  Rng rng(config.seed, 0);
  std::size_t fan_in = input_dim;
  auto widths = config.hidden;
  widths.push_back(kMlpOutputs);
  for (auto width : widths) {
    Eigen::MatrixXd w(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-config.init_range, config.init_range);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width)));
    fan_in = width;
  }
  return m;
}

namespace detail {

struct ForwardPass {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer, (width x B)
  std::vector<Eigen::MatrixXd> post;  // activations per layer; post.back() is the output
};

inline void check_row(const MlpModel& m, const FeatureVector& row) {
  if (row.dimension != m.input_dim) {
    throw Error(ErrorKind::ShapeMismatch, "row dimension " + std::to_string(row.dimension) +
                                              " does not match network input " + std::to_string(m.input_dim));
  }
}

inline Eigen::MatrixXd apply_output(OutputActivation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case OutputActivation::Identity:
      return z;
    case OutputActivation::Sigmoid:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case OutputActivation::Softmax: {
      Eigen::MatrixXd out(z.rows(), z.cols());
      for (Eigen::Index b = 0; b < z.cols(); ++b) {
        const auto col = z.col(b);
        const Eigen::ArrayXd e = (col.array() - col.maxCoeff()).exp();
        out.col(b) = e / e.sum();
      }
      return out;
    }
  }
  return z;
}

inline ForwardPass forward(const MlpModel& m, std::span<const FeatureVector* const> batch) {
  ForwardPass fp;
  const auto batch_size = static_cast<Eigen::Index>(batch.size());
  const auto& w0 = m.weights[0];
  Eigen::MatrixXd z0 = m.biases[0].replicate(1, batch_size);
  for (Eigen::Index b = 0; b < batch_size; ++b) {
    const auto& row = *batch[static_cast<std::size_t>(b)];
    check_row(m, row);
    for (const auto& e : row.entries) z0.col(b).noalias() += static_cast<double>(e.count) * w0.col(e.index);
  }
  fp.pre.push_back(std::move(z0));
  for (std::size_t k = 1; k <= m.num_layers(); ++k) {
    const auto& z = fp.pre.back();
    if (k == m.num_layers()) {
      fp.post.push_back(apply_output(m.config.output, z));
      break;
    }
    fp.post.push_back(z.cwiseMax(0.0));
    Eigen::MatrixXd next = m.weights[k] * fp.post.back();
    next.colwise() += m.biases[k];
    fp.pre.push_back(std::move(next));
  }
  return fp;
}

inline Eigen::MatrixXd one_hot(std::span<const int> labels) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(kMlpOutputs, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t b = 0; b < labels.size(); ++b) t(labels[b], static_cast<Eigen::Index>(b)) = 1.0;
  return t;
}

// Backpropagation. Dense gradients for layers >= 1 go into `grads`; for the
// first layer only the pre-activation error (width x B) is returned, since
// its weight gradient is sparse in the input.
struct Backward {
  Eigen::MatrixXd first_delta;
  MlpGradients grads;
};

inline Backward backward(const MlpModel& m, std::span<const FeatureVector* const> batch, std::span<const int> labels) {
  const auto fp = forward(m, batch);
  const auto& y = fp.post.back();
  const Eigen::MatrixXd diff = y - one_hot(labels);
  const double scale = static_cast<double>(kMlpOutputs * batch.size());

  Backward out;
  out.grads.loss = diff.squaredNorm() / scale;
  Eigen::MatrixXd dy = 2.0 * diff / scale;

  Eigen::MatrixXd delta;
  switch (m.config.output) {
    case OutputActivation::Identity:
      delta = dy;
      break;
    case OutputActivation::Sigmoid:
      delta = dy.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
      break;
    case OutputActivation::Softmax: {
      delta.resize(dy.rows(), dy.cols());
      for (Eigen::Index b = 0; b < dy.cols(); ++b) {
        const double dot = y.col(b).dot(dy.col(b));
        delta.col(b) = y.col(b).cwiseProduct((dy.col(b).array() - dot).matrix());
      }
      break;
    }
  }

  const std::size_t layers = m.num_layers();
  out.grads.weights.resize(layers);
  out.grads.biases.resize(layers);
  for (std::size_t k = layers - 1; k >= 1; --k) {
    out.grads.weights[k] = delta * fp.post[k - 1].transpose();
    out.grads.biases[k] = delta.rowwise().sum();
    Eigen::MatrixXd back = m.weights[k].transpose() * delta;
    delta = back.cwiseProduct((fp.pre[k - 1].array() > 0.0).cast<double>().matrix());
  }
  out.grads.biases[0] = delta.rowwise().sum();
  out.first_delta = std::move(delta);
  return out;
}

inline std::vector<const FeatureVector*> pointers(std::span<const FeatureVector> rows) {
  std::vector<const FeatureVector*> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(&r);
  return out;
}

inline int argmax2(const Eigen::VectorXd& y) { return y(1) > y(0) ? 1 : 0; }

}  // namespace detail

/// Network output for one row (length 2).
inline Eigen::VectorXd mlp_forward(const MlpModel& model, const FeatureVector& row) {
  const FeatureVector* batch[] = {&row};
  return detail::forward(model, batch).post.back().col(0);
}

/// Argmax of the two outputs; ties go to label 0.
inline int mlp_predict(const MlpModel& model, const FeatureVector& row) {
  return detail::argmax2(mlp_forward(model, row));
}

/// Analytic gradients of the batch-mean squared error.
inline MlpGradients mlp_gradients(const MlpModel& model, std::span<const FeatureVector> rows,
                                  std::span<const int> labels) {
  if (rows.size() != labels.size() || rows.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "gradient batch needs equal, non-zero numbers of rows and labels");
  }
  const auto batch = detail::pointers(rows);
  auto bw = detail::backward(model, batch, labels);
  Eigen::MatrixXd g0 = Eigen::MatrixXd::Zero(model.weights[0].rows(), model.weights[0].cols());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    for (const auto& e : rows[b].entries) {
      g0.col(e.index) += static_cast<double>(e.count) * bw.first_delta.col(static_cast<Eigen::Index>(b));
    }
  }
  bw.grads.weights[0] = std::move(g0);
  return std::move(bw.grads);
}

/// Batch-mean squared error (the quantity mlp_gradients differentiates).
inline double mlp_loss(const MlpModel& model, std::span<const FeatureVector> rows, std::span<const int> labels) {
  const auto batch = detail::pointers(rows);
  const auto fp = detail::forward(model, batch);
  const Eigen::MatrixXd diff = fp.post.back() - detail::one_hot(labels);
  return diff.squaredNorm() / static_cast<double>(kMlpOutputs * rows.size());
}

/// Forward passes run in blocks so the dense layers become matrix products.
inline double mlp_accuracy(const MlpModel& model, const BinaryDataset& data) {
  if (data.size() == 0) return 0.0;
  constexpr std::size_t kBlock = 256;
  std::size_t correct = 0;
  std::vector<const FeatureVector*> block;
  for (std::size_t start = 0; start < data.size(); start += kBlock) {
    const auto end = std::min(data.size(), start + kBlock);
    block.clear();
    for (std::size_t i = start; i < end; ++i) block.push_back(&data.rows[i]);
    const auto fp = detail::forward(model, block);
    const auto& y = fp.post.back();
    for (std::size_t i = start; i < end; ++i) {
      const auto col = static_cast<Eigen::Index>(i - start);
      correct += (y(1, col) > y(0, col) ? 1 : 0) == data.labels[i];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> train_accuracy;  // after each epoch
  std::vector<double> epoch_loss;      // mean batch loss over each epoch
};

/// One SGD step on a batch; returns the batch loss before the update.
inline double mlp_sgd_step(MlpModel& model, std::span<const FeatureVector* const> batch, std::span<const int> labels) {
  const double lr = model.config.learning_rate;
  auto bw = detail::backward(model, batch, labels);
  for (std::size_t k = 1; k < model.num_layers(); ++k) {
    model.weights[k] -= lr * bw.grads.weights[k];
    model.biases[k] -= lr * bw.grads.biases[k];
  }
  auto& w0 = model.weights[0];
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (const auto& e : batch[b]->entries) {
      w0.col(e.index) -= (lr * static_cast<double>(e.count)) * bw.first_delta.col(static_cast<Eigen::Index>(b));
    }
  }
  model.biases[0] -= lr * bw.grads.biases[0];
  return bw.grads.loss;
}

/// Per epoch: reshuffle (stream (seed, 1)), then SGD over consecutive
/// mini-batches; the final batch may be short.
inline MlpTrainResult mlp_train(const BinaryDataset& data, const MlpConfig& config) {
  validate(config);
  if (data.rows.size() != data.labels.size()) throw Error(ErrorKind::ShapeMismatch, "rows and labels differ in length");
  require_two_classes(data.labels);

  MlpTrainResult result{init_mlp(config, data.dimension), {}, {}};
  auto& model = result.model;
  Rng rng(config.seed, 1);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<const FeatureVector*> batch;
  std::vector<int> labels;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&data.rows[order[i]]);
        labels.push_back(data.labels[order[i]]);
      }
      const double loss = mlp_sgd_step(model, batch, labels);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch + 1));
      }
      loss_sum += loss;
      ++batches;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
    result.train_accuracy.push_back(mlp_accuracy(model, data));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const MlpConfig& c) {
  nlohmann::json j;
  j["hidden"] = c.hidden;
  j["output_activation"] = std::string(to_string(c.output));
  j["init_range"] = c.init_range;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  return j;
}

inline MlpConfig mlp_config_from_json(const nlohmann::json& j, MlpConfig c = {}) {
  try {
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    if (j.contains("output_activation")) {
      c.output = output_activation_from_string(j.at("output_activation").get<std::string>());
    }
    if (j.contains("init_range")) c.init_range = j.at("init_range").get<double>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("mlp config: ") + e.what());
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(const MlpModel& m) {
  nlohmann::json j;
  j["format"] = "ldeb-mlp";
  j["version"] = 1;
  j["input_dim"] = m.input_dim;
  j["config"] = to_json(m.config);
  auto layers = nlohmann::json::array();
  for (std::size_t k = 0; k < m.num_layers(); ++k) {
    const auto& w = m.weights[k];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    const auto& b = m.biases[k];
    layers.push_back({{"shape", {w.rows(), w.cols()}},
                      {"weights", std::move(flat)},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  j["layers"] = std::move(layers);
  return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "ldeb-mlp" || j.at("version") != 1) {
      throw Error(ErrorKind::ModelFormat, "not a version-1 mlp model");
    }
    MlpModel m;
    m.config = mlp_config_from_json(j.at("config"));
    m.input_dim = j.at("input_dim").get<std::size_t>();
    std::size_t fan_in = m.input_dim;
    for (const auto& layer : j.at("layers")) {
      const auto rows = layer.at("shape").at(0).get<std::size_t>();
      const auto cols = layer.at("shape").at(1).get<std::size_t>();
      const auto& flat = layer.at("weights");
      const auto& bias = layer.at("bias");
      if (cols != fan_in || flat.size() != rows * cols || bias.size() != rows) {
        throw Error(ErrorKind::ModelFormat, "layer shapes do not chain");
      }
      Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      std::size_t i = 0;
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[i++].get<double>();
      }
      Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
      for (std::size_t r = 0; r < rows; ++r) b(static_cast<Eigen::Index>(r)) = bias[r].get<double>();
      m.weights.push_back(std::move(w));
      m.biases.push_back(std::move(b));
      fan_in = rows;
    }
    if (m.weights.size() != m.config.hidden.size() + 1 || fan_in != kMlpOutputs) {
      throw Error(ErrorKind::ModelFormat, "layer count or output width does not match config");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, std::string("mlp model: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ModelFormat) throw;
    throw Error(ErrorKind::ModelFormat, e.what());
  }
}

}  // namespace ldeb
