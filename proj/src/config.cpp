/**
 * Copyright 2026 The stssl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "stssl/config.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/text_io.hpp"

namespace stssl {

namespace {

std::size_t get_count(const KeyValueFile& kv, const std::string& key, std::size_t fallback) {
  const long long v = kv.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(kv.source() + ": '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

}  // namespace

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> names = {
      "input_window", "horizons", "batch_size", "learning_rate", "epochs", "train_ratio", "val_ratio",
      "test_ratio", "alpha_p", "alpha_s", "alpha_t", "seed", "grad_clip", "head_hidden", "d_model", "n_heads",
      "n_layers", "cheb_order", "ffn_hidden", "positional_encoding", "mask_ratio", "edge_removal_ratio",
      "edge_addition_fraction", "n_clusters", "temperature"};
  return names;
}

std::size_t TrainConfig::max_horizon() const {
  return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

void TrainConfig::validate() const {
  if (input_window == 0 || batch_size == 0) throw ConfigError("input_window and batch_size must be at least 1");
  if (horizons.empty()) throw ConfigError("at least one horizon is required");
  for (std::size_t h : horizons) {
    if (h == 0) throw ConfigError("horizons are step offsets and must be at least 1");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be nonnegative");
  if (!(loss_weights.prediction >= 0.0 && loss_weights.spatial >= 0.0 && loss_weights.temporal >= 0.0)) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (loss_weights.temporal > 0.0 && input_window < 2) {
    throw ConfigError("the temporal SSL loss needs input_window >= 2");
  }
  split.validate();
  encoder.validate();
  augment.validate();
  ssl.validate();
}

TrainConfig TrainConfig::parse(const std::string& text, const std::string& source) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  kv.reject_unknown(keys());
  TrainConfig c;
  c.input_window = get_count(kv, "input_window", c.input_window);
  if (kv.has("horizons")) {
    c.horizons.clear();
    for (double h : kv.get_double_list("horizons")) {
      if (h < 1 || h != std::floor(h)) throw ConfigError(source + ": horizons must be positive integers");
      c.horizons.push_back(static_cast<std::size_t>(h));
    }
  }
  c.batch_size = get_count(kv, "batch_size", c.batch_size);
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.epochs = get_count(kv, "epochs", c.epochs);
  c.split.train = kv.get_double("train_ratio", c.split.train);
  c.split.val = kv.get_double("val_ratio", c.split.val);
  c.split.test = kv.get_double("test_ratio", c.split.test);
  c.loss_weights.prediction = kv.get_double("alpha_p", c.loss_weights.prediction);
  c.loss_weights.spatial = kv.get_double("alpha_s", c.loss_weights.spatial);
  c.loss_weights.temporal = kv.get_double("alpha_t", c.loss_weights.temporal);
  c.seed = static_cast<std::uint64_t>(get_count(kv, "seed", c.seed));
  c.grad_clip = kv.get_double("grad_clip", c.grad_clip);
  c.head_hidden = get_count(kv, "head_hidden", c.head_hidden);
  c.encoder.d_model = get_count(kv, "d_model", c.encoder.d_model);
  c.encoder.n_heads = get_count(kv, "n_heads", c.encoder.n_heads);
  c.encoder.n_layers = get_count(kv, "n_layers", c.encoder.n_layers);
  c.encoder.cheb_order = get_count(kv, "cheb_order", c.encoder.cheb_order);
  // ffn_hidden follows d_model unless given explicitly.
  c.encoder.ffn_hidden = get_count(kv, "ffn_hidden", 4 * c.encoder.d_model);
  c.encoder.positional_encoding = kv.get_bool("positional_encoding", c.encoder.positional_encoding);
  c.augment.mask_ratio = kv.get_double("mask_ratio", c.augment.mask_ratio);
  c.augment.edge_removal_ratio = kv.get_double("edge_removal_ratio", c.augment.edge_removal_ratio);
  c.augment.edge_addition_fraction = kv.get_double("edge_addition_fraction", c.augment.edge_addition_fraction);
  c.ssl.n_clusters = get_count(kv, "n_clusters", c.ssl.n_clusters);
  c.ssl.temperature = kv.get_double("temperature", c.ssl.temperature);
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IngestionError&) {
    throw ConfigError("cannot open config '" + path + "'");
  }
  return parse(text, path);
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "input_window = " << input_window << '\n' << "horizons = ";
  for (std::size_t i = 0; i < horizons.size(); ++i) out << (i > 0 ? "," : "") << horizons[i];
  out << '\n'
      << "batch_size = " << batch_size << '\n'
      << "learning_rate = " << learning_rate << '\n'
      << "epochs = " << epochs << '\n'
      << "train_ratio = " << split.train << '\n'
      << "val_ratio = " << split.val << '\n'
      << "test_ratio = " << split.test << '\n'
      << "alpha_p = " << loss_weights.prediction << '\n'
      << "alpha_s = " << loss_weights.spatial << '\n'
      << "alpha_t = " << loss_weights.temporal << '\n'
      << "seed = " << seed << '\n'
      << "grad_clip = " << grad_clip << '\n'
      << "head_hidden = " << head_hidden << '\n'
      << "d_model = " << encoder.d_model << '\n'
      << "n_heads = " << encoder.n_heads << '\n'
      << "n_layers = " << encoder.n_layers << '\n'
      << "cheb_order = " << encoder.cheb_order << '\n'
      << "ffn_hidden = " << encoder.ffn_hidden << '\n'
      << "positional_encoding = " << (encoder.positional_encoding ? "true" : "false") << '\n'
      << "mask_ratio = " << augment.mask_ratio << '\n'
      << "edge_removal_ratio = " << augment.edge_removal_ratio << '\n'
      << "edge_addition_fraction = " << augment.edge_addition_fraction << '\n'
      << "n_clusters = " << ssl.n_clusters << '\n'
      << "temperature = " << ssl.temperature << '\n';
  return out.str();
}

}  // namespace stssl
