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
#ifndef STSSL_CONFIG_HPP
#define STSSL_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stssl/augmentation.hpp"
#include "stssl/data.hpp"
#include "stssl/encoder.hpp"
#include "stssl/ssl.hpp"

namespace stssl {

struct LossWeights {
  double prediction = 1.0;
  double spatial = 1.0;
  double temporal = 1.0;
};

struct TrainConfig {
  std::size_t input_window = 12;
  // Step offsets evaluated and reported; the head predicts every step up to the largest.
  std::vector<std::size_t> horizons = {6, 9, 12};
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::size_t epochs = 100;
  SplitRatios split;
  LossWeights loss_weights;
  std::uint64_t seed = 42;
  // Global-norm gradient clipping; 0 disables it.
  double grad_clip = 0.0;
  // Hidden width of the two-layer prediction head; 0 means d_model.
  std::size_t head_hidden = 0;
  EncoderConfig encoder;
  AugmentConfig augment;
  SslConfig ssl;

  std::size_t max_horizon() const;
  std::size_t head_width() const { return head_hidden == 0 ? encoder.d_model : head_hidden; }
  void validate() const;

  // Flat key = value text; unknown keys are ConfigError.
  static TrainConfig parse(const std::string& text, const std::string& source);
  static TrainConfig load(const std::string& path);
  std::string to_text() const;
  static const std::vector<std::string>& keys();
};

}  // namespace stssl

#endif  // STSSL_CONFIG_HPP
