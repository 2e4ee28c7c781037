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
#ifndef STSSL_CHECKPOINT_HPP
#define STSSL_CHECKPOINT_HPP

#include <cstddef>
#include <cstdint>
#include <string>

#include "stssl/config.hpp"
#include "stssl/data.hpp"
#include "stssl/optim.hpp"
#include "stssl/parameters.hpp"

namespace stssl {

/// Everything needed to resume or evaluate a run.
///
/// Byte layout of the file:
///   bytes 0..7   magic "STSSLCK1"
///   bytes 8..15  manifest length L, uint64 little-endian
///   next L bytes UTF-8 JSON manifest
///   remainder    float64 little-endian arrays, concatenated in the order of
///                the manifest's "arrays" list
///
/// The manifest carries the config text, epoch, seed, normalizer, Adam step
/// and hyperparameters, and one {name, shape} entry per array. Arrays are the
/// parameters (lexicographic), then Adam first moments, then second moments.
/// Randomness is a pure function of (seed, epoch, batch), so the RNG state is
/// the pair (seed, epoch).
struct Checkpoint {
  TrainConfig config;
  ParameterStore params;
  AdamState adam;
  Normalizer normalizer;
  std::size_t epoch = 0;
  std::uint64_t seed = 0;

  Checkpoint clone() const;

  std::string to_bytes() const;
  static Checkpoint from_bytes(const std::string& bytes, const std::string& source = "<memory>");

  void save(const std::string& path) const;
  // Throws IngestionError on a missing, truncated or malformed file.
  static Checkpoint load(const std::string& path);
};

}  // namespace stssl

#endif  // STSSL_CHECKPOINT_HPP
