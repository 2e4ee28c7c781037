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
#ifndef STSSL_SYNTHETIC_HPP
#define STSSL_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stssl/data.hpp"
#include "stssl/graph.hpp"

namespace stssl {

/// Desk-scale stand-in for a PeMS deployment:
///   speed(t, n) = base + amplitude · sin(2π t / period + φ_n) + N(0, noise_std²)
struct SyntheticSpec {
  std::size_t n_nodes = 10;
  std::size_t n_steps = 2000;
  std::size_t period_steps = 288;
  double interval_minutes = 5.0;
  double base_speed = 60.0;
  double amplitude = 20.0;
  // φ_n = phase_spread · n / n_nodes unless explicit phases are given.
  double phase_spread = 3.141592653589793;
  std::vector<double> phases;
  double noise_std = 0.5;
  std::string topology = "ring";  // ring | grid | random-geometric
  std::size_t grid_cols = 0;      // 0 picks the widest divisor <= sqrt(n)
  double geometric_radius = 0.4;
  std::uint64_t seed = 7;

  static SyntheticSpec load(const std::string& path);
  void validate() const;
};

struct SyntheticDataset {
  SpeedSeries series;
  std::vector<Edge> edges;
  TrafficGraph graph;
  std::vector<double> phases;
  std::string description;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Writes manifest.txt, speed.csv, edges.csv and truth.csv into `dir`; returns the manifest path.
std::string write_synthetic(const SyntheticDataset& data, const SyntheticSpec& spec, const std::string& dir);

}  // namespace stssl

#endif  // STSSL_SYNTHETIC_HPP
