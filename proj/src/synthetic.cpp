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
#include "stssl/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/text_io.hpp"

namespace stssl {

SyntheticSpec SyntheticSpec::load(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  kv.reject_unknown({"n_nodes", "n_steps", "period_steps", "interval_minutes", "base_speed", "amplitude",
                     "phase_spread", "phases", "noise_std", "topology", "grid_cols", "geometric_radius", "seed"});
  SyntheticSpec s;
  s.n_nodes = static_cast<std::size_t>(kv.get_int("n_nodes", static_cast<long long>(s.n_nodes)));
  s.n_steps = static_cast<std::size_t>(kv.get_int("n_steps", static_cast<long long>(s.n_steps)));
  s.period_steps = static_cast<std::size_t>(kv.get_int("period_steps", static_cast<long long>(s.period_steps)));
  s.interval_minutes = kv.get_double("interval_minutes", s.interval_minutes);
  s.base_speed = kv.get_double("base_speed", s.base_speed);
  s.amplitude = kv.get_double("amplitude", s.amplitude);
  s.phase_spread = kv.get_double("phase_spread", s.phase_spread);
  if (kv.has("phases")) s.phases = kv.get_double_list("phases");
  s.noise_std = kv.get_double("noise_std", s.noise_std);
  s.topology = kv.get_string("topology", s.topology);
  s.grid_cols = static_cast<std::size_t>(kv.get_int("grid_cols", 0));
  s.geometric_radius = kv.get_double("geometric_radius", s.geometric_radius);
  s.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(s.seed)));
  s.validate();
  return s;
}

void SyntheticSpec::validate() const {
  if (n_nodes == 0 || n_steps == 0 || period_steps == 0) throw ConfigError("synthetic sizes must be positive");
  if (!(interval_minutes > 0.0)) throw ConfigError("interval_minutes must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be nonnegative");
  if (!phases.empty() && phases.size() != n_nodes) throw ConfigError("phases must list one value per node");
  if (topology != "ring" && topology != "grid" && topology != "random-geometric") {
    throw ConfigError("topology must be ring, grid or random-geometric");
  }
  if (topology == "ring" && n_nodes < 3) throw ConfigError("a ring needs at least 3 nodes");
  if (topology == "grid" && grid_cols != 0 && n_nodes % grid_cols != 0) {
    throw ConfigError("grid_cols must divide n_nodes");
  }
}

namespace {

std::vector<Edge> ring_edges(std::size_t n) {
  const double chord = 2.0 * std::sin(std::numbers::pi / static_cast<double>(n));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, chord});
  return edges;
}

std::vector<Edge> grid_edges(std::size_t n, std::size_t cols) {
  if (cols == 0) {
    cols = 1;
    for (std::size_t c = 1; c * c <= n; ++c) {
      if (n % c == 0) cols = c;
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    if ((i + 1) % cols != 0 && i + 1 < n) edges.push_back({i, i + 1, 1.0});
    if (i + cols < n) edges.push_back({i, i + cols, 1.0});
  }
  return edges;
}

std::vector<Edge> geometric_edges(std::size_t n, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> pos(n);
  for (auto& p : pos) p = {unit(rng), unit(rng)};
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(pos[i].first - pos[j].first, pos[i].second - pos[j].second);
      if (d <= radius) edges.push_back({i, j, d});
    }
  }
  return edges;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset out;
  std::mt19937_64 topology_rng(spec.seed ^ 0x5bd1e995ULL);
  if (spec.topology == "ring") {
    out.edges = ring_edges(spec.n_nodes);
  } else if (spec.topology == "grid") {
    out.edges = grid_edges(spec.n_nodes, spec.grid_cols);
  } else {
    out.edges = geometric_edges(spec.n_nodes, spec.geometric_radius, topology_rng);
  }
  out.graph = TrafficGraph::from_edges(spec.n_nodes, out.edges, default_kernel_sigma(out.edges), 0.1);

  out.phases = spec.phases;
  if (out.phases.empty()) {
    for (std::size_t n = 0; n < spec.n_nodes; ++n) {
      out.phases.push_back(spec.phase_spread * static_cast<double>(n) / static_cast<double>(spec.n_nodes));
    }
  }

  std::mt19937_64 noise_rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  out.series.n_steps = spec.n_steps;
  out.series.n_nodes = spec.n_nodes;
  out.series.values.resize(spec.n_steps * spec.n_nodes);
  const double omega = 2.0 * std::numbers::pi / static_cast<double>(spec.period_steps);
  for (std::size_t t = 0; t < spec.n_steps; ++t) {
    // Reduce t modulo the period so the clean signal repeats bit-for-bit.
    const double cycle = static_cast<double>(t % spec.period_steps);
    for (std::size_t n = 0; n < spec.n_nodes; ++n) {
      double v = spec.base_speed + spec.amplitude * std::sin(omega * cycle + out.phases[n]);
      if (spec.noise_std > 0.0) v += spec.noise_std * noise(noise_rng);
      out.series.values[t * spec.n_nodes + n] = v;
    }
  }

  std::ostringstream desc;
  desc << std::setprecision(17) << "speed(t,n) = " << spec.base_speed << " + " << spec.amplitude
       << " * sin(2*pi*t/" << spec.period_steps << " + phase[n]) + N(0, " << spec.noise_std << "^2); topology "
       << spec.topology << " with " << out.edges.size() << " edges; seed " << spec.seed;
  out.description = desc.str();
  return out;
}

std::string write_synthetic(const SyntheticDataset& data, const SyntheticSpec& spec, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  write_speed_csv((root / "speed.csv").string(), data.series);
  write_edge_list((root / "edges.csv").string(), data.edges);
  {
    std::ofstream truth(root / "truth.csv");
    if (!truth) throw IngestionError("cannot write truth.csv in '" + dir + "'");
    truth << "# " << data.description << '\n' << "node,phase\n" << std::setprecision(17);
    for (std::size_t n = 0; n < data.phases.size(); ++n) truth << n << ',' << data.phases[n] << '\n';
  }
  DatasetManifest m;
  m.name = "synthetic-" + spec.topology;
  m.n_nodes = spec.n_nodes;
  m.n_steps = spec.n_steps;
  m.interval_minutes = spec.interval_minutes;
  m.speed_file = "speed.csv";
  m.speed_format = "csv";
  m.graph_file = "edges.csv";
  m.graph_format = "edges";
  m.n_edges = data.edges.size();
  const std::string manifest_path = (root / "manifest.txt").string();
  m.save(manifest_path);
  return manifest_path;
}

}  // namespace stssl
