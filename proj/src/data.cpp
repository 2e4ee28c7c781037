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
#include "stssl/data.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/text_io.hpp"

namespace stssl {

namespace {

static_assert(std::endian::native == std::endian::little, "f64le I/O assumes a little-endian host");

}  // namespace

Normalizer Normalizer::fit(const SpeedSeries& series, std::size_t begin_step, std::size_t end_step) {
  if (end_step <= begin_step || end_step > series.n_steps) throw ContractError("normalizer needs a non-empty range");
  const std::size_t n = (end_step - begin_step) * series.n_nodes;
  std::span<const double> values(series.values.data() + begin_step * series.n_nodes, n);
  double total = 0.0;
  for (double v : values) total += v;
  Normalizer norm;
  norm.mean = total / static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - norm.mean) * (v - norm.mean);
  norm.std = std::sqrt(var / static_cast<double>(n));
  if (!(norm.std > 0.0)) {
    norm.std = 1.0;
    norm.degenerate = true;
  }
  return norm;
}

void SplitRatios::validate() const {
  if (train <= 0.0 || val < 0.0 || test < 0.0) throw ConfigError("split ratios must be nonnegative (train > 0)");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

SplitBounds split_bounds(std::size_t n_steps, const SplitRatios& ratios) {
  ratios.validate();
  // The small offset keeps exact products such as 0.7 * 1000 from rounding down.
  const auto floor_of = [n_steps](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n_steps) + 1e-9));
  };
  SplitBounds b;
  b.total = n_steps;
  b.train_end = std::min(floor_of(ratios.train), n_steps);
  b.val_end = std::min(b.train_end + floor_of(ratios.val), n_steps);
  return b;
}

WindowSet make_windows(std::size_t segment_begin, std::size_t segment_end, std::size_t input_window,
                       std::size_t max_horizon) {
  WindowSet w;
  w.segment_begin = segment_begin;
  w.segment_end = segment_end;
  w.input_window = input_window;
  w.max_horizon = max_horizon;
  const std::size_t span = input_window + max_horizon;
  if (segment_end >= segment_begin + span) {
    for (std::size_t s = segment_begin; s + span <= segment_end; ++s) w.starts.push_back(s);
  }
  return w;
}

DatasetSplits split_and_window(std::size_t n_steps, const SplitRatios& ratios, std::size_t input_window,
                               std::size_t max_horizon) {
  if (input_window == 0 || max_horizon == 0) throw ConfigError("input window and horizon must be at least 1");
  DatasetSplits s;
  s.bounds = split_bounds(n_steps, ratios);
  s.train = make_windows(0, s.bounds.train_end, input_window, max_horizon);
  s.val = make_windows(s.bounds.train_end, s.bounds.val_end, input_window, max_horizon);
  s.test = make_windows(s.bounds.val_end, n_steps, input_window, max_horizon);
  const std::pair<const char*, const WindowSet*> parts[] = {{"train", &s.train}, {"val", &s.val}, {"test", &s.test}};
  for (const auto& [label, set] : parts) {
    if (set->empty()) {
      s.warnings.push_back(std::string(label) + " segment of " + std::to_string(set->segment_end - set->segment_begin) +
                           " steps is shorter than one window (" + std::to_string(input_window + max_horizon) + ")");
    }
  }
  return s;
}

Batch make_batch(const SpeedSeries& series, const Normalizer& normalizer, const WindowSet& windows,
                 std::span<const std::size_t> window_indices) {
  const std::size_t b = window_indices.size();
  const std::size_t t_in = windows.input_window;
  const std::size_t h = windows.max_horizon;
  const std::size_t n = series.n_nodes;
  std::vector<double> x(b * t_in * n);
  std::vector<double> y(b * n * h);
  Batch batch;
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t start = windows.starts.at(window_indices[i]);
    batch.starts.push_back(start);
    for (std::size_t t = 0; t < t_in; ++t) {
      for (std::size_t node = 0; node < n; ++node) {
        x[(i * t_in + t) * n + node] = normalizer.normalize(series.at(start + t, node));
      }
    }
    for (std::size_t node = 0; node < n; ++node) {
      for (std::size_t k = 0; k < h; ++k) {
        y[(i * n + node) * h + k] = normalizer.normalize(series.at(start + t_in + k, node));
      }
    }
  }
  batch.x = Tensor::from({b, t_in, n, 1}, std::move(x));
  batch.y = Tensor::from({b, n, h}, std::move(y));
  return batch;
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  kv.reject_unknown({"name", "n_nodes", "n_steps", "interval_minutes", "speed_file", "speed_format", "graph_file",
                     "graph_format", "kernel_sigma", "threshold_eps", "n_edges", "start_timestamp"});
  DatasetManifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();
  m.name = kv.get_string("name", m.name);
  const long long nodes = kv.get_int("n_nodes");
  const long long steps = kv.get_int("n_steps");
  if (nodes <= 0 || steps <= 0) throw ConfigError(path + ": n_nodes and n_steps must be positive");
  m.n_nodes = static_cast<std::size_t>(nodes);
  m.n_steps = static_cast<std::size_t>(steps);
  m.interval_minutes = kv.get_double("interval_minutes", m.interval_minutes);
  if (!(m.interval_minutes > 0.0)) throw ConfigError(path + ": interval_minutes must be positive");
  m.speed_file = kv.get_string("speed_file");
  m.speed_format = kv.get_string("speed_format", m.speed_format);
  if (m.speed_format != "csv" && m.speed_format != "f64le") {
    throw ConfigError(path + ": speed_format must be csv or f64le");
  }
  m.graph_file = kv.get_string("graph_file");
  m.graph_format = kv.get_string("graph_format", m.graph_format);
  if (m.graph_format != "edges" && m.graph_format != "dense") {
    throw ConfigError(path + ": graph_format must be edges or dense");
  }
  m.kernel_sigma = kv.get_double("kernel_sigma", m.kernel_sigma);
  m.threshold_eps = kv.get_double("threshold_eps", m.threshold_eps);
  if (kv.has("n_edges")) m.n_edges = static_cast<std::size_t>(kv.get_int("n_edges"));
  m.start_timestamp = kv.get_string("start_timestamp", "");
  return m;
}

void DatasetManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << std::setprecision(17);
  out << "name = " << name << '\n'
      << "n_nodes = " << n_nodes << '\n'
      << "n_steps = " << n_steps << '\n'
      << "interval_minutes = " << interval_minutes << '\n'
      << "speed_file = " << speed_file << '\n'
      << "speed_format = " << speed_format << '\n'
      << "graph_file = " << graph_file << '\n'
      << "graph_format = " << graph_format << '\n'
      << "kernel_sigma = " << kernel_sigma << '\n'
      << "threshold_eps = " << threshold_eps << '\n';
  if (n_edges) out << "n_edges = " << *n_edges << '\n';
  if (!start_timestamp.empty()) out << "start_timestamp = " << start_timestamp << '\n';
}

std::string DatasetManifest::resolve(const std::string& file) const {
  const std::filesystem::path p(file);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

SpeedSeries read_speed_csv(const std::string& path, std::size_t n_steps, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open speed file '" + path + "'");
  SpeedSeries s;
  s.n_steps = n_steps;
  s.n_nodes = n_nodes;
  s.values.reserve(n_steps * n_nodes);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    if (row > n_steps) {
      throw IngestionError(path + ": expected " + std::to_string(n_steps) + " rows but found more");
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != n_nodes) {
      throw IngestionError(path + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " columns, expected " + std::to_string(n_nodes));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) s.values.push_back(parse_cell(cells[c], path, row, c + 1));
  }
  if (row != n_steps) {
    throw IngestionError(path + ": expected " + std::to_string(n_steps) + " rows, found " + std::to_string(row));
  }
  return s;
}

SpeedSeries read_speed_f64le(const std::string& path, std::size_t n_steps, std::size_t n_nodes) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IngestionError("cannot open speed file '" + path + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const std::size_t expected = n_steps * n_nodes * sizeof(double);
  if (bytes != expected) {
    throw IngestionError(path + ": expected " + std::to_string(expected) + " bytes (" + std::to_string(n_steps) + "x" +
                         std::to_string(n_nodes) + " doubles), found " + std::to_string(bytes));
  }
  in.seekg(0);
  SpeedSeries s;
  s.n_steps = n_steps;
  s.n_nodes = n_nodes;
  s.values.resize(n_steps * n_nodes);
  in.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(expected));
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!std::isfinite(s.values[i])) {
      throw IngestionError(path + ": non-finite value at step " + std::to_string(i / n_nodes) + ", node " +
                           std::to_string(i % n_nodes));
    }
  }
  return s;
}

void write_speed_csv(const std::string& path, const SpeedSeries& series) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (std::size_t t = 0; t < series.n_steps; ++t) {
    for (std::size_t n = 0; n < series.n_nodes; ++n) {
      if (n > 0) out << ',';
      out << series.at(t, n);
    }
    out << '\n';
  }
}

void write_speed_f64le(const std::string& path, const SpeedSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(series.values.data()),
            static_cast<std::streamsize>(series.values.size() * sizeof(double)));
}

Dataset load_dataset(const DatasetManifest& manifest) {
  Dataset d;
  d.manifest = manifest;
  const std::string speed_path = manifest.resolve(manifest.speed_file);
  d.series = manifest.speed_format == "csv" ? read_speed_csv(speed_path, manifest.n_steps, manifest.n_nodes)
                                            : read_speed_f64le(speed_path, manifest.n_steps, manifest.n_nodes);
  const std::string graph_path = manifest.resolve(manifest.graph_file);
  if (manifest.graph_format == "edges") {
    std::vector<Edge> edges = read_edge_list(graph_path, manifest.n_nodes);
    if (manifest.n_edges && *manifest.n_edges != edges.size()) {
      throw IngestionError(graph_path + ": manifest declares " + std::to_string(*manifest.n_edges) +
                           " edges, file has " + std::to_string(edges.size()));
    }
    const double sigma = manifest.kernel_sigma > 0.0 ? manifest.kernel_sigma : default_kernel_sigma(edges);
    d.graph = TrafficGraph::from_edges(manifest.n_nodes, std::move(edges), sigma, manifest.threshold_eps);
  } else {
    Eigen::MatrixXd a = read_dense_matrix(graph_path, manifest.n_nodes);
    try {
      validate_adjacency(a);
    } catch (const ContractError& e) {
      throw IngestionError(graph_path + ": " + e.what());
    }
    d.graph = TrafficGraph::from_adjacency(a);
    if (manifest.n_edges && *manifest.n_edges != d.graph.edge_count()) {
      throw IngestionError(graph_path + ": manifest declares " + std::to_string(*manifest.n_edges) +
                           " edges, adjacency has " + std::to_string(d.graph.edge_count()));
    }
  }
  return d;
}

}  // namespace stssl
