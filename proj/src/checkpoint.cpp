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
#include "stssl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "stssl/errors.hpp"

namespace stssl {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'T', 'S', 'S', 'L', 'C', 'K', '1'};

using nlohmann::json;

void append_u64(std::string& out, std::uint64_t value) {
  char buf[8];
  std::memcpy(buf, &value, 8);
  out.append(buf, 8);
}

void append_doubles(std::string& out, std::span<const double> values) {
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
}

}  // namespace

Checkpoint Checkpoint::clone() const {
  Checkpoint copy;
  copy.config = config;
  copy.params = params.clone();
  copy.adam = adam;
  copy.normalizer = normalizer;
  copy.epoch = epoch;
  copy.seed = seed;
  return copy;
}

std::string Checkpoint::to_bytes() const {
  json manifest;
  manifest["format"] = 1;
  manifest["config"] = config.to_text();
  manifest["epoch"] = epoch;
  manifest["seed"] = seed;
  manifest["rng"] = {{"seed", seed}, {"next_epoch", epoch}};
  manifest["normalizer"] = {{"mean", normalizer.mean}, {"std", normalizer.std}, {"degenerate", normalizer.degenerate}};
  manifest["adam"] = {{"step", adam.step}, {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"epsilon", adam.epsilon}};

  json arrays = json::array();
  std::string payload;
  for (const auto& [name, param] : params) {
    arrays.push_back({{"name", "param/" + name}, {"shape", param.shape()}});
    append_doubles(payload, param.data());
  }
  const char* prefixes[2] = {"adam.m/", "adam.v/"};
  const std::map<std::string, std::vector<double>>* moments[2] = {&adam.m, &adam.v};
  for (int k = 0; k < 2; ++k) {
    for (const auto& [name, param] : params) {
      auto it = moments[k]->find(name);
      std::vector<double> zeros;
      const std::vector<double>* values = &zeros;
      if (it != moments[k]->end() && it->second.size() == param.numel()) {
        values = &it->second;
      } else {
        zeros.assign(param.numel(), 0.0);
      }
      arrays.push_back({{"name", prefixes[k] + name}, {"shape", param.shape()}});
      append_doubles(payload, *values);
    }
  }
  manifest["arrays"] = arrays;

  const std::string text = manifest.dump();
  std::string out(kMagic, 8);
  append_u64(out, text.size());
  out += text;
  out += payload;
  return out;
}

Checkpoint Checkpoint::from_bytes(const std::string& bytes, const std::string& source) {
  auto fail = [&](const std::string& what) { return IngestionError(source + ": " + what); };
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw fail("not a checkpoint file");
  std::uint64_t length = 0;
  std::memcpy(&length, bytes.data() + 8, 8);
  if (length > bytes.size() - 16) throw fail("truncated manifest");

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(length));
  } catch (const json::exception& e) {
    throw fail(std::string("malformed manifest: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    if (manifest.at("format").get<int>() != 1) throw fail("unsupported format version");
    ckpt.config = TrainConfig::parse(manifest.at("config").get<std::string>(), source + " [config]");
    ckpt.epoch = manifest.at("epoch").get<std::size_t>();
    ckpt.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& norm = manifest.at("normalizer");
    ckpt.normalizer.mean = norm.at("mean").get<double>();
    ckpt.normalizer.std = norm.at("std").get<double>();
    ckpt.normalizer.degenerate = norm.at("degenerate").get<bool>();
    const auto& adam = manifest.at("adam");
    ckpt.adam.step = adam.at("step").get<std::size_t>();
    ckpt.adam.beta1 = adam.at("beta1").get<double>();
    ckpt.adam.beta2 = adam.at("beta2").get<double>();
    ckpt.adam.epsilon = adam.at("epsilon").get<double>();

    std::size_t offset = 16 + length;
    for (const auto& entry : manifest.at("arrays")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const std::size_t count = shape_numel(shape);
      if ((bytes.size() - offset) / sizeof(double) < count) throw fail("truncated array " + name);
      std::vector<double> values(count);
      std::memcpy(values.data(), bytes.data() + offset, count * sizeof(double));
      offset += count * sizeof(double);
      const auto slash = name.find('/');
      const std::string kind = name.substr(0, slash);
      const std::string key = slash == std::string::npos ? std::string() : name.substr(slash + 1);
      if (kind == "param") {
        ckpt.params.add(key, Tensor::from(shape, std::move(values)));
      } else if (kind == "adam.m") {
        ckpt.adam.m[key] = std::move(values);
      } else if (kind == "adam.v") {
        ckpt.adam.v[key] = std::move(values);
      } else {
        throw fail("unknown array " + name);
      }
    }
    if (offset != bytes.size()) throw fail("trailing bytes after arrays");
  } catch (const json::exception& e) {
    throw fail(std::string("bad manifest field: ") + e.what());
  } catch (const ConfigError& e) {
    throw fail(e.what());
  }
  return ckpt;
}

void Checkpoint::save(const std::string& path) const {
  const std::string bytes = to_bytes();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write checkpoint " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IngestionError("failed writing checkpoint " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_bytes(bytes, path);
}

}  // namespace stssl
