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
#ifndef STSSL_METRICS_HPP
#define STSSL_METRICS_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stssl {

// Entries with |y| below this (MAPE) or |y| + |ŷ| below this (SMAPE) are skipped.
inline constexpr double kZeroDenominator = 1e-8;

struct Metrics {
  double mae = 0.0;
  double mape = 0.0;   // percent
  double rmse = 0.0;
  double smape = 0.0;  // percent
  std::size_t count = 0;
  std::size_t mape_skipped = 0;
  std::size_t smape_skipped = 0;
};

// Throws ContractError on empty or mismatched inputs. When every entry is
// skipped the corresponding percentage is reported as 0.
Metrics compute_metrics(std::span<const double> y, std::span<const double> y_hat);

struct HorizonMetrics {
  std::size_t horizon_steps = 0;
  double horizon_minutes = 0.0;
  Metrics metrics;
};

struct MetricsReport {
  std::vector<HorizonMetrics> horizons;

  // Mean of the per-horizon MAE values.
  double mean_mae() const;
  double mean_rmse() const;
};

// `horizon_min,mae,mape,rmse,smape,skipped`
void write_report_csv(std::ostream& out, const MetricsReport& report);
void write_report_csv(const std::string& path, const MetricsReport& report);
void print_report_table(std::ostream& out, const MetricsReport& report);

// Pairwise summation; the order of additions depends only on the length.
double pairwise_sum(std::span<const double> values);

}  // namespace stssl

#endif  // STSSL_METRICS_HPP
