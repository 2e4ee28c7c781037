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
#include "stssl/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stssl/errors.hpp"

namespace stssl {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Metrics compute_metrics(std::span<const double> y, std::span<const double> y_hat) {
  if (y.empty() || y.size() != y_hat.size()) {
    throw ContractError("compute_metrics needs equal-length, non-empty inputs (got " + std::to_string(y.size()) +
                        " and " + std::to_string(y_hat.size()) + ")");
  }
  const std::size_t n = y.size();
  std::vector<double> abs_err(n);
  std::vector<double> sq_err(n);
  std::vector<double> pct;
  std::vector<double> sym;
  pct.reserve(n);
  sym.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = y[i] - y_hat[i];
    abs_err[i] = std::abs(diff);
    sq_err[i] = diff * diff;
    if (std::abs(y[i]) >= kZeroDenominator) pct.push_back(std::abs(diff / y[i]));
    const double denom = std::abs(y[i]) + std::abs(y_hat[i]);
    if (denom >= kZeroDenominator) sym.push_back(std::abs(diff) / (denom / 2.0));
  }
  Metrics m;
  m.count = n;
  m.mae = pairwise_sum(abs_err) / static_cast<double>(n);
  m.rmse = std::sqrt(pairwise_sum(sq_err) / static_cast<double>(n));
  m.mape_skipped = n - pct.size();
  m.smape_skipped = n - sym.size();
  m.mape = pct.empty() ? 0.0 : 100.0 * pairwise_sum(pct) / static_cast<double>(pct.size());
  m.smape = sym.empty() ? 0.0 : 100.0 * pairwise_sum(sym) / static_cast<double>(sym.size());
  return m;
}

double MetricsReport::mean_mae() const {
  if (horizons.empty()) return 0.0;
  double total = 0.0;
  for (const auto& h : horizons) total += h.metrics.mae;
  return total / static_cast<double>(horizons.size());
}

double MetricsReport::mean_rmse() const {
  if (horizons.empty()) return 0.0;
  double total = 0.0;
  for (const auto& h : horizons) total += h.metrics.rmse;
  return total / static_cast<double>(horizons.size());
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  out << "horizon_min,mae,mape,rmse,smape,skipped\n" << std::setprecision(17);
  for (const auto& h : report.horizons) {
    out << h.horizon_minutes << ',' << h.metrics.mae << ',' << h.metrics.mape << ',' << h.metrics.rmse << ','
        << h.metrics.smape << ',' << h.metrics.mape_skipped << '\n';
  }
}

void write_report_csv(const std::string& path, const MetricsReport& report) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  write_report_csv(out, report);
}

void print_report_table(std::ostream& out, const MetricsReport& report) {
  out << std::left << std::setw(10) << "horizon" << std::right << std::setw(12) << "MAE" << std::setw(12)
      << "MAPE(%)" << std::setw(12) << "RMSE" << std::setw(12) << "SMAPE(%)" << std::setw(10) << "skipped" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& h : report.horizons) {
    std::ostringstream label;
    label << h.horizon_minutes << " min";
    out << std::left << std::setw(10) << label.str() << std::right << std::setw(12) << h.metrics.mae << std::setw(12)
        << h.metrics.mape << std::setw(12) << h.metrics.rmse << std::setw(12) << h.metrics.smape << std::setw(10)
        << h.metrics.mape_skipped << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace stssl
