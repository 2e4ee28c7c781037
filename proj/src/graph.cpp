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
#include "stssl/graph.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "stssl/errors.hpp"
#include "stssl/text_io.hpp"

namespace stssl {

TrafficGraph TrafficGraph::from_adjacency(const Eigen::MatrixXd& adjacency) {
  validate_adjacency(adjacency);
  TrafficGraph g;
  g.n_nodes = static_cast<std::size_t>(adjacency.rows());
  g.adjacency = adjacency;
  g.laplacian = normalized_laplacian(adjacency);
  g.lambda_max = power_iteration_lambda_max(g.laplacian);
  g.scaled_laplacian = stssl::scaled_laplacian(g.laplacian, g.lambda_max.value);
  return g;
}

TrafficGraph TrafficGraph::from_edges(std::size_t n_nodes, std::vector<Edge> edges, double kernel_sigma,
                                      double threshold_eps) {
  TrafficGraph g = from_adjacency(build_adjacency(n_nodes, edges, kernel_sigma, threshold_eps));
  g.edges = std::move(edges);
  return g;
}

std::size_t TrafficGraph::edge_count() const {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j) count += adjacency(i, j) > 0.0 ? 1 : 0;
  }
  return count;
}

double default_kernel_sigma(const std::vector<Edge>& edges) {
  if (edges.empty()) return 1.0;
  double mean = 0.0;
  for (const auto& e : edges) mean += e.cost;
  mean /= static_cast<double>(edges.size());
  double var = 0.0;
  for (const auto& e : edges) var += (e.cost - mean) * (e.cost - mean);
  const double sd = std::sqrt(var / static_cast<double>(edges.size()));
  if (sd > 0.0) return sd;
  return mean > 0.0 ? mean : 1.0;
}

Eigen::MatrixXd build_adjacency(std::size_t n_nodes, const std::vector<Edge>& edges, double kernel_sigma,
                                double threshold_eps) {
  if (!(kernel_sigma > 0.0)) throw ConfigError("kernel sigma must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_nodes), static_cast<Eigen::Index>(n_nodes));
  for (std::size_t row = 0; row < edges.size(); ++row) {
    const Edge& e = edges[row];
    if (e.from >= n_nodes || e.to >= n_nodes) {
      throw IngestionError("edge row " + std::to_string(row + 1) + " (" + std::to_string(e.from) + "," +
                           std::to_string(e.to) + ") references a node outside [0, " + std::to_string(n_nodes) +
                           ")");
    }
    if (!(e.cost >= 0.0)) {
      throw IngestionError("edge row " + std::to_string(row + 1) + " has negative cost");
    }
    if (e.from == e.to) continue;
    const double w = std::exp(-(e.cost * e.cost) / (kernel_sigma * kernel_sigma));
    if (w < threshold_eps) continue;
    const auto i = static_cast<Eigen::Index>(e.from);
    const auto j = static_cast<Eigen::Index>(e.to);
    a(i, j) = std::max(a(i, j), w);
    a(j, i) = std::max(a(j, i), w);
  }
  return a;
}

void validate_adjacency(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("adjacency must be square");
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) throw ContractError("adjacency diagonal must be zero (node " + std::to_string(i) + ")");
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (!(a(i, j) >= 0.0) || !std::isfinite(a(i, j))) {
        throw ContractError("adjacency entries must be finite and nonnegative");
      }
      if (a(i, j) != a(j, i)) {
        throw ContractError("adjacency is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& a) {
  validate_adjacency(a);
  const Eigen::Index n = a.rows();
  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = a.row(i).sum();
    inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Same expression for (i,j) and (j,i) keeps L exactly symmetric.
      if (a(i, j) != 0.0) l(i, j) -= (inv_sqrt_deg(i) * inv_sqrt_deg(j)) * a(i, j);
    }
  }
  return l;
}

LambdaMaxEstimate power_iteration_lambda_max(const Eigen::MatrixXd& laplacian, double tol, std::size_t max_iters) {
  if (laplacian.rows() != laplacian.cols()) throw DimensionError("power iteration needs a square matrix");
  LambdaMaxEstimate est;
  const Eigen::Index n = laplacian.rows();
  if (n == 0) return est;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 12.9898 * static_cast<double>(i));
  v.normalize();
  // Converged once the eigen-residual |Lv - rv| drops below tol; the
  // Rayleigh quotient r is then accurate to O(tol^2 / gap).
  for (std::size_t it = 1; it <= max_iters; ++it) {
    const Eigen::VectorXd w = laplacian * v;
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    est.iterations = it;
    if (norm == 0.0) break;
    if ((w - rayleigh * v).norm() <= tol) {
      if (rayleigh > 0.0) {
        est.value = rayleigh;
        est.converged = true;
        return est;
      }
      break;
    }
    v = w / norm;
  }
  est.value = 2.0;
  est.converged = false;
  return est;
}

Eigen::MatrixXd scaled_laplacian(const Eigen::MatrixXd& laplacian, double lambda_max) {
  if (!(lambda_max > 0.0)) throw ContractError("lambda_max must be positive");
  const Eigen::Index n = laplacian.rows();
  return (2.0 / lambda_max) * laplacian - Eigen::MatrixXd::Identity(n, n);
}

ChebyshevBasis chebyshev_basis(const Eigen::MatrixXd& gamma, std::size_t order) {
  if (gamma.rows() != gamma.cols()) throw DimensionError("Chebyshev basis needs a square matrix");
  ChebyshevBasis basis;
  basis.order = order;
  const Eigen::Index n = gamma.rows();
  basis.matrices.push_back(Eigen::MatrixXd::Identity(n, n));
  if (order >= 1) basis.matrices.push_back(gamma);
  for (std::size_t k = 2; k <= order; ++k) {
    basis.matrices.push_back(2.0 * gamma * basis.matrices[k - 1] - basis.matrices[k - 2]);
  }
  return basis;
}

std::vector<Edge> parse_edge_list(std::istream& in, std::size_t n_nodes, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(source + ": empty edge list");
  const auto header = split_csv_line(line);
  if (header.size() != 3 || header[0] != "from" || header[1] != "to" || header[2] != "cost") {
    throw IngestionError(source + ": edge list header must be 'from,to,cost'");
  }
  std::vector<Edge> edges;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) {
      throw IngestionError(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " columns, expected 3");
    }
    const double from = parse_cell(cells[0], source, row, 1);
    const double to = parse_cell(cells[1], source, row, 2);
    const double cost = parse_cell(cells[2], source, row, 3);
    if (from < 0 || to < 0 || from != std::floor(from) || to != std::floor(to) ||
        from >= static_cast<double>(n_nodes) || to >= static_cast<double>(n_nodes)) {
      throw IngestionError(source + ": row " + std::to_string(row) + " node id out of range [0, " +
                           std::to_string(n_nodes) + "): " + line);
    }
    if (!(cost >= 0.0)) throw IngestionError(source + ": row " + std::to_string(row) + " has negative cost");
    edges.push_back({static_cast<std::size_t>(from), static_cast<std::size_t>(to), cost});
  }
  return edges;
}

std::vector<Edge> read_edge_list(const std::string& path, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open edge list '" + path + "'");
  return parse_edge_list(in, n_nodes, path);
}

void write_edge_list(const std::string& path, const std::vector<Edge>& edges) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << "from,to,cost\n" << std::setprecision(17);
  for (const auto& e : edges) out << e.from << ',' << e.to << ',' << e.cost << '\n';
}

Eigen::MatrixXd read_dense_matrix(const std::string& path, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open adjacency '" + path + "'");
  const auto n = static_cast<Eigen::Index>(n_nodes);
  Eigen::MatrixXd a(n, n);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    if (row > n_nodes) throw IngestionError(path + ": more than " + std::to_string(n_nodes) + " rows");
    const auto cells = split_csv_line(line);
    if (cells.size() != n_nodes) {
      throw IngestionError(path + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " columns, expected " + std::to_string(n_nodes));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      a(static_cast<Eigen::Index>(row - 1), static_cast<Eigen::Index>(c)) = parse_cell(cells[c], path, row, c + 1);
    }
  }
  if (row != n_nodes) {
    throw IngestionError(path + ": expected " + std::to_string(n_nodes) + " rows, found " + std::to_string(row));
  }
  return a;
}

void write_dense_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace stssl
