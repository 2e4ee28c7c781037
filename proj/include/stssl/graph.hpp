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
#ifndef STSSL_GRAPH_HPP
#define STSSL_GRAPH_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace stssl {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double cost = 0.0;
};

struct LambdaMaxEstimate {
  double value = 2.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// T_0(Γ) .. T_K(Γ) for the scaled Laplacian Γ, built with the three-term
/// recurrence. Immutable once built.
struct ChebyshevBasis {
  std::size_t order = 0;
  std::vector<Eigen::MatrixXd> matrices;

  std::size_t n_nodes() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
};

/// Undirected road graph with its Laplacian family.
struct TrafficGraph {
  std::size_t n_nodes = 0;
  // Source distance records; empty when the graph came from a dense adjacency.
  std::vector<Edge> edges;
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd laplacian;
  LambdaMaxEstimate lambda_max;
  Eigen::MatrixXd scaled_laplacian;

  // Builds L, λ_max and Γ from a valid adjacency (symmetric, nonnegative, zero diagonal).
  static TrafficGraph from_adjacency(const Eigen::MatrixXd& adjacency);
  static TrafficGraph from_edges(std::size_t n_nodes, std::vector<Edge> edges, double kernel_sigma,
                                 double threshold_eps);

  std::size_t edge_count() const;
};

// Standard deviation of the edge costs; falls back to the mean cost (then 1)
// when the costs are all equal.
double default_kernel_sigma(const std::vector<Edge>& edges);

// A[i,j] = exp(-cost^2 / sigma^2) when that is >= threshold_eps, symmetrized by max, zero diagonal.
Eigen::MatrixXd build_adjacency(std::size_t n_nodes, const std::vector<Edge>& edges, double kernel_sigma,
                                double threshold_eps);

void validate_adjacency(const Eigen::MatrixXd& adjacency);

// L = I - D^{-1/2} A D^{-1/2}; isolated nodes keep an identity row.
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& adjacency);

// Rayleigh-quotient power iteration; falls back to 2 when it does not converge.
LambdaMaxEstimate power_iteration_lambda_max(const Eigen::MatrixXd& laplacian, double tol = 1e-6,
                                             std::size_t max_iters = 1000);

// Γ = 2L / λ_max - I
Eigen::MatrixXd scaled_laplacian(const Eigen::MatrixXd& laplacian, double lambda_max);

ChebyshevBasis chebyshev_basis(const Eigen::MatrixXd& gamma, std::size_t order);

// Graph file formats.
std::vector<Edge> read_edge_list(const std::string& path, std::size_t n_nodes);
std::vector<Edge> parse_edge_list(std::istream& in, std::size_t n_nodes, const std::string& source);
void write_edge_list(const std::string& path, const std::vector<Edge>& edges);
Eigen::MatrixXd read_dense_matrix(const std::string& path, std::size_t n_nodes);
void write_dense_matrix(const std::string& path, const Eigen::MatrixXd& matrix);

}  // namespace stssl

#endif  // STSSL_GRAPH_HPP
