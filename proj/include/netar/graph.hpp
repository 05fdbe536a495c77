#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "netar/rng.hpp"

namespace netar {

// Fixed, symmetric, loop-free network with no isolated nodes.
class AdjacencyGraph {
  public:
    // Builds from an undirected edge list. Each pair may be listed once;
    // duplicates are removed and (i,j)/(j,i) are merged. Throws on
    // self-loops, out-of-range ids, or isolated nodes.
    static AdjacencyGraph build(const std::vector<std::pair<int, int>>& edge_pairs,
                                int n_nodes);

    int n_nodes() const { return static_cast<int>(nbrs_.size()); }
    int degree(int i) const { return static_cast<int>(nbrs_[i].size()); }
    const std::vector<int>& neighbors(int i) const { return nbrs_[i]; }
    std::size_t n_edges() const;
    int max_degree() const;

    Eigen::MatrixXd dense_adjacency() const;

  private:
    std::vector<std::vector<int>> nbrs_;  // sorted neighbor lists
};

using GraphPtr = std::shared_ptr<const AdjacencyGraph>;

// Row-normalized operator W with w_ij = a_ij / n_i. Matrix-free: products
// iterate the neighbor lists of the underlying graph.
class RowStochasticW {
  public:
    explicit RowStochasticW(GraphPtr graph);

    int n() const { return graph_->n_nodes(); }
    const AdjacencyGraph& graph() const { return *graph_; }
    GraphPtr graph_ptr() const { return graph_; }
    double inv_degree(int i) const { return inv_deg_[i]; }

    // (W x)_i = mean of x over the neighbors of i
    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    // (W^T x)_j = sum over i ~ j of x_i / n_i
    Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& x) const;

    Eigen::MatrixXd dense() const;

  private:
    GraphPtr graph_;
    std::vector<double> inv_deg_;
};

// Per-node neighbor sets: N_i, closed set N̄_i = N_i ∪ {i}, and the two-hop
// closure D_i = N̄_i ∪ {k : some j with a_ij a_jk != 0}.
struct NeighborhoodIndex {
    std::vector<std::vector<int>> closed;   // N̄_i, sorted
    std::vector<std::vector<int>> two_hop;  // D_i, sorted
};

NeighborhoodIndex neighborhoods(const AdjacencyGraph& graph);

// Stochastic-block-model draw. Nodes are split into n_blocks contiguous
// blocks of near-equal size; within-block pairs connect with p_in,
// cross-block pairs with p_out. A node left isolated is repaired by one
// edge to a random other node in its block (or anywhere if the block is a
// singleton).
AdjacencyGraph gen_block(int n_nodes, int n_blocks, double p_in, double p_out,
                         Rng& rng);

// Barabasi-Albert preferential attachment: complete seed on
// min(m_attach + 1, n_nodes) nodes, then each arriving node attaches
// m_attach edges to distinct existing nodes sampled proportional to degree.
AdjacencyGraph gen_powerlaw(int n_nodes, int m_attach, Rng& rng);

inline constexpr double kDefaultDeltaRho = 0.05;

// Throws unless |rho| <= 1 - delta_rho.
void check_rho(double rho, double delta_rho = kDefaultDeltaRho);

// Solves (I - rho W) y = r by Neumann fixed-point iteration
// y <- r + rho W y; converges geometrically since ||rho W||_inf = |rho| < 1.
Eigen::VectorXd solve_sar(const RowStochasticW& w, double rho,
                          const Eigen::VectorXd& r,
                          double delta_rho = kDefaultDeltaRho);

// Adjustment direction omega(rho) = (I - rho W^T)^{-1} 1_N.
Eigen::VectorXd omega(const RowStochasticW& w, double rho,
                      double delta_rho = kDefaultDeltaRho);

// Edge-list CSV with header "i,j", one undirected edge per row.
std::vector<std::pair<int, int>> read_edge_csv(const std::string& path);

}  // namespace netar
