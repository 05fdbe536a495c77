#include "netar/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netar {

AdjacencyGraph AdjacencyGraph::build(
    const std::vector<std::pair<int, int>>& edge_pairs, int n_nodes) {
    if (n_nodes <= 0) throw std::invalid_argument("graph: n_nodes must be positive");
    std::vector<std::set<int>> adj(n_nodes);
    for (const auto& [i, j] : edge_pairs) {
        if (i < 0 || i >= n_nodes || j < 0 || j >= n_nodes)
            throw std::invalid_argument("graph: edge (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") out of range");
        if (i == j)
            throw std::invalid_argument("graph: self-loop at node " + std::to_string(i));
        adj[i].insert(j);
        adj[j].insert(i);
    }
    AdjacencyGraph g;
    g.nbrs_.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        if (adj[i].empty())
            throw std::invalid_argument("graph: isolated node " + std::to_string(i));
        g.nbrs_[i].assign(adj[i].begin(), adj[i].end());
    }
    return g;
}

std::size_t AdjacencyGraph::n_edges() const {
    std::size_t twice = 0;
    for (const auto& v : nbrs_) twice += v.size();
    return twice / 2;
}

int AdjacencyGraph::max_degree() const {
    int m = 0;
    for (const auto& v : nbrs_) m = std::max(m, static_cast<int>(v.size()));
    return m;
}

Eigen::MatrixXd AdjacencyGraph::dense_adjacency() const {
    const int n = n_nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j : nbrs_[i]) a(i, j) = 1.0;
    return a;
}

RowStochasticW::RowStochasticW(GraphPtr graph) : graph_(std::move(graph)) {
    const int n = graph_->n_nodes();
    inv_deg_.resize(n);
    for (int i = 0; i < n; ++i) inv_deg_[i] = 1.0 / graph_->degree(i);
}

Eigen::VectorXd RowStochasticW::multiply(const Eigen::VectorXd& x) const {
    const int n = this->n();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j : graph_->neighbors(i)) s += x[j];
        out[i] = s * inv_deg_[i];
    }
    return out;
}

Eigen::VectorXd RowStochasticW::multiply_transpose(const Eigen::VectorXd& x) const {
    const int n = this->n();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const double xi = x[i] * inv_deg_[i];
        for (int j : graph_->neighbors(i)) out[j] += xi;
    }
    return out;
}

Eigen::MatrixXd RowStochasticW::dense() const {
    const int n = this->n();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j : graph_->neighbors(i)) w(i, j) = inv_deg_[i];
    return w;
}

NeighborhoodIndex neighborhoods(const AdjacencyGraph& graph) {
    const int n = graph.n_nodes();
    NeighborhoodIndex idx;
    idx.closed.resize(n);
    idx.two_hop.resize(n);
    for (int i = 0; i < n; ++i) {
        std::set<int> closed(graph.neighbors(i).begin(), graph.neighbors(i).end());
        closed.insert(i);
        std::set<int> two = closed;
        for (int j : graph.neighbors(i))
            for (int k : graph.neighbors(j)) two.insert(k);
        idx.closed[i].assign(closed.begin(), closed.end());
        idx.two_hop[i].assign(two.begin(), two.end());
    }
    return idx;
}

AdjacencyGraph gen_block(int n_nodes, int n_blocks, double p_in, double p_out,
                         Rng& rng) {
    if (n_blocks <= 0 || n_blocks > n_nodes)
        throw std::invalid_argument("gen_block: need 1 <= n_blocks <= n_nodes");
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
        throw std::invalid_argument("gen_block: need 0 <= p_out <= p_in <= 1");

    // contiguous blocks with sizes differing by at most one
    std::vector<int> block_of(n_nodes);
    std::vector<std::vector<int>> members(n_blocks);
    const int base = n_nodes / n_blocks, extra = n_nodes % n_blocks;
    int node = 0;
    for (int b = 0; b < n_blocks; ++b) {
        const int sz = base + (b < extra ? 1 : 0);
        for (int s = 0; s < sz; ++s) {
            block_of[node] = b;
            members[b].push_back(node);
            ++node;
        }
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n_nodes; ++i)
        for (int j = i + 1; j < n_nodes; ++j) {
            const double p = (block_of[i] == block_of[j]) ? p_in : p_out;
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }

    std::vector<int> deg(n_nodes, 0);
    for (const auto& [i, j] : edges) {
        ++deg[i];
        ++deg[j];
    }
    for (int i = 0; i < n_nodes; ++i) {
        if (deg[i] > 0) continue;
        const auto& blk = members[block_of[i]];
        int j = i;
        if (blk.size() > 1) {
            while (j == i) j = blk[rng.uniform_int(static_cast<int>(blk.size()))];
        } else {
            while (j == i) j = rng.uniform_int(n_nodes);
        }
        edges.emplace_back(i, j);
        ++deg[i];
        ++deg[j];
    }
    return AdjacencyGraph::build(edges, n_nodes);
}

AdjacencyGraph gen_powerlaw(int n_nodes, int m_attach, Rng& rng) {
    if (m_attach < 1 || m_attach >= n_nodes)
        throw std::invalid_argument("gen_powerlaw: need 1 <= m_attach < n_nodes");
    const int seed = std::min(m_attach + 1, n_nodes);
    std::vector<std::pair<int, int>> edges;
    std::vector<int> endpoints;  // every edge contributes both endpoints
    for (int i = 0; i < seed; ++i)
        for (int j = i + 1; j < seed; ++j) {
            edges.emplace_back(i, j);
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    for (int t = seed; t < n_nodes; ++t) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < m_attach)
            targets.insert(endpoints[rng.uniform_int(static_cast<int>(endpoints.size()))]);
        for (int j : targets) {
            edges.emplace_back(t, j);
            endpoints.push_back(t);
            endpoints.push_back(j);
        }
    }
    return AdjacencyGraph::build(edges, n_nodes);
}

void check_rho(double rho, double delta_rho) {
    if (!(std::abs(rho) <= 1.0 - delta_rho))
        throw std::invalid_argument(
            "rho = " + std::to_string(rho) +
            " violates stationarity: need |rho| <= " + std::to_string(1.0 - delta_rho));
}

namespace {

// shared fixed-point loop for (I - rho M) y = r with M in {W, W^T}
Eigen::VectorXd neumann_solve(const RowStochasticW& w, double rho,
                              const Eigen::VectorXd& r, bool transpose) {
    constexpr double kTol = 1e-12;
    const double r_norm = r.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd y = r;
    if (rho == 0.0) return y;
    const int cap = static_cast<int>(
        std::ceil(10.0 * std::log(kTol) / std::log(std::abs(rho)))) + 2;
    for (int it = 0; it < cap; ++it) {
        Eigen::VectorXd wy = transpose ? w.multiply_transpose(y) : w.multiply(y);
        Eigen::VectorXd y_next = r + rho * wy;
        const double delta = (y_next - y).lpNorm<Eigen::Infinity>();
        y = std::move(y_next);
        if (delta <= kTol * (1.0 + r_norm)) {
            // verify residual at the spec tolerance
            Eigen::VectorXd my = transpose ? w.multiply_transpose(y) : w.multiply(y);
            const double resid = (y - rho * my - r).lpNorm<Eigen::Infinity>();
            if (resid <= 1e-10 * (1.0 + r_norm)) return y;
        }
    }
    throw std::runtime_error("solve_sar: Neumann iteration did not converge");
}

}  // namespace

Eigen::VectorXd solve_sar(const RowStochasticW& w, double rho,
                          const Eigen::VectorXd& r, double delta_rho) {
    check_rho(rho, delta_rho);
    return neumann_solve(w, rho, r, /*transpose=*/false);
}

Eigen::VectorXd omega(const RowStochasticW& w, double rho, double delta_rho) {
    check_rho(rho, delta_rho);
    return neumann_solve(w, rho, Eigen::VectorXd::Ones(w.n()), /*transpose=*/true);
}

std::vector<std::pair<int, int>> read_edge_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("edge file is empty: " + path);
    // header must be "i,j"
    {
        std::string h = line;
        h.erase(std::remove_if(h.begin(), h.end(),
                               [](char c) { return c == ' ' || c == '\r'; }),
                h.end());
        if (h != "i,j")
            throw std::runtime_error("edge file " + path + ": expected header 'i,j', got '" +
                                     line + "'");
    }
    std::vector<std::pair<int, int>> edges;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error("edge file " + path + ": malformed row " +
                                     std::to_string(row));
        try {
            edges.emplace_back(std::stoi(a), std::stoi(b));
        } catch (const std::exception&) {
            throw std::runtime_error("edge file " + path + ": non-integer id at row " +
                                     std::to_string(row));
        }
    }
    return edges;
}

}  // namespace netar
