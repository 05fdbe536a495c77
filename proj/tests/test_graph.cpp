#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "netar/graph.hpp"

using namespace netar;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GraphPtr make(const std::vector<std::pair<int, int>>& edges, int n) {
    return std::make_shared<const AdjacencyGraph>(AdjacencyGraph::build(edges, n));
}

GraphPtr ring(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return make(edges, n);
}

GraphPtr random_graph(int n, double p, Rng& rng) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);
    // ensure no isolated nodes: chain fallback
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return make(edges, n);
}

}  // namespace

TEST_CASE("build_graph: path degrees and rejections") {
    const auto g = make({{0, 1}, {1, 2}}, 3);
    CHECK(g->degree(0) == 1);
    CHECK(g->degree(1) == 2);
    CHECK(g->degree(2) == 1);
    CHECK(g->n_edges() == 2);
    CHECK_THROWS(AdjacencyGraph::build({{0, 0}}, 2));          // self-loop
    CHECK_THROWS(AdjacencyGraph::build({{0, 1}}, 3));          // node 2 isolated
    CHECK_THROWS(AdjacencyGraph::build({{0, 5}}, 3));          // out of range
    // duplicates and reversed pairs merge
    const auto h = make({{0, 1}, {1, 0}, {0, 1}, {1, 2}}, 3);
    CHECK(h->n_edges() == 2);
}

TEST_CASE("row_normalize on path, K3, and star") {
    const auto path = make({{0, 1}, {1, 2}}, 3);
    RowStochasticW w(path);
    const MatrixXd d = w.dense();
    CHECK(d(1, 0) == doctest::Approx(0.5));
    CHECK(d(1, 1) == doctest::Approx(0.0));
    CHECK(d(1, 2) == doctest::Approx(0.5));

    const auto k3 = make({{0, 1}, {1, 2}, {0, 2}}, 3);
    const MatrixXd dk = RowStochasticW(k3).dense();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(dk(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));

    const auto star = make({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
    const MatrixXd ds = RowStochasticW(star).dense();
    for (int l = 1; l <= 4; ++l) {
        CHECK(ds(0, l) == doctest::Approx(0.25));
        CHECK(ds(l, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("W row sums are exactly one and multiply matches dense") {
    Rng rng(314);
    const auto g = random_graph(40, 0.1, rng);
    RowStochasticW w(g);
    const VectorXd ones = VectorXd::Ones(40);
    CHECK((w.multiply(ones) - ones).lpNorm<Eigen::Infinity>() < 1e-12);
    VectorXd x(40);
    for (int i = 0; i < 40; ++i) x[i] = rng.normal();
    const MatrixXd d = w.dense();
    CHECK((w.multiply(x) - d * x).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((w.multiply_transpose(x) - d.transpose() * x).lpNorm<Eigen::Infinity>() <
          1e-12);
}

TEST_CASE("neighborhoods: trivial sets and the six-ring") {
    const auto path = make({{0, 1}, {1, 2}}, 3);
    const auto idx = neighborhoods(*path);
    CHECK(idx.two_hop[0] == std::vector<int>{0, 1, 2});
    const auto k3 = make({{0, 1}, {1, 2}, {0, 2}}, 3);
    const auto idx3 = neighborhoods(*k3);
    for (int i = 0; i < 3; ++i) CHECK(idx3.two_hop[i] == std::vector<int>{0, 1, 2});
    const auto r6 = ring(6);
    const auto idx6 = neighborhoods(*r6);
    CHECK(idx6.two_hop[0] == std::vector<int>{0, 1, 2, 4, 5});
    CHECK(idx6.closed[0] == std::vector<int>{0, 1, 5});
}

TEST_CASE("neighborhoods equal the boolean matrix-product oracle") {
    Rng rng(2718);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 20 + 15 * trial;
        const auto g = random_graph(n, 0.07, rng);
        const auto idx = neighborhoods(*g);
        const MatrixXd a = g->dense_adjacency();
        const MatrixXd a2 = a * a;
        for (int i = 0; i < n; ++i) {
            std::vector<int> expect;
            for (int k = 0; k < n; ++k)
                if (k == i || a(i, k) != 0.0 || a2(i, k) != 0.0) expect.push_back(k);
            CHECK(idx.two_hop[i] == expect);
        }
    }
}

TEST_CASE("gen_block: complete single block, determinism, mean degree") {
    Rng rng(1);
    const auto k10 = gen_block(10, 1, 1.0, 0.0, rng);
    CHECK(k10.n_edges() == 45);
    for (int i = 0; i < 10; ++i) CHECK(k10.degree(i) == 9);

    Rng r1(77), r2(77);
    const auto a = gen_block(100, 5, 0.2, 0.01, r1);
    const auto b = gen_block(100, 5, 0.2, 0.01, r2);
    CHECK(a.n_edges() == b.n_edges());
    for (int i = 0; i < 100; ++i) CHECK(a.neighbors(i) == b.neighbors(i));

    CHECK_THROWS(gen_block(3, 5, 0.5, 0.1, rng));  // more blocks than nodes

    // Expected mean degree of (N=400, K=20, p_in=0.3, p_out=0.3/N):
    // (block size - 1) p_in + (N - block size) p_out
    //   = 19*0.3 + 380*0.00075 = 5.985.
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        Rng r(1000 + s);
        const auto g = gen_block(400, 20, 0.3, 0.3 / 400, r);
        total += 2.0 * static_cast<double>(g.n_edges()) / 400.0;
    }
    CHECK(total / seeds == doctest::Approx(5.985).epsilon(0.05));
}

TEST_CASE("gen_powerlaw: saturated seed, edge count, heavy tail") {
    Rng rng(3);
    const auto k5 = gen_powerlaw(5, 4, rng);
    CHECK(k5.n_edges() == 10);  // complete seed only

    // Construction bookkeeping: complete seed on m+1 = 3 nodes (3 edges)
    // plus m = 2 edges for each of the N - (m+1) arrivals.
    Rng r2(4);
    const auto ba = gen_powerlaw(1000, 2, r2);
    CHECK(ba.n_edges() == 3 + 2 * (1000 - 3));

    // heavier tail than a block model with the same mean degree (~4)
    double ba_max = 0.0, block_max = 0.0;
    for (int s = 0; s < 40; ++s) {
        Rng ra(500 + s), rb(900 + s);
        ba_max += gen_powerlaw(200, 2, ra).max_degree();
        block_max += gen_block(200, 10, 4.0 / 19.0, 0.0, rb).max_degree();
    }
    CHECK(ba_max > block_max);
}

TEST_CASE("omega: identity, sum identity, dense oracle") {
    const auto r4 = ring(4);
    RowStochasticW w(r4);
    CHECK((omega(w, 0.0) - VectorXd::Ones(4)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(omega(w, 0.5).sum() == doctest::Approx(8.0).epsilon(1e-10));

    const MatrixXd dense =
        (MatrixXd::Identity(4, 4) - 0.4 * w.dense().transpose());
    const VectorXd direct = dense.fullPivLu().solve(VectorXd::Ones(4));
    CHECK((omega(w, 0.4) - direct).lpNorm<Eigen::Infinity>() < 1e-10);

    CHECK_THROWS(omega(w, 0.97));
    CHECK_THROWS(omega(w, -0.96));
}

TEST_CASE("omega positivity and sum identity on random graphs") {
    Rng rng(12);
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 15 + 10 * trial;
        const auto g = random_graph(n, 0.1, rng);
        RowStochasticW w(g);
        for (double rho : {0.0, 0.3, 0.7, 0.95, -0.5}) {
            const VectorXd om = omega(w, rho);
            CHECK(std::abs(om.sum() - n / (1.0 - rho)) <
                  1e-10 * std::abs(n / (1.0 - rho)));
            if (rho >= 0.0)
                for (int i = 0; i < n; ++i) CHECK(om[i] >= 1.0 - 1e-12);
        }
    }
}

TEST_CASE("solve_sar: trivial cases, dense and truncated-Neumann oracles") {
    Rng rng(21);
    const auto g = random_graph(10, 0.25, rng);
    RowStochasticW w(g);
    VectorXd r(10);
    for (int i = 0; i < 10; ++i) r[i] = rng.normal();

    CHECK((solve_sar(w, 0.0, r) - r).lpNorm<Eigen::Infinity>() == 0.0);
    const VectorXd ones = VectorXd::Ones(10);
    CHECK((solve_sar(w, 0.6, ones) - ones / 0.4).lpNorm<Eigen::Infinity>() < 1e-10);

    const double rho = 0.7;
    const MatrixXd dense = MatrixXd::Identity(10, 10) - rho * w.dense();
    const VectorXd direct = dense.fullPivLu().solve(r);
    const VectorXd y = solve_sar(w, rho, r);
    CHECK((y - direct).lpNorm<Eigen::Infinity>() < 1e-8);

    // truncated Neumann partial sum obeys the geometric tail bound
    const int big_k = 40;
    VectorXd partial = r, term = r;
    for (int k = 1; k <= big_k; ++k) {
        term = rho * w.multiply(term);
        partial += term;
    }
    const double bound = r.lpNorm<Eigen::Infinity>() * std::pow(rho, big_k + 1) /
                         (1.0 - rho);
    CHECK((y - partial).lpNorm<Eigen::Infinity>() <= bound + 1e-10);
}

TEST_CASE("solve_sar and omega match dense solves across sizes up to 50") {
    Rng rng(55);
    for (int n : {5, 17, 33, 50}) {
        const auto g = random_graph(n, 0.15, rng);
        RowStochasticW w(g);
        VectorXd r(n);
        for (int i = 0; i < n; ++i) r[i] = rng.uniform(-2.0, 2.0);
        for (double rho : {-0.8, -0.2, 0.45, 0.9}) {
            const MatrixXd m = MatrixXd::Identity(n, n) - rho * w.dense();
            CHECK((solve_sar(w, rho, r) - m.fullPivLu().solve(r))
                      .lpNorm<Eigen::Infinity>() < 1e-8);
            CHECK((omega(w, rho) -
                   m.transpose().fullPivLu().solve(VectorXd::Ones(n)))
                      .lpNorm<Eigen::Infinity>() < 1e-8);
        }
    }
}

TEST_CASE("read_edge_csv round trip and header validation") {
    const std::string path = "test_edges_tmp.csv";
    {
        std::ofstream out(path);
        out << "i,j\n0,1\n1,2\n2,0\n";
    }
    const auto pairs = read_edge_csv(path);
    REQUIRE(pairs.size() == 3);
    const auto g = make(pairs, 3);
    CHECK(g->degree(0) == 2);
    {
        std::ofstream out(path);
        out << "a,b\n0,1\n";
    }
    CHECK_THROWS(read_edge_csv(path));
    std::remove(path.c_str());
}
