#pragma once

// Chains on the communication graph, discrete degree, seeds and defects,
// integer first homology of the Rips 2-skeleton, and the cohomology class
// of a continuous state.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ghm/network.hpp"
#include "ghm/snf.hpp"
#include "ghm/state.hpp"

namespace ghm {

/// Integer 1-chain; terms keyed by canonical edge (i < j). Adding the
/// oriented edge (j, i) negates the coefficient.
class Chain1
{
  public:
    void add(NodeId from, NodeId to, long long coeff = 1);
    long long coeff(NodeId from, NodeId to) const;
    const std::map<Edge, long long>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    /// Boundary vanishes.
    bool is_cycle() const;
    /// Closed vertex sequence with +-1 coefficients, each edge used once.
    std::optional<std::vector<NodeId>> as_loop() const;
    bool is_loop() const { return as_loop().has_value(); }

    /// Closed walk x_0 -> x_1 -> ... -> x_{k-1} -> x_0.
    static Chain1 from_loop(std::span<const NodeId> vertices);

    Chain1& operator+=(const Chain1& other);
    Chain1& operator-=(const Chain1& other);
    Chain1 operator-() const;
    friend Chain1 operator+(Chain1 a, const Chain1& b) { return a += b; }
    friend Chain1 operator-(Chain1 a, const Chain1& b) { return a -= b; }
    friend Chain1 operator*(long long s, const Chain1& c);
    friend bool operator==(const Chain1&, const Chain1&) = default;

  private:
    std::map<Edge, long long> terms_;
};

/// Degree of a state on a cycle. Throws DiscontinuousOnCycle, or
/// NotNeighbors for a term that is not a network edge.
long long degree(const State& state, const Chain1& cycle, const Network& net);

/// Directed cycle of the successor digraph (x -> y iff y adjacent to x and
/// u(y) = u(x) + 1), found by DFS in ascending id order.
std::optional<std::vector<NodeId>> find_seed(const State& state, const Network& net);

/// Per node: index of its strongly connected component of the successor
/// digraph when that component has a cycle, else -1.
std::vector<int> seed_components(const State& state, const Network& net);

/// Per node: lies on some directed cycle of the successor digraph.
std::vector<char> seed_nodes(const State& state, const Network& net);

class H1Basis
{
  public:
    int rank() const { return static_cast<int>(cycles_.size()); }
    const std::vector<Chain1>& cycles() const { return cycles_; }
    /// Vertex sequences when the basis cycles are simple loops.
    const std::vector<std::vector<NodeId>>& loops() const { return loops_; }
    const std::vector<char>& tree_edge() const { return tree_edge_; }
    std::size_t node_count() const { return node_count_; }

    /// Z^g coordinates of a cycle. Throws NotACycle.
    std::vector<long long> coordinates(const Chain1& cycle) const;
    /// Throws NotACycle.
    bool is_null_homologous(const Chain1& cycle) const;

  private:
    friend H1Basis homology_basis(const Network& net);

    // Reduction of a non-tree edge's generator: 0 or +-(root index + 1).
    std::vector<std::int64_t> reduced_;
    std::vector<std::int32_t> edge_generator_;  // per edge, generator index or -1
    std::size_t root_count_ = 0;
    int smith_rank_ = 0;
    std::vector<BigInt> divisors_;
    BigMatrix u_;             // roots x roots, left transform of the relations
    BigMatrix coord_map_;     // g x roots: S^-1 * (rows rank.. of U)
    std::vector<Chain1> cycles_;
    std::vector<std::vector<NodeId>> loops_;
    std::vector<char> tree_edge_;
    std::vector<Edge> edges_;  // network edge list, for term lookup
    std::size_t node_count_ = 0;

    std::vector<BigInt> reduce(const Chain1& cycle) const;
};

/// Throws DisconnectedNetwork or TorsionDetected.
H1Basis homology_basis(const Network& net);

struct DefectReport
{
    /// Degree per basis cycle; empty where the state is discontinuous on it.
    std::vector<std::optional<long long>> degrees;
    std::vector<int> blocked_cycles;
    std::optional<std::vector<NodeId>> seed;
    bool seed_is_local = false;  // seed loop is null-homologous
    bool global_defect = false;  // some basis degree nonzero
    bool has_defect = false;
};

DefectReport find_defect(const State& state, const Network& net, const H1Basis& basis);

/// Degrees on the basis cycles. Throws DiscontinuousState.
std::vector<long long> cohomology_class(const State& state, const Network& net,
                                        const H1Basis& basis);

/// Pointwise sum of states with non-adjacent supports. Throws
/// OverlappingSupports. With a basis, additivity of the class is asserted.
State add_states(const State& a, const State& b, const Network& net,
                 const H1Basis* basis = nullptr);

}  // namespace ghm
