#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace semlearn {

// Directed edge (i, j) encodes i <- j: j is a parent of i and B(i, j) holds
// the weight. Vertices are 0-based inside the library; file formats use
// 1-based labels and the io layer converts.
using Edge = std::pair<int, int>;
using EdgeSet = std::set<Edge>;

struct Dag {
  int p = 0;
  EdgeSet edges;
  // Set when the graph was generated under a neighbor-count cap.
  std::optional<int> degree_bound;

  std::vector<std::vector<int>> parents() const;
  std::vector<std::vector<int>> children() const;
  // Vertices with no children (sinks).
  std::vector<int> terminals() const;
  int neighbor_count(int v) const;
};

// Checks vertex ranges, rejects self-loops and duplicate-free (set) input is
// implied; rejects cycles naming one offending cycle in the message.
Dag validate_dag(int p, const EdgeSet& edges);

// Deterministic topological order (Kahn, lowest index first) where parents
// precede children, or nullopt when a cycle exists.
std::optional<std::vector<int>> topological_order(int p, const EdgeSet& edges);

// True when `order` is a permutation of [0, p) with every parent before its
// children.
bool is_topological_order(const Dag& dag, const std::vector<int>& order);

}  // namespace semlearn
