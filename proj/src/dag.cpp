#include "semlearn/dag.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "semlearn/errors.hpp"

namespace semlearn {

std::vector<std::vector<int>> Dag::parents() const {
  std::vector<std::vector<int>> out(p);
  for (const auto& [i, j] : edges) out[i].push_back(j);
  return out;
}

std::vector<std::vector<int>> Dag::children() const {
  std::vector<std::vector<int>> out(p);
  for (const auto& [i, j] : edges) out[j].push_back(i);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<int> Dag::terminals() const {
  std::vector<char> has_child(p, 0);
  for (const auto& [i, j] : edges) has_child[j] = 1;
  std::vector<int> out;
  for (int v = 0; v < p; ++v)
    if (!has_child[v]) out.push_back(v);
  return out;
}

int Dag::neighbor_count(int v) const {
  int c = 0;
  for (const auto& [i, j] : edges) c += (i == v || j == v);
  return c;
}

std::optional<std::vector<int>> topological_order(int p, const EdgeSet& edges) {
  // Parents must precede children: in-degree counts parents.
  std::vector<int> indeg(p, 0);
  std::vector<std::vector<int>> children(p);
  for (const auto& [i, j] : edges) {
    ++indeg[i];
    children[j].push_back(i);
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < p; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(p);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v])
      if (--indeg[c] == 0) ready.push(c);
  }
  if (static_cast<int>(order.size()) != p) return std::nullopt;
  return order;
}

namespace {

// Walks parent links from a vertex known to lie on a cycle and renders the
// cycle with 1-based labels (matching the file-format convention).
std::string describe_cycle(int p, const EdgeSet& edges) {
  std::vector<std::vector<int>> parents(p);
  for (const auto& [i, j] : edges) parents[i].push_back(j);

  // Find a vertex still in a cycle: strip sources repeatedly.
  std::vector<int> indeg(p, 0);
  std::vector<std::vector<int>> children(p);
  for (const auto& [i, j] : edges) {
    ++indeg[i];
    children[j].push_back(i);
  }
  std::queue<int> q;
  for (int v = 0; v < p; ++v)
    if (indeg[v] == 0) q.push(v);
  std::vector<char> removed(p, 0);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    removed[v] = 1;
    for (int c : children[v])
      if (--indeg[c] == 0) q.push(c);
  }
  int start = 0;
  while (start < p && removed[start]) ++start;

  // Follow any not-removed parent until the walk revisits a vertex.
  std::vector<int> seen_at(p, -1);
  std::vector<int> walk;
  int cur = start;
  while (seen_at[cur] < 0) {
    seen_at[cur] = static_cast<int>(walk.size());
    walk.push_back(cur);
    for (int par : parents[cur])
      if (!removed[par]) {
        cur = par;
        break;
      }
  }
  std::string msg = "cycle ";
  for (size_t k = seen_at[cur]; k < walk.size(); ++k)
    msg += std::to_string(walk[k] + 1) + " <- ";
  msg += std::to_string(cur + 1);
  return msg;
}

}  // namespace

Dag validate_dag(int p, const EdgeSet& edges) {
  if (p < 1) throw Error(ErrorCode::invalid_params, "vertex count must be >= 1");
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= p || j < 0 || j >= p)
      throw Error(ErrorCode::invalid_vertex,
                  "edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                      ") out of range for p = " + std::to_string(p));
    if (i == j)
      throw Error(ErrorCode::invalid_vertex,
                  "self-loop at vertex " + std::to_string(i + 1));
  }
  if (!topological_order(p, edges))
    throw Error(ErrorCode::cycle_detected, describe_cycle(p, edges));
  return Dag{p, edges, std::nullopt};
}

bool is_topological_order(const Dag& dag, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != dag.p) return false;
  std::vector<int> pos(dag.p, -1);
  for (int k = 0; k < dag.p; ++k) {
    if (order[k] < 0 || order[k] >= dag.p || pos[order[k]] >= 0) return false;
    pos[order[k]] = k;
  }
  for (const auto& [i, j] : dag.edges)
    if (pos[j] > pos[i]) return false;
  return true;
}

}  // namespace semlearn
