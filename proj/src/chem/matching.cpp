// SPDX-License-Identifier: Apache-2.0
#include "matching.hpp"

#include <algorithm>
#include <queue>

namespace osc::chem::detail {
namespace {

class Blossom {
 public:
  Blossom(int n, const std::vector<std::pair<int, int>>& edges)
      : n_(n), adj_(static_cast<std::size_t>(n)), mate_(static_cast<std::size_t>(n), -1) {
    for (auto [u, v] : edges) {
      adj_[static_cast<std::size_t>(u)].push_back(v);
      adj_[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
  }

  std::vector<int> solve() {
    // Greedy seed keeps the search short on alternating ring systems.
    for (int v = 0; v < n_; ++v) {
      if (mate(v) != -1) continue;
      for (int u : adj_[static_cast<std::size_t>(v)]) {
        if (mate(u) == -1) {
          mate_[static_cast<std::size_t>(v)] = u;
          mate_[static_cast<std::size_t>(u)] = v;
          break;
        }
      }
    }
    for (int v = 0; v < n_; ++v) {
      if (mate(v) == -1) {
        const int end = find_path(v);
        if (end != -1) augment(end);
      }
    }
    return mate_;
  }

 private:
  int mate(int v) const { return mate_[static_cast<std::size_t>(v)]; }

  int lca(int a, int b) {
    std::vector<bool> used(static_cast<std::size_t>(n_), false);
    while (true) {
      a = base_[static_cast<std::size_t>(a)];
      used[static_cast<std::size_t>(a)] = true;
      if (mate(a) == -1) break;
      a = parent_[static_cast<std::size_t>(mate(a))];
    }
    while (true) {
      b = base_[static_cast<std::size_t>(b)];
      if (used[static_cast<std::size_t>(b)]) return b;
      b = parent_[static_cast<std::size_t>(mate(b))];
    }
  }

  void mark_path(int v, int b, int child, std::vector<bool>& in_blossom) {
    while (base_[static_cast<std::size_t>(v)] != b) {
      in_blossom[static_cast<std::size_t>(base_[static_cast<std::size_t>(v)])] = true;
      in_blossom[static_cast<std::size_t>(base_[static_cast<std::size_t>(mate(v))])] = true;
      parent_[static_cast<std::size_t>(v)] = child;
      child = mate(v);
      v = parent_[static_cast<std::size_t>(mate(v))];
    }
  }

  int find_path(int root) {
    const auto n = static_cast<std::size_t>(n_);
    used_.assign(n, false);
    parent_.assign(n, -1);
    base_.resize(n);
    for (std::size_t i = 0; i < n; ++i) base_[i] = static_cast<int>(i);
    used_[static_cast<std::size_t>(root)] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int to : adj_[static_cast<std::size_t>(v)]) {
        if (base_[static_cast<std::size_t>(v)] == base_[static_cast<std::size_t>(to)] || mate(v) == to) {
          continue;
        }
        if (to == root || (mate(to) != -1 && parent_[static_cast<std::size_t>(mate(to))] != -1)) {
          const int cur = lca(v, to);
          std::vector<bool> in_blossom(n, false);
          mark_path(v, cur, to, in_blossom);
          mark_path(to, cur, v, in_blossom);
          for (std::size_t i = 0; i < n; ++i) {
            if (in_blossom[static_cast<std::size_t>(base_[i])]) {
              base_[i] = cur;
              if (!used_[i]) {
                used_[i] = true;
                q.push(static_cast<int>(i));
              }
            }
          }
        } else if (parent_[static_cast<std::size_t>(to)] == -1) {
          parent_[static_cast<std::size_t>(to)] = v;
          if (mate(to) == -1) return to;
          used_[static_cast<std::size_t>(mate(to))] = true;
          q.push(mate(to));
        }
      }
    }
    return -1;
  }

  void augment(int v) {
    while (v != -1) {
      const int pv = parent_[static_cast<std::size_t>(v)];
      const int ppv = mate(pv);
      mate_[static_cast<std::size_t>(v)] = pv;
      mate_[static_cast<std::size_t>(pv)] = v;
      v = ppv;
    }
  }

  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> mate_;
  std::vector<int> parent_;
  std::vector<int> base_;
  std::vector<bool> used_;
};

}  // namespace

std::vector<int> maximum_matching(int num_vertices, const std::vector<std::pair<int, int>>& edges) {
  return Blossom(num_vertices, edges).solve();
}

}  // namespace osc::chem::detail
