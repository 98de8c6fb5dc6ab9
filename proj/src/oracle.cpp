// Copyright 2026 The rankspace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "rankspace/oracle.hpp"

#include <cmath>
#include <functional>

#include <fmt/format.h>

namespace rankspace {

namespace {

double ipow(std::uint64_t base, int exp, std::uint64_t cap) {
  double v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= static_cast<double>(base);
    if (v > static_cast<double>(cap)) return v;
  }
  return v;
}

// Trees as nested leaf ranges, built recursively from all split points.
void build_trees(int i, int j, std::vector<std::vector<std::pair<int, int>>>& out) {
  out.clear();
  if (j - i == 1) {
    out.push_back({});
    return;
  }
  for (int k = i + 1; k < j; ++k) {
    std::vector<std::vector<std::pair<int, int>>> lefts, rights;
    build_trees(i, k, lefts);
    build_trees(k, j, rights);
    for (const auto& l : lefts)
      for (const auto& r : rights) {
        std::vector<std::pair<int, int>> t{{i, j}};
        t.insert(t.end(), l.begin(), l.end());
        t.insert(t.end(), r.begin(), r.end());
        out.push_back(std::move(t));
      }
  }
}

// Binary-tree node for labeling enumeration.
struct Node {
  int begin, end;
  int left = -1, right = -1;  // child node index, -1 for a leaf
};

std::vector<Node> to_nodes(const ParseTree& tree) {
  // spans are in preorder; nodes for leaves are appended as well.
  std::vector<Node> nodes;
  std::function<int(int, int)> add = [&](int i, int j) -> int {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{i, j});
    if (j - i == 1) return id;
    int k = i + 1;
    for (const auto& [a, b] : tree.spans)
      if (a == i && b < j) k = std::max(k, b);
    const int l = add(i, k);
    const int r = add(k, j);
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  };
  add(0, tree.n);
  return nodes;
}

}  // namespace

double hmm_bruteforce_logZ(const DenseJointHMM& model, TokenSeq seq, const EnumerationBudget& budget) {
  const int m = model.num_states();
  const int n = static_cast<int>(seq.size());
  if (n < 1) throw std::invalid_argument("hmm_bruteforce_logZ: empty sequence");
  for (int w : seq)
    if (w < 0 || w >= model.vocab_size()) throw std::out_of_range("hmm_bruteforce_logZ: token outside vocabulary");
  if (ipow(static_cast<std::uint64_t>(m), n, budget.max_states_hmm) > static_cast<double>(budget.max_states_hmm))
    throw BudgetExceeded(fmt::format("hmm_bruteforce_logZ: {}^{} state sequences exceed budget", m, n));

  CompensatedSum z;
  // states[0] is the start state, states[t] the state after emitting word t.
  std::vector<int> states(static_cast<std::size_t>(n + 1), 0);
  while (true) {
    double p = std::exp(static_cast<double>(model.start[states[0]]));
    for (int t = 0; t < n; ++t)
      p *= std::exp(static_cast<double>(model.T(states[static_cast<std::size_t>(t)],
                                                states[static_cast<std::size_t>(t + 1)], seq[static_cast<std::size_t>(t)])));
    z.add(p);
    int pos = 0;
    while (pos <= n && ++states[static_cast<std::size_t>(pos)] == m) states[static_cast<std::size_t>(pos++)] = 0;
    if (pos > n) break;
  }
  return std::log(z.value());
}

std::vector<ParseTree> enumerate_trees(int n) {
  std::vector<std::vector<std::pair<int, int>>> raw;
  build_trees(0, n, raw);
  std::vector<ParseTree> out;
  out.reserve(raw.size());
  for (auto& spans : raw) {
    ParseTree t;
    t.n = n;
    for (const auto& s : spans)
      if (s.second - s.first >= 2) t.spans.push_back(s);
    out.push_back(std::move(t));
  }
  return out;
}

PcfgOracleResult pcfg_bruteforce(const DensePCFG& model, TokenSeq seq, const EnumerationBudget& budget) {
  const int n = static_cast<int>(seq.size());
  const int nt = model.num_nt, pt = model.num_pt;
  if (n < 2) throw std::invalid_argument("pcfg_bruteforce: need n >= 2");
  for (int w : seq)
    if (w < 0 || w >= model.vocab_size()) throw std::out_of_range("pcfg_bruteforce: token outside vocabulary");
  const auto trees = enumerate_trees(n);
  const double labelings = ipow(static_cast<std::uint64_t>(nt), n - 1, budget.max_trees) *
                           ipow(static_cast<std::uint64_t>(pt), n, budget.max_trees);
  if (static_cast<double>(trees.size()) * labelings > static_cast<double>(budget.max_trees))
    throw BudgetExceeded(fmt::format("pcfg_bruteforce: {} trees x {} labelings exceed budget", trees.size(), labelings));

  CompensatedSum z;
  std::vector<double> tree_mass;
  tree_mass.reserve(trees.size());
  for (const auto& tree : trees) {
    const auto nodes = to_nodes(tree);
    // Odometer over labels: internal nodes take nonterminals, leaves preterminals.
    std::vector<int> label(nodes.size(), 0);
    auto radix = [&](std::size_t id) { return nodes[id].left < 0 ? pt : nt; };
    CompensatedSum mass;
    while (true) {
      double p = std::exp(static_cast<double>(model.start[label[0]]));
      for (std::size_t id = 0; id < nodes.size(); ++id) {
        const Node& node = nodes[id];
        if (node.left < 0) {
          p *= std::exp(static_cast<double>(model.emission(label[id], seq[static_cast<std::size_t>(node.begin)])));
        } else {
          auto symbol = [&](int child) {
            const auto c = static_cast<std::size_t>(child);
            return nodes[c].left < 0 ? nt + label[c] : label[c];
          };
          p *= std::exp(static_cast<double>(model.rule(label[id], symbol(node.left), symbol(node.right))));
        }
      }
      mass.add(p);
      std::size_t pos = 0;
      while (pos < nodes.size() && ++label[pos] == radix(pos)) label[pos++] = 0;
      if (pos == nodes.size()) break;
    }
    tree_mass.push_back(mass.value());
    z.add(mass.value());
  }

  PcfgOracleResult out;
  out.logZ = std::log(z.value());
  out.marginals = SpanTable<double>(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j <= n; ++j) {
      CompensatedSum containing;
      for (std::size_t t = 0; t < trees.size(); ++t)
        if (trees[t].contains(i, j)) containing.add(tree_mass[t]);
      out.marginals(i, j) = containing.value() / z.value();
    }
  SpanMarginals sm;
  sm.n = n;
  sm.mu = out.marginals;
  const auto mbr = mbr_bruteforce(sm);
  out.mbr_tree = mbr.tree;
  out.mbr_objective = mbr.objective;
  return out;
}

MbrOracleResult mbr_bruteforce(const SpanMarginals& marginals) {
  MbrOracleResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  for (auto& tree : enumerate_trees(marginals.n)) {
    CompensatedSum total;
    for (const auto& [i, j] : tree.spans) total.add(marginals(i, j));
    if (total.value() > best.objective) {
      best.objective = total.value();
      best.tree = std::move(tree);
    }
  }
  return best;
}

}  // namespace rankspace
