#include "ntdceg/positions.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace ntdceg {

bool Partition::refines(const Partition& coarser) const {
  for (const auto& block : blocks) {
    auto it = coarser.block_of.find(block.front());
    if (it == coarser.block_of.end()) return false;
    for (const VKey& v : block) {
      auto jt = coarser.block_of.find(v);
      if (jt == coarser.block_of.end() || jt->second != it->second) return false;
    }
  }
  return true;
}

Partition compute_positions(const ColouredGraph& g, const PositionMode& mode) {
  // Index vertices and labels once; refinement then works on integers.
  std::vector<VKey> keys;
  keys.reserve(g.vertices().size());
  for (const auto& [k, v] : g.vertices()) keys.push_back(k);
  std::map<VKey, int> index;
  for (size_t i = 0; i < keys.size(); ++i) index[keys[i]] = static_cast<int>(i);

  std::map<std::string, int> label_ids;
  std::vector<std::vector<std::pair<int, int>>> out(keys.size());  // (label id, target)
  for (const CGEdge& e : g.edges()) {
    auto [it, fresh] = label_ids.emplace(e.label, static_cast<int>(label_ids.size()));
    out[index.at(e.from)].emplace_back(it->second, index.at(e.to));
  }
  for (auto& v : out) std::sort(v.begin(), v.end());

  // Initial blocks: sinks individually; positions by (colour, slice key).
  const int far = std::numeric_limits<int>::max();
  std::map<std::tuple<int, int, int, int>, int> seed;  // (sink sort/base, colour, slice key)
  std::vector<int> block(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) {
    const VKey& k = keys[i];
    const CGVertex& v = g.vertex(k);
    std::tuple<int, int, int, int> key;
    if (k.is_sink()) {
      key = {static_cast<int>(k.sort), k.base, 0, 0};
    } else {
      int slice_key = 0;
      switch (mode.kind) {
        case PositionMode::Kind::position:
          slice_key = 0;
          break;
        case PositionMode::Kind::t_position:
          slice_key = v.slice < mode.T ? v.slice : far;
          break;
        case PositionMode::Kind::infinity_position:
          slice_key = v.slice;
          break;
      }
      key = {-1, 0, v.colour, slice_key};
    }
    auto [it, fresh] = seed.emplace(key, static_cast<int>(seed.size()));
    block[i] = it->second;
  }

  // Split until stable: the signature of a vertex is its sorted list of
  // (label, target block) pairs.
  int block_count = static_cast<int>(seed.size());
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::pair<int, std::vector<std::pair<int, int>>>, int> next_ids;
    std::vector<int> next(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
      std::vector<std::pair<int, int>> sig;
      sig.reserve(out[i].size());
      for (auto [l, t] : out[i]) sig.emplace_back(l, block[t]);
      auto [it, fresh] =
          next_ids.emplace(std::pair(block[i], std::move(sig)), static_cast<int>(next_ids.size()));
      next[i] = it->second;
    }
    if (static_cast<int>(next_ids.size()) != block_count) {
      changed = true;
      block_count = static_cast<int>(next_ids.size());
    }
    block = std::move(next);
  }

  // Deterministic block order: by minimum member key.
  std::vector<std::vector<int>> members(block_count);
  for (size_t i = 0; i < keys.size(); ++i) members[block[i]].push_back(static_cast<int>(i));
  std::sort(members.begin(), members.end(),
            [&](const std::vector<int>& a, const std::vector<int>& b) {
              return keys[a.front()] < keys[b.front()];
            });

  Partition p;
  for (const auto& m : members) {
    std::vector<VKey> b;
    b.reserve(m.size());
    for (int i : m) b.push_back(keys[i]);
    const int id = p.block_count();
    for (const VKey& k : b) p.block_of[k] = id;
    p.blocks.push_back(std::move(b));
  }
  return p;
}

ColouredGraph quotient_graph(const ColouredGraph& g, const Partition& p,
                             const std::function<VKey(const std::vector<VKey>&)>& name_of) {
  std::vector<VKey> names(p.block_count());
  for (int b = 0; b < p.block_count(); ++b) names[b] = name_of(p.blocks[b]);

  ColouredGraph q;
  for (int b = 0; b < p.block_count(); ++b) {
    const CGVertex& rep = g.vertex(p.blocks[b].front());
    for (const VKey& k : p.blocks[b]) {
      const CGVertex& v = g.vertex(k);
      if (v.colour != rep.colour)
        throw Error("quotient block mixes colours at " + k.str());
    }
    q.add_vertex({names[b], rep.colour, rep.slice});
  }
  for (const CGEdge& e : g.edges()) {
    CGEdge ne = e;
    ne.from = names[p.block_of.at(e.from)];
    ne.to = names[p.block_of.at(e.to)];
    q.add_edge(std::move(ne));
  }
  q.check_invariants();
  return q;
}

ColouredGraph contract_phi(const ColouredGraph& g) {
  if (!g.is_acyclic()) throw Error("vertex contraction needs an acyclic graph");
  Partition p = compute_positions(g, PositionMode::infinity_position());
  return quotient_graph(g, p, [](const std::vector<VKey>& block) { return block.front(); });
}

}  // namespace ntdceg
