#include "ntdceg/coloured_graph.hpp"

#include <algorithm>
#include <functional>

namespace ntdceg {

std::string VKey::str() const {
  switch (sort) {
    case Sort::sink_inf:
      return "w_inf";
    case Sort::sink_slice:
      return "w_inf@" + std::to_string(base);
    case Sort::position:
      break;
  }
  std::string s = "w" + std::to_string(base);
  if (tag >= 0) s += "^" + std::to_string(tag);
  return s;
}

namespace {
bool edge_id_less(const CGEdge& a, const CGEdge& b) {
  if (a.from != b.from) return a.from < b.from;
  if (a.to != b.to) return a.to < b.to;
  return a.label < b.label;
}
}  // namespace

void ColouredGraph::add_vertex(CGVertex v) {
  auto [it, fresh] = verts_.emplace(v.key, v);
  if (!fresh && (it->second.colour != v.colour || it->second.slice != v.slice))
    throw Error("vertex " + v.key.str() + " inserted twice with different attributes");
}

void ColouredGraph::add_edge(CGEdge e) {
  auto [it, fresh] = edge_ids_.emplace(std::tuple(e.from, e.to, e.label), e.mark);
  if (!fresh) {
    if (it->second != e.mark)
      throw Error("edge " + e.from.str() + "->" + e.to.str() + " added with two marks");
    return;
  }
  edges_.push_back(std::move(e));
  sorted_ = false;
}

const CGVertex& ColouredGraph::vertex(const VKey& k) const {
  auto it = verts_.find(k);
  if (it == verts_.end()) throw Error("unknown graph vertex " + k.str());
  return it->second;
}

void ColouredGraph::ensure_sorted() const {
  if (!sorted_) {
    std::sort(edges_.begin(), edges_.end(), edge_id_less);
    sorted_ = true;
  }
}

const std::vector<CGEdge>& ColouredGraph::edges() const {
  ensure_sorted();
  return edges_;
}

std::vector<const CGEdge*> ColouredGraph::out_edges(const VKey& k) const {
  ensure_sorted();
  auto lo = std::lower_bound(edges_.begin(), edges_.end(), k,
                             [](const CGEdge& e, const VKey& key) { return e.from < key; });
  std::vector<const CGEdge*> out;
  for (auto it = lo; it != edges_.end() && it->from == k; ++it) out.push_back(&*it);
  return out;
}

std::vector<const CGEdge*> ColouredGraph::in_edges(const VKey& k) const {
  ensure_sorted();
  std::vector<const CGEdge*> out;
  for (const CGEdge& e : edges_)
    if (e.to == k) out.push_back(&e);
  return out;
}

int ColouredGraph::non_sink_count() const {
  int n = 0;
  for (const auto& [k, v] : verts_) n += !k.is_sink();
  return n;
}

bool ColouredGraph::is_acyclic() const {
  std::map<VKey, int> state;  // 0 fresh, 1 open, 2 done
  std::function<bool(const VKey&)> dfs = [&](const VKey& v) {
    int& s = state[v];
    if (s == 1) return false;
    if (s == 2) return true;
    s = 1;
    for (const CGEdge* e : out_edges(v))
      if (!dfs(e->to)) return false;
    s = 2;
    return true;
  };
  for (const auto& [k, v] : verts_)
    if (!dfs(k)) return false;
  return true;
}

std::set<VKey> ColouredGraph::reachable(const std::set<VKey>& from) const {
  std::set<VKey> seen = from;
  std::vector<VKey> stack(from.begin(), from.end());
  while (!stack.empty()) {
    VKey v = stack.back();
    stack.pop_back();
    for (const CGEdge* e : out_edges(v))
      if (seen.insert(e->to).second) stack.push_back(e->to);
  }
  return seen;
}

std::set<VKey> ColouredGraph::antecedents(const std::set<VKey>& to,
                                          bool include_cyclical) const {
  std::set<VKey> seen;
  std::vector<VKey> stack(to.begin(), to.end());
  while (!stack.empty()) {
    VKey v = stack.back();
    stack.pop_back();
    for (const CGEdge* e : in_edges(v)) {
      if (!include_cyclical && e->mark == EdgeMark::cyclical) continue;
      if (seen.insert(e->from).second) stack.push_back(e->from);
    }
  }
  return seen;
}

void ColouredGraph::check_invariants() const {
  for (const CGEdge& e : edges()) {
    if (!has_vertex(e.from) || !has_vertex(e.to)) throw Error("edge endpoint missing");
    if (e.from.is_sink()) throw Error("sink " + e.from.str() + " has an out-edge");
  }
  for (const auto& [k, v] : verts_) {
    std::set<std::string> labels;
    for (const CGEdge* e : out_edges(k))
      if (!labels.insert(e->label).second)
        throw Error("vertex " + k.str() + " has two out-edges labelled '" + e->label + "'");
  }
}

ColouredGraph graph_union(const ColouredGraph& a, const ColouredGraph& b) {
  ColouredGraph g = a;
  for (const auto& [k, v] : b.verts_) g.add_vertex(v);
  for (const CGEdge& e : b.edges()) g.add_edge(e);
  return g;
}

std::string unfolding_signature(const ColouredGraph& g, const VKey& v) {
  std::map<VKey, std::string> memo;
  std::function<const std::string&(const VKey&)> sig = [&](const VKey& k) -> const std::string& {
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    const CGVertex& cv = g.vertex(k);
    std::string s;
    if (k.is_sink()) {
      s = k.sort == VKey::Sort::sink_inf ? "!" : "!" + std::to_string(k.base);
    } else {
      std::vector<std::pair<std::string, const CGEdge*>> outs;
      for (const CGEdge* e : g.out_edges(k)) outs.emplace_back(e->label, e);
      std::sort(outs.begin(), outs.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      s = "(c" + std::to_string(cv.colour);
      for (const auto& [l, e] : outs) s += "[" + l + ">" + sig(e->to) + "]";
      s += ")";
    }
    return memo.emplace(k, std::move(s)).first->second;
  };
  return sig(v);
}

bool isomorphic_dags(const ColouredGraph& a, const VKey& root_a, const ColouredGraph& b,
                     const VKey& root_b) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  return unfolding_signature(a, root_a) == unfolding_signature(b, root_b);
}

}  // namespace ntdceg
