#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ntdceg/common.hpp"

namespace ntdceg {

inline constexpr int kNoColour = -1;

// Identity of a graph vertex: a base number, an optional time-slice tag
// (the superscript a relabelling attaches) and a sort separating ordinary
// positions from the per-slice and terminal sinks.
struct VKey {
  enum class Sort : std::uint8_t { position = 0, sink_slice = 1, sink_inf = 2 };
  Sort sort = Sort::position;
  int base = 0;  // position number, or the slice for a per-slice sink
  int tag = -1;  // -1 = untagged

  auto operator<=>(const VKey&) const = default;

  bool is_sink() const { return sort != Sort::position; }
  static VKey pos(int base, int tag = -1) { return {Sort::position, base, tag}; }
  static VKey sink_at(int slice) { return {Sort::sink_slice, slice, -1}; }
  static VKey sink() { return {Sort::sink_inf, 0, -1}; }
  std::string str() const;
};

enum class EdgeMark : std::uint8_t { plain, temporal, cyclical };

struct CGVertex {
  VKey key;
  int colour = kNoColour;  // stage id; kNoColour for sinks
  int slice = 0;           // the slice the vertex's floret unfolds at
};

struct CGEdge {
  VKey from;
  VKey to;
  std::string label;
  EdgeMark mark = EdgeMark::plain;
  double prob = std::nan("");  // NaN when no measure is attached

  bool has_prob() const { return !std::isnan(prob); }
};

// Finite coloured directed multigraph with labelled edges. Vertices are kept
// in key order and edges sorted by (from, to, label), so iteration and every
// derived output are deterministic.
class ColouredGraph {
 public:
  void add_vertex(CGVertex v);
  void add_edge(CGEdge e);  // idempotent for an identical edge
  bool has_vertex(const VKey& k) const { return verts_.count(k) > 0; }
  const CGVertex& vertex(const VKey& k) const;

  const std::map<VKey, CGVertex>& vertices() const { return verts_; }
  const std::vector<CGEdge>& edges() const;  // sorted

  std::vector<const CGEdge*> out_edges(const VKey& k) const;
  std::vector<const CGEdge*> in_edges(const VKey& k) const;

  int vertex_count() const { return static_cast<int>(verts_.size()); }
  int non_sink_count() const;
  int edge_count() const { return static_cast<int>(edges_.size()); }

  bool is_acyclic() const;
  // Vertices reachable from `from` along all edges.
  std::set<VKey> reachable(const std::set<VKey>& from) const;
  // Vertices from which some vertex of `to` is reachable (excluding sinks'
  // trivial self-membership), following only edges that satisfy `use_edge`.
  std::set<VKey> antecedents(const std::set<VKey>& to, bool include_cyclical) const;

  // Structural checks: sinks have no out-edges, out-labels of a vertex are
  // pairwise distinct, endpoints exist.
  void check_invariants() const;

  // Union keeping vertex identities; disagreeing attributes on a shared
  // vertex or edge raise an error.
  friend ColouredGraph graph_union(const ColouredGraph& a, const ColouredGraph& b);

 private:
  void ensure_sorted() const;
  std::map<VKey, CGVertex> verts_;
  std::map<std::tuple<VKey, VKey, std::string>, EdgeMark> edge_ids_;
  mutable std::vector<CGEdge> edges_;
  mutable bool sorted_ = true;
};

ColouredGraph graph_union(const ColouredGraph& a, const ColouredGraph& b);

// Colour-and-label equality of two single-root acyclic graphs: equal
// canonical unfolding signatures plus matching vertex/edge counts.
bool isomorphic_dags(const ColouredGraph& a, const VKey& root_a, const ColouredGraph& b,
                     const VKey& root_b);

// Canonical unfolding signature of a vertex in an acyclic graph.
std::string unfolding_signature(const ColouredGraph& g, const VKey& v);

}  // namespace ntdceg
