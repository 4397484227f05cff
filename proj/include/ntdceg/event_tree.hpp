#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ntdceg/common.hpp"

namespace ntdceg {

using VertexId = int;
inline constexpr VertexId kNoVertex = -1;

enum class VertexKind { situation, leaf };

// One vertex of an event tree. `time_slice` is the slice of the incoming
// edge; vertices of the time-invariant prefix carry slice -1 and the root
// carries the slice of its own floret.
struct TreeVertex {
  VertexId id = kNoVertex;
  VertexKind kind = VertexKind::leaf;
  int time_slice = 0;
  VertexId parent = kNoVertex;
  std::string label;  // label of the incoming edge; empty for the root
  std::vector<VertexId> children;
};

// A situation together with its outgoing labelled edges.
struct Floret {
  VertexId root = kNoVertex;
  std::vector<std::pair<std::string, VertexId>> children;

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(children.size());
    for (const auto& [l, c] : children) out.push_back(l);
    return out;
  }
};

// A root-to-vertex walk: vertices, edge labels and per-event slices.
struct EventPath {
  std::vector<VertexId> vertices;
  std::vector<std::string> labels;
  std::vector<int> tau;  // slice of each event, non-decreasing
};

// Rooted event tree with labelled edges and dense breadth-first ids.
// Immutable after construction; build through TreeBuilder.
class EventTree {
 public:
  EventTree() = default;

  bool empty() const { return verts_.empty(); }
  int size() const { return static_cast<int>(verts_.size()); }
  VertexId root() const { return verts_.empty() ? kNoVertex : 0; }

  const TreeVertex& vertex(VertexId v) const {
    if (v < 0 || v >= size()) throw Error("unknown vertex id " + std::to_string(v));
    return verts_[v];
  }
  bool is_situation(VertexId v) const { return vertex(v).kind == VertexKind::situation; }
  bool is_leaf(VertexId v) const { return vertex(v).kind == VertexKind::leaf; }

  // Deepest time slice present in the tree (-1 for a pure time-invariant tree).
  int max_slice() const;

  // The slice at which a vertex's own process stands: for a situation the
  // slice of its floret, for a leaf the slice after its terminating event.
  int active_slice(VertexId v) const;

  // True when v's floret opens a new slice (its incoming edge lies in the
  // previous slice). The root counts as the entry of its own slice.
  bool is_entry(VertexId v) const;

  std::vector<VertexId> situations() const;
  std::vector<VertexId> leaves() const;
  int situation_count() const;
  int leaf_count() const;

  // k-th situation in breadth-first order (0-based, "s_k").
  VertexId situation_at(int k) const;
  // k-th leaf in breadth-first order (1-based, "l_k").
  VertexId leaf_at(int k) const;

  Floret floret(VertexId s) const;
  VertexId child_by_label(VertexId v, std::string_view label) const;

  EventPath path_to(VertexId v) const;
  std::vector<std::string> path_labels(VertexId v) const;

  // Time-ordered concatenation of the time-invariant events preceding v and
  // every event in the last k slices before v's active slice (the partial
  // current slice included). k past available history yields full history.
  std::vector<std::string> xi(VertexId v, int k) const;

  // Resolves a label path from the root. Wildcards "*" match any single
  // label; returns every matching vertex in id order.
  std::vector<VertexId> resolve_path(const std::vector<std::string>& segments) const;

  // Throws Error if the structural invariants do not hold: unique sibling
  // labels, non-decreasing slices along paths, florets within one slice.
  void check_invariants() const;

  // Label-structure equality ignoring ids (children matched by label).
  bool same_shape(const EventTree& other) const;

 private:
  friend class TreeBuilder;
  std::vector<TreeVertex> verts_;
};

// Incremental builder; build() renumbers vertices breadth-first in the
// declared child order so ids are reproducible.
class TreeBuilder {
 public:
  VertexId add_root(int slice);
  VertexId add_child(VertexId parent, std::string label, int slice);
  // Convenience: child slice equals the parent floret's slice.
  VertexId add_child(VertexId parent, std::string label);

  int slice_of(VertexId v) const { return verts_.at(v).time_slice; }
  EventTree build() const;
  // Also reports, for every builder id, the id it received in the built tree.
  EventTree build(std::vector<VertexId>* builder_to_final) const;

 private:
  std::vector<TreeVertex> verts_;
};

// All-floret-labels-distinct canonical text form, for structural comparison
// in tests ("(a(b)(c))" style, children sorted by label).
std::string canonical_form(const EventTree& t, VertexId from = 0);

}  // namespace ntdceg
