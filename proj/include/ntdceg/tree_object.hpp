#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ntdceg/event_tree.hpp"

namespace ntdceg {

// Event tree wrapped with its interface: the input root plus a partition of
// the output leaves into blocks. An empty tree stands for the empty object.
struct TreeObject {
  EventTree tree;
  std::vector<std::vector<VertexId>> output_partition;

  bool empty() const { return tree.empty(); }
  void check_partition() const;  // blocks nonempty, disjoint, cover the leaves
};

enum class TogKind { A, B };

// How the output partition of a merge result is recomputed.
struct Repartition {
  enum class Mode {
    // Blocks are classes of equal xi(leaf, depth) signatures.
    by_xi,
    // Kind-driven: one frontier block (A) or continuing/terminating (B).
    by_kind,
    // Single block holding every leaf.
    single,
  };
  Mode mode = Mode::single;
  int xi_depth = 0;                       // for by_xi
  TogKind kind = TogKind::A;              // for by_kind
  std::set<std::string> terminating;      // for by_kind, kind B

  static Repartition by_xi_depth(int k) { return {Mode::by_xi, k, TogKind::A, {}}; }
  static Repartition by_kind_of(TogKind k, std::set<std::string> term) {
    return {Mode::by_kind, 0, k, std::move(term)};
  }
  static Repartition single_block() { return {}; }
};

// Grafts h[k] (its root identified with the leaf) onto every leaf of block
// k; std::nullopt leaves the block's leaves untouched. Grafted slices are
// shifted so that graft slice 0 lands on the base's deepest slice + 1.
// An empty base requires a single graft and returns a copy of it.
TreeObject merge(const TreeObject& base,
                 const std::vector<std::optional<TreeObject>>& h,
                 const Repartition& repartition);

// TOG(T-1, T, horizon): the template grafted slice by slice after the
// optional time-invariant prefix. Kind A grafts onto every leaf; kind B only
// onto leaves whose terminating event label is not in `terminating`.
TreeObject build_tog(const std::optional<EventTree>& t_minus1, const EventTree& tmpl,
                     TogKind kind, int horizon,
                     const std::set<std::string>& terminating = {});

// True when the leaf's incoming label marks termination under kind B.
bool is_terminating_leaf(const EventTree& t, VertexId leaf, TogKind kind,
                         const std::set<std::string>& terminating);

// Leaves of the current frontier that the next merge would graft onto.
std::vector<VertexId> continuing_leaves(const EventTree& t, TogKind kind,
                                        const std::set<std::string>& terminating);

struct PeriodicityReport {
  bool periodic = true;
  std::optional<VertexId> witness;  // first situation with no matching earlier one
  std::string detail;
};

// Checks the periodicity conditions on the finite truncation: every
// situation after slice T must replay, slice-shifted, some situation at a
// slice <= T under matching labels, with both unfolding from the same
// time-invariant leaf. Subtrees are compared down to the truncation horizon.
PeriodicityReport check_periodic(const TreeObject& obj, int T);

}  // namespace ntdceg
