#pragma once

#include <functional>
#include <map>
#include <vector>

#include "ntdceg/coloured_graph.hpp"

namespace ntdceg {

// Time constraint a position partition respects.
struct PositionMode {
  enum class Kind { position, t_position, infinity_position };
  Kind kind = Kind::position;
  int T = 0;

  static PositionMode position() { return {Kind::position, 0}; }
  static PositionMode t_position(int T) { return {Kind::t_position, T}; }
  static PositionMode infinity_position() { return {Kind::infinity_position, 0}; }
};

struct Partition {
  std::vector<std::vector<VKey>> blocks;  // each sorted; blocks ordered by min member
  std::map<VKey, int> block_of;

  int block_count() const { return static_cast<int>(blocks.size()); }
  // True if every block of this partition lies inside one block of `coarser`.
  bool refines(const Partition& coarser) const;
};

// Coarsest partition in which equivalent vertices share a colour, have
// label-matching successors in equivalent blocks, and satisfy the mode's
// time constraint. Sinks stay in per-sink singleton blocks. Implemented as
// splitting to a fixed point.
Partition compute_positions(const ColouredGraph& g, const PositionMode& mode);

// Contracts each block to one vertex named by `name_of` (which must be
// injective over blocks). Edge attributes of merged edges must agree.
ColouredGraph quotient_graph(const ColouredGraph& g, const Partition& p,
                             const std::function<VKey(const std::vector<VKey>&)>& name_of);

// Vertex contraction operator for coloured DAGs: merges same-colour,
// same-slice vertices with identical labelled-and-coloured unfoldings; a
// merged vertex keeps the minimum key. Throws on cyclic input.
ColouredGraph contract_phi(const ColouredGraph& g);

}  // namespace ntdceg
