#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ntdceg/coloured_graph.hpp"
#include "ntdceg/positions.hpp"
#include "ntdceg/staged_tree.hpp"

namespace ntdceg {

// Finite coloured cyclic graph quotienting the infinite staged tree by
// (N-1)-positions, with per-slice sinks for early termination and one
// terminal sink from slice N-1 on.
struct NTDceg {
  ColouredGraph graph;
  int N = 2;
  int eta = 1;  // 1 without time-invariant information, 0 with it
  TogInfo tog;
  VKey root = VKey::pos(0);
  std::vector<VKey> slice_sinks;  // present per-slice sinks, ascending slice
  bool has_terminal_sink = false;

  std::vector<VKey> heads;  // W_Head: heads of cyclical temporal edges
  std::vector<VKey> tails;  // W_Tail

  // Situations of the horizon-(N-1) staged tree -> graph vertex.
  std::map<VertexId, VKey> position_of;
  // Same for the extended tree (used for the chain projection).
  std::map<VertexId, VKey> ext_position_of;

  std::vector<std::string> stage_names;
  std::vector<std::vector<std::string>> stage_labels;  // canonical label sets
  std::vector<std::map<std::string, double>> stage_dists;  // empty when unquantified
  bool has_probs = false;

  // Underlying trees; null for models restored from disk.
  std::shared_ptr<const StagedTree> st;
  std::shared_ptr<const ExtendedStagedTree> st_ext;

  int position_count() const { return graph.non_sink_count(); }
  std::set<VKey> sink_set() const;
  // Entry positions at the beginning of slice t (what an occupancy vector at
  // time t < N-1 ranges over); {root} for the first slice.
  std::vector<VKey> entry_positions(int t) const;
};

// Folds every continuing frontier leaf of the horizon-(N-1) staged tree onto
// the entry situation with the matching last-(N-1)-slice history; terminating
// leaves are gathered into per-slice sinks (slices <= N-2) and a terminal
// sink. Returns the graph plus the tree-vertex -> graph-vertex map.
struct CStar {
  ColouredGraph graph;
  std::map<VertexId, VKey> vertex_of;  // situations only
};
CStar build_c_star(const StagedTree& st, const TogInfo& tog, int N);

// The construction pipeline: extend the coloured tree one homogeneous cycle,
// certify time-homogeneity, fold into the cyclic graph, compute the
// (N-1)-position structure and contract.
NTDceg build_ntdceg(const StagedTree& st, const TogInfo& tog, int N);

// ---- Subgraph algebra --------------------------------------------------

struct Decomposition {
  ColouredGraph d_i;  // initialisation (first N-1 slices)
  ColouredGraph g_0;  // transition edges, untagged heads
  ColouredGraph g_1;  // transition edges, heads tagged N-1
  ColouredGraph d_h;  // time-homogeneous core (cyclic)
  ColouredGraph d_r;  // acyclic repeat unit
  ColouredGraph g_2;  // cyclical temporal edges
};
Decomposition decompose(const NTDceg& m);

ColouredGraph initial_graph(const NTDceg& m);
ColouredGraph r_link_graph(const NTDceg& m, int r);
ColouredGraph time_homogeneous_graph(const NTDceg& m);
ColouredGraph repeating_graph(const NTDceg& m);
ColouredGraph link_graph(const NTDceg& m);

// Copy of `g` with every non-sink vertex tagged t and slice-shifted so that
// slice N-1 lands on t.
ColouredGraph relabel_slice(const ColouredGraph& g, int t, int N);
// Cyclical temporal edges drawn from tagged slice t into tagged slice t+1.
ColouredGraph link_graph_at(const NTDceg& m, int t);
// D_R(ta) joined by link graphs through D_R(tb); empty for tb < ta.
ColouredGraph repeating_span(const NTDceg& m, int ta, int tb);

// Finite-horizon chain event graph.
struct Ceg {
  ColouredGraph graph;
  int horizon = 0;
  VKey root = VKey::pos(0);
  VKey sink = VKey::sink();
};

// Reconstructs the horizon-t CEG from the subgraphs of the NT-DCEG (the
// initial part for t <= N-2; initial + one closed repeat for the middle
// range; initial + repeats + contracted closure beyond).
Ceg ceg_at(const NTDceg& m, int t);

// Contracts a finite staged tree by its slice-respecting position structure
// and gathers the leaves into one sink: the independent construction ceg_at
// is checked against.
Ceg direct_ceg(const StagedTree& st);

bool graphs_equal(const ColouredGraph& a, const ColouredGraph& b);

}  // namespace ntdceg
