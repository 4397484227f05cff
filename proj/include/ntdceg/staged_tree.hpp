#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ntdceg/tree_object.hpp"

namespace ntdceg {

inline constexpr int kNoStage = -1;
inline constexpr double kSumTolerance = 1e-9;

// Partition of the situations into stages (colours). Leaves are unstaged.
// Each stage owns a canonical label set (the labels of its lowest-id member)
// and an optional per-member bijection from member labels onto it.
struct StagePartition {
  std::vector<int> stage_of;                      // by vertex id; kNoStage for leaves
  std::vector<std::string> stage_names;           // by stage id
  std::vector<std::vector<std::string>> canonical_labels;  // by stage id
  // (vertex, actual label) -> canonical label; identity entries are omitted.
  std::map<std::pair<VertexId, std::string>, std::string> bijections;

  int stage_count() const { return static_cast<int>(stage_names.size()); }
  const std::string& to_canonical(VertexId v, const std::string& label) const {
    auto it = bijections.find({v, label});
    return it == bijections.end() ? label : it->second;
  }
};

// Per-stage outgoing distributions over canonical labels.
struct StageDistributions {
  std::vector<std::map<std::string, double>> dist;  // by stage id

  double prob(int stage, const std::string& canonical_label) const;
};

struct StagedTree {
  EventTree tree;
  StagePartition stages;
  std::optional<StageDistributions> probs;

  int stage_of(VertexId v) const { return stages.stage_of.at(v); }
  // Probability attached to the edge into child c.
  double edge_prob(VertexId c) const;
};

// Declared stage block: a name plus the member situations, with optional
// label maps from the block's first member onto later members.
struct StageDecl {
  std::string name;
  std::vector<VertexId> members;
  // member vertex -> (canonical label -> member label)
  std::map<VertexId, std::map<std::string, std::string>> maps;
};

// Validates the declared blocks (coverage, out-degree, label sets under the
// declared bijections) and returns the staged tree. Situations not covered
// by any block each become their own singleton stage.
StagedTree assign_stages(const EventTree& tree, const std::vector<StageDecl>& decls);

// Finest colouring: every situation its own stage.
StagedTree finest_staging(const EventTree& tree);

// Attaches per-stage distributions; each distribution must cover exactly the
// stage's canonical label set and sum to one within kSumTolerance.
void attach_probabilities(StagedTree& st,
                          const std::vector<std::map<std::string, double>>& by_stage);

// Product of the primitive probabilities along the root-to-v path.
double path_probability(const StagedTree& st, VertexId v);

struct TimeHomogeneityReport {
  bool holds = true;
  // First offending pair of situations with equal signatures but different stages.
  std::optional<std::pair<VertexId, VertexId>> violation;
  // True when the truncation is deep enough to certify the property for the
  // generated infinite tree (depth >= 2N - eta - 1), or the check was vacuous.
  bool certified = true;
  std::string detail;
};

// Checks that from slice T on, situations with equal xi(.,N) signatures share
// a stage. Decided on the pairs present in the truncation; `certified`
// reports whether that decides the infinite-tree property.
TimeHomogeneityReport check_time_homogeneous(const StagedTree& st, int N, int T);

// TOG metadata a staged tree was generated with.
struct TogInfo {
  TogKind kind = TogKind::A;
  std::set<std::string> terminating;
  bool has_invariant = false;

  int eta() const { return has_invariant ? 0 : 1; }
};

struct ExtendedStagedTree {
  StagedTree st;
  // For every vertex, the vertex of the base tree it copies (base vertices
  // map to themselves).
  std::vector<VertexId> source;
};

// Unfolds a staged TOG truncation of horizon N-1 to `horizon` by grafting,
// onto every continuing frontier leaf, a copy of the slice subtree of the
// entry situation with the matching xi(., N-1) signature. Stage ids and
// probabilities carry over to the copies.
ExtendedStagedTree extend_staged(const StagedTree& st, const TogInfo& tog, int N,
                                 int horizon);

}  // namespace ntdceg
