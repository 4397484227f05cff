#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ntdceg/ntdceg.hpp"

namespace ntdceg {

// Named variables: each resolves to the florets carrying its label set.
struct VariableTable {
  std::map<std::string, std::vector<std::string>> labels;  // name -> label set

  bool has(const std::string& name) const { return labels.count(name) > 0; }
  std::set<std::string> label_set(const std::string& name) const;
  // Name of the variable whose label set equals `fl`, if declared.
  std::optional<std::string> name_of(const std::set<std::string>& fl) const;
};

// A slice reference: absolute (0, 1, ...) or offset from a generic
// homogeneous slice t (t, t+1, ...).
struct SliceRef {
  bool symbolic = false;
  int value = 0;

  std::string str() const {
    if (!symbolic) return std::to_string(value);
    return value == 0 ? "t" : "t+" + std::to_string(value);
  }
};

struct VarConstraint {
  SliceRef slice;
  std::string var;
  std::set<std::string> allowed;  // subset of the variable's labels
};

// Per-slice partial assignments of floret labels.
struct Context {
  std::vector<VarConstraint> constraints;
  bool symbolic() const {
    for (const auto& c : constraints)
      if (c.slice.symbolic) return true;
    return false;
  }
};

Context parse_context(const std::string& text, const VariableTable& vars);

struct PositionMass {
  VKey position;
  double mass;  // NaN when the model has no probabilities
};

struct EventQueryResult {
  std::vector<PositionMass> positions;  // W_E, sorted by key
  bool contradictory = false;           // empty result, reported as a warning
  int anchor_slice = 0;                 // W_E sits at the beginning of this slice
  bool symbolic = false;
};

// Positions reachable at the beginning of the slice after the last
// constrained one, along walks satisfying the context. Symbolic contexts
// start from every head; absolute ones from the root.
EventQueryResult events_to_positions(const NTDceg& m, const Context& c,
                                     const VariableTable& vars);

// Subgraph reachable from W_E, colours preserved.
ColouredGraph prune(const NTDceg& m, const std::set<VKey>& w_e);

// The set of last-k-slice event histories (time-invariant events always
// included) along root-to-w walks of `g`. Slice boundaries are the temporal
// and cyclical edge marks.
std::set<std::vector<std::string>> xi_c(const ColouredGraph& g, const VKey& root,
                                        const VKey& w, int k);

struct LegendReport {
  bool holds = true;
  int horizon = 0;
  struct Entry {
    int t;
    VKey head;
    bool equal;
  };
  std::vector<Entry> entries;
  std::string detail;
};

// Builds the horizon-T CEG and checks, for every head position and every
// t in N..T-N+eta, that the last-(N-1)-slice history sets at slice t and at
// slice N-1 coincide.
LegendReport legend_map(const NTDceg& m, int T);

// Conditional-independence statement: target _||_ claimed | conditioning.
struct CIStatement {
  std::string target_var;
  SliceRef target_slice;
  std::vector<std::pair<std::string, SliceRef>> claimed;
  std::vector<VarConstraint> conditioning;  // bare vars carry their full label set
  std::string text;                         // original form, for reports
};

CIStatement parse_ci(const std::string& text, const VariableTable& vars);

struct CIResult {
  bool holds = false;
  // For every completion of the conditioning context, the target florets
  // reached while the claimed variables vary; certified by stage equality.
  struct Group {
    std::vector<std::pair<VKey, int>> florets;  // (position, stage)
  };
  std::vector<Group> groups;
  std::optional<std::pair<VKey, VKey>> counterexample;  // differing stage pair
  std::string detail;
};

// True iff, for every completion of the conditioning context (including the
// start position and any unmentioned upstream variables), the target
// variable's florets reached while only the claimed variables vary lie in a
// single stage.
CIResult verify_ci(const NTDceg& m, const CIStatement& s, const VariableTable& vars);

}  // namespace ntdceg
