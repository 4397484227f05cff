#include "ntdceg/tree_object.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ntdceg {

void TreeObject::check_partition() const {
  std::set<VertexId> seen;
  for (const auto& block : output_partition) {
    if (block.empty()) throw Error("empty block in output partition");
    for (VertexId l : block) {
      if (!tree.is_leaf(l)) throw Error("partition block contains a non-leaf");
      if (!seen.insert(l).second) throw Error("leaf in two partition blocks");
    }
  }
  if (static_cast<int>(seen.size()) != tree.leaf_count())
    throw Error("output partition does not cover the leaf set");
}

bool is_terminating_leaf(const EventTree& t, VertexId leaf, TogKind kind,
                         const std::set<std::string>& terminating) {
  if (kind == TogKind::A) return false;
  const TreeVertex& v = t.vertex(leaf);
  return v.time_slice >= 0 && terminating.count(v.label) > 0;
}

std::vector<VertexId> continuing_leaves(const EventTree& t, TogKind kind,
                                        const std::set<std::string>& terminating) {
  std::vector<VertexId> out;
  for (VertexId l : t.leaves())
    if (!is_terminating_leaf(t, l, kind, terminating)) out.push_back(l);
  return out;
}

namespace {

std::vector<std::vector<VertexId>> repartition(const EventTree& t, const Repartition& rp) {
  std::vector<std::vector<VertexId>> blocks;
  switch (rp.mode) {
    case Repartition::Mode::single: {
      auto ls = t.leaves();
      if (!ls.empty()) blocks.push_back(ls);
      break;
    }
    case Repartition::Mode::by_xi: {
      std::map<std::vector<std::string>, std::vector<VertexId>> groups;
      for (VertexId l : t.leaves()) groups[t.xi(l, rp.xi_depth)].push_back(l);
      for (auto& [sig, ls] : groups) blocks.push_back(ls);
      std::sort(blocks.begin(), blocks.end(),
                [](const auto& a, const auto& b) { return a.front() < b.front(); });
      break;
    }
    case Repartition::Mode::by_kind: {
      std::vector<VertexId> cont, term;
      for (VertexId l : t.leaves())
        (is_terminating_leaf(t, l, rp.kind, rp.terminating) ? term : cont).push_back(l);
      if (!cont.empty()) blocks.push_back(cont);
      if (!term.empty()) blocks.push_back(term);
      break;
    }
  }
  return blocks;
}

// Appends a copy of `src` below `onto` (src's root identified with onto).
void graft(TreeBuilder& b, const EventTree& src, VertexId onto, int shift,
           std::vector<VertexId>& scratch) {
  scratch.assign(src.size(), kNoVertex);
  scratch[src.root()] = onto;
  for (VertexId v = 0; v < src.size(); ++v) {
    for (VertexId c : src.vertex(v).children) {
      const TreeVertex& cv = src.vertex(c);
      if (cv.time_slice < 0) throw Error("graft object contains time-invariant vertices");
      scratch[c] = b.add_child(scratch[v], cv.label, cv.time_slice + shift);
    }
  }
}

}  // namespace

TreeObject merge(const TreeObject& base, const std::vector<std::optional<TreeObject>>& h,
                 const Repartition& rp) {
  if (base.empty()) {
    if (h.size() != 1 || !h[0].has_value() || h[0]->empty())
      throw Error("merging onto the empty object requires exactly one graft object");
    TreeObject out;
    out.tree = h[0]->tree;
    out.output_partition = repartition(out.tree, rp);
    return out;
  }
  base.check_partition();
  if (h.size() != base.output_partition.size())
    throw Error("graft map must cover every block of the output partition");

  TreeBuilder b;
  std::vector<VertexId> map(base.tree.size(), kNoVertex);
  map[base.tree.root()] = b.add_root(base.tree.vertex(base.tree.root()).time_slice);
  for (VertexId v = 0; v < base.tree.size(); ++v) {
    for (VertexId c : base.tree.vertex(v).children) {
      const TreeVertex& cv = base.tree.vertex(c);
      map[c] = b.add_child(map[v], cv.label, cv.time_slice);
    }
  }

  const int shift = base.tree.max_slice() + 1;
  std::vector<VertexId> scratch;
  for (size_t k = 0; k < h.size(); ++k) {
    if (!h[k].has_value() || h[k]->empty()) continue;
    for (VertexId leaf : base.output_partition[k])
      graft(b, h[k]->tree, map[leaf], shift, scratch);
  }

  TreeObject out;
  out.tree = b.build();
  out.output_partition = repartition(out.tree, rp);
  return out;
}

TreeObject build_tog(const std::optional<EventTree>& t_minus1, const EventTree& tmpl,
                     TogKind kind, int horizon, const std::set<std::string>& terminating) {
  if (horizon < 0) throw Error("negative horizon");
  if (tmpl.empty()) throw Error("empty template");
  tmpl.check_invariants();
  for (VertexId v = 0; v < tmpl.size(); ++v)
    if (tmpl.vertex(v).time_slice != 0)
      throw Error("template must be a single-slice tree (all events at slice 0)");
  if (kind == TogKind::B) {
    bool has_cont = false, has_term = false;
    for (VertexId l : tmpl.leaves())
      (is_terminating_leaf(tmpl, l, kind, terminating) ? has_term : has_cont) = true;
    if (!has_cont || !has_term)
      throw Error("kind B needs both continuing and terminating template leaves");
  }

  const Repartition rp = Repartition::by_kind_of(kind, terminating);
  TreeObject cur;
  if (t_minus1.has_value() && !t_minus1->empty()) {
    t_minus1->check_invariants();
    for (VertexId v = 0; v < t_minus1->size(); ++v)
      if (t_minus1->vertex(v).time_slice != -1)
        throw Error("time-invariant tree must carry slice -1 throughout");
    cur.tree = *t_minus1;
    cur.output_partition = {cur.tree.leaves()};
  }

  TreeObject tmpl_obj{tmpl, {tmpl.leaves()}};
  for (int t = 0; t <= horizon; ++t) {
    if (cur.empty()) {
      cur = merge(cur, {tmpl_obj}, rp);
      continue;
    }
    std::vector<std::optional<TreeObject>> hmap;
    bool any = false;
    for (const auto& block : cur.output_partition) {
      const bool term = is_terminating_leaf(cur.tree, block.front(), kind, terminating);
      if (term) {
        hmap.emplace_back(std::nullopt);
      } else {
        hmap.emplace_back(tmpl_obj);
        any = true;
      }
    }
    if (!any) break;  // nothing left to unfold
    cur = merge(cur, hmap, rp);
  }
  return cur;
}

namespace {

// Deepest ancestor inside the time-invariant prefix, or kNoVertex.
VertexId invariant_anchor(const EventTree& t, VertexId v) {
  VertexId anchor = kNoVertex;
  for (VertexId cur = v; cur != kNoVertex; cur = t.vertex(cur).parent)
    if (t.vertex(cur).time_slice == -1) {
      anchor = cur;
      break;
    }
  return anchor;
}

// Label- and slice-shifted comparison of the unfoldings of a and b, clipped
// at the truncation horizon of a's side.
bool subtrees_replay(const EventTree& t, VertexId a, VertexId b, int shift, int horizon) {
  const TreeVertex& va = t.vertex(a);
  const TreeVertex& vb = t.vertex(b);
  if (va.kind == VertexKind::leaf) {
    // At the truncation frontier the continuation is unknowable.
    if (va.time_slice >= horizon) return true;
    return vb.kind == VertexKind::leaf;
  }
  if (vb.kind == VertexKind::leaf) return false;
  if (va.children.size() != vb.children.size()) return false;
  for (VertexId ca : va.children) {
    const TreeVertex& cva = t.vertex(ca);
    VertexId cb = t.child_by_label(b, cva.label);
    if (cb == kNoVertex) return false;
    if (cva.time_slice != t.vertex(cb).time_slice + shift) return false;
    if (!subtrees_replay(t, ca, cb, shift, horizon)) return false;
  }
  return true;
}

}  // namespace

PeriodicityReport check_periodic(const TreeObject& obj, int T) {
  PeriodicityReport rep;
  if (obj.empty()) return rep;
  const EventTree& t = obj.tree;
  const int horizon = t.max_slice();
  const bool has_invariant = !t.empty() && t.vertex(t.root()).time_slice == -1;

  std::vector<VertexId> late, early;
  for (VertexId s : t.situations()) {
    const int act = t.active_slice(s);
    if (act > T)
      late.push_back(s);
    else if (act >= 0)
      early.push_back(s);
  }
  for (VertexId sa : late) {
    const int ta = t.active_slice(sa);
    const VertexId anchor_a = has_invariant ? invariant_anchor(t, sa) : kNoVertex;
    bool matched = false;
    for (VertexId sb : early) {
      const int tb = t.active_slice(sb);
      if (has_invariant && invariant_anchor(t, sb) != anchor_a) continue;
      if (subtrees_replay(t, sa, sb, ta - tb, horizon)) {
        matched = true;
        break;
      }
    }
    if (!matched) {
      rep.periodic = false;
      rep.witness = sa;
      rep.detail = "situation " + std::to_string(sa) + " at slice " + std::to_string(ta) +
                   " replays no situation at slices 0.." + std::to_string(T);
      return rep;
    }
  }
  return rep;
}

}  // namespace ntdceg
