#include "ntdceg/event_tree.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace ntdceg {

int EventTree::max_slice() const {
  int m = -1;
  for (const auto& v : verts_) m = std::max(m, v.time_slice);
  return m;
}

int EventTree::active_slice(VertexId v) const {
  const TreeVertex& tv = vertex(v);
  if (tv.kind == VertexKind::leaf) return tv.time_slice + 1;
  if (tv.children.empty()) throw Error("situation without children");
  return verts_[tv.children.front()].time_slice;
}

bool EventTree::is_entry(VertexId v) const {
  const TreeVertex& tv = vertex(v);
  if (tv.kind == VertexKind::leaf) return false;
  if (tv.parent == kNoVertex) return true;
  return tv.time_slice < active_slice(v);
}

std::vector<VertexId> EventTree::situations() const {
  std::vector<VertexId> out;
  for (const auto& v : verts_)
    if (v.kind == VertexKind::situation) out.push_back(v.id);
  return out;
}

std::vector<VertexId> EventTree::leaves() const {
  std::vector<VertexId> out;
  for (const auto& v : verts_)
    if (v.kind == VertexKind::leaf) out.push_back(v.id);
  return out;
}

int EventTree::situation_count() const {
  int n = 0;
  for (const auto& v : verts_) n += v.kind == VertexKind::situation;
  return n;
}

int EventTree::leaf_count() const {
  int n = 0;
  for (const auto& v : verts_) n += v.kind == VertexKind::leaf;
  return n;
}

VertexId EventTree::situation_at(int k) const {
  int n = 0;
  for (const auto& v : verts_)
    if (v.kind == VertexKind::situation && n++ == k) return v.id;
  throw Error("situation index out of range: " + std::to_string(k));
}

VertexId EventTree::leaf_at(int k) const {
  int n = 0;
  for (const auto& v : verts_)
    if (v.kind == VertexKind::leaf && ++n == k) return v.id;
  throw Error("leaf index out of range: " + std::to_string(k));
}

Floret EventTree::floret(VertexId s) const {
  const TreeVertex& tv = vertex(s);
  if (tv.kind == VertexKind::leaf)
    throw Error("vertex " + std::to_string(s) + " is a leaf, not a situation");
  Floret f;
  f.root = s;
  for (VertexId c : tv.children) f.children.emplace_back(verts_[c].label, c);
  return f;
}

VertexId EventTree::child_by_label(VertexId v, std::string_view label) const {
  for (VertexId c : vertex(v).children)
    if (verts_[c].label == label) return c;
  return kNoVertex;
}

EventPath EventTree::path_to(VertexId v) const {
  EventPath p;
  std::vector<VertexId> rev;
  for (VertexId cur = v; cur != kNoVertex; cur = vertex(cur).parent) rev.push_back(cur);
  std::reverse(rev.begin(), rev.end());
  p.vertices = rev;
  for (size_t i = 1; i < rev.size(); ++i) {
    p.labels.push_back(verts_[rev[i]].label);
    p.tau.push_back(verts_[rev[i]].time_slice);
  }
  return p;
}

std::vector<std::string> EventTree::path_labels(VertexId v) const {
  return path_to(v).labels;
}

std::vector<std::string> EventTree::xi(VertexId v, int k) const {
  const EventPath p = path_to(v);
  const int cutoff = active_slice(v) - k;
  std::vector<std::string> out;
  for (size_t i = 0; i < p.labels.size(); ++i)
    if (p.tau[i] == -1 || p.tau[i] >= cutoff) out.push_back(p.labels[i]);
  return out;
}

std::vector<VertexId> EventTree::resolve_path(const std::vector<std::string>& segments) const {
  std::vector<VertexId> frontier;
  if (empty()) return frontier;
  frontier.push_back(root());
  for (const std::string& seg : segments) {
    std::vector<VertexId> next;
    for (VertexId v : frontier) {
      if (seg == "*") {
        for (VertexId c : vertex(v).children) next.push_back(c);
      } else {
        VertexId c = child_by_label(v, seg);
        if (c != kNoVertex) next.push_back(c);
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

void EventTree::check_invariants() const {
  if (empty()) return;
  if (verts_[0].parent != kNoVertex) throw Error("root has a parent");
  for (size_t i = 0; i < verts_.size(); ++i) {
    const TreeVertex& v = verts_[i];
    if (v.id != static_cast<VertexId>(i)) throw Error("vertex id mismatch");
    if (v.kind == VertexKind::situation && v.children.empty())
      throw Error("situation " + std::to_string(v.id) + " has no children");
    if (v.kind == VertexKind::leaf && !v.children.empty())
      throw Error("leaf " + std::to_string(v.id) + " has children");
    std::set<std::string> labels;
    int child_slice = kNoVertex;
    for (VertexId c : v.children) {
      const TreeVertex& cv = verts_[c];
      if (cv.parent != v.id) throw Error("broken parent link");
      if (!labels.insert(cv.label).second)
        throw Error("duplicate sibling label '" + cv.label + "' under vertex " +
                    std::to_string(v.id));
      if (child_slice == kNoVertex) child_slice = cv.time_slice;
      if (cv.time_slice != child_slice)
        throw Error("floret of vertex " + std::to_string(v.id) + " spans two slices");
      if (v.parent == kNoVertex && cv.time_slice != v.time_slice)
        throw Error("root slice disagrees with its floret");
      if (v.parent != kNoVertex && cv.time_slice < v.time_slice)
        throw Error("time slice decreases along an edge");
      if (cv.time_slice < -1) throw Error("slice below -1");
    }
  }
}

bool EventTree::same_shape(const EventTree& other) const {
  return canonical_form(*this) == canonical_form(other);
}

VertexId TreeBuilder::add_root(int slice) {
  if (!verts_.empty()) throw Error("root already present");
  TreeVertex v;
  v.id = 0;
  v.kind = VertexKind::leaf;
  v.time_slice = slice;
  verts_.push_back(std::move(v));
  return 0;
}

VertexId TreeBuilder::add_child(VertexId parent, std::string label, int slice) {
  TreeVertex v;
  v.id = static_cast<VertexId>(verts_.size());
  v.kind = VertexKind::leaf;
  v.time_slice = slice;
  v.parent = parent;
  v.label = std::move(label);
  verts_.at(parent).kind = VertexKind::situation;
  verts_.at(parent).children.push_back(v.id);
  verts_.push_back(std::move(v));
  return verts_.back().id;
}

VertexId TreeBuilder::add_child(VertexId parent, std::string label) {
  const TreeVertex& p = verts_.at(parent);
  const int slice =
      p.children.empty() ? p.time_slice : verts_[p.children.front()].time_slice;
  return add_child(parent, std::move(label), slice);
}

EventTree TreeBuilder::build() const { return build(nullptr); }

EventTree TreeBuilder::build(std::vector<VertexId>* builder_to_final) const {
  EventTree t;
  if (builder_to_final) builder_to_final->assign(verts_.size(), kNoVertex);
  if (verts_.empty()) return t;
  // Breadth-first renumbering in declared child order.
  std::vector<VertexId> order;
  std::deque<VertexId> queue = {0};
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (VertexId c : verts_[v].children) queue.push_back(c);
  }
  std::vector<VertexId> new_id(verts_.size(), kNoVertex);
  for (size_t i = 0; i < order.size(); ++i) new_id[order[i]] = static_cast<VertexId>(i);
  if (builder_to_final) *builder_to_final = new_id;
  t.verts_.resize(verts_.size());
  for (size_t i = 0; i < order.size(); ++i) {
    const TreeVertex& src = verts_[order[i]];
    TreeVertex dst;
    dst.id = static_cast<VertexId>(i);
    dst.kind = src.kind;
    dst.time_slice = src.time_slice;
    dst.parent = src.parent == kNoVertex ? kNoVertex : new_id[src.parent];
    dst.label = src.label;
    for (VertexId c : src.children) dst.children.push_back(new_id[c]);
    t.verts_[i] = std::move(dst);
  }
  t.check_invariants();
  return t;
}

std::string canonical_form(const EventTree& t, VertexId from) {
  if (t.empty()) return "";
  const TreeVertex& v = t.vertex(from);
  std::vector<std::string> parts;
  for (VertexId c : v.children)
    parts.push_back(t.vertex(c).label + "@" + std::to_string(t.vertex(c).time_slice) +
                    canonical_form(t, c));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (const auto& p : parts) out += "(" + p + ")";
  out += ")";
  return out;
}

}  // namespace ntdceg
