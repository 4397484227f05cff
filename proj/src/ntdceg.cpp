#include "ntdceg/ntdceg.hpp"

#include <algorithm>

namespace ntdceg {

std::set<VKey> NTDceg::sink_set() const {
  std::set<VKey> s(slice_sinks.begin(), slice_sinks.end());
  if (has_terminal_sink) s.insert(VKey::sink());
  return s;
}

std::vector<VKey> NTDceg::entry_positions(int t) const {
  const int first = eta == 0 ? -1 : 0;
  if (t == first) return {root};
  std::set<VKey> out;
  for (const CGEdge& e : graph.edges()) {
    if (e.to.is_sink() || e.mark == EdgeMark::plain) continue;
    if (!e.to.is_sink() && graph.vertex(e.to).slice == t) out.insert(e.to);
  }
  return {out.begin(), out.end()};
}

CStar build_c_star(const StagedTree& st, const TogInfo& tog, int N) {
  if (N < 2) throw Error("N must be at least 2");
  const EventTree& t = st.tree;
  if (t.max_slice() != N - 1)
    throw Error("expected a staged tree truncated at slice " + std::to_string(N - 1));

  // Entry situations of slice N-1, by their history signature.
  std::map<std::vector<std::string>, VertexId> entry_by_sig;
  for (VertexId s : t.situations())
    if (t.is_entry(s) && t.active_slice(s) == N - 1)
      if (!entry_by_sig.emplace(t.xi(s, N - 1), s).second)
        throw Error("two entry situations share a history signature");

  CStar out;
  for (VertexId s : t.situations()) {
    VKey k = VKey::pos(s);
    out.graph.add_vertex({k, st.stage_of(s), t.active_slice(s)});
    out.vertex_of[s] = k;
  }

  bool any_terminal = false;
  std::set<int> sink_slices;
  for (VertexId l : t.leaves()) {
    const int slice = t.vertex(l).time_slice;
    const bool continuing =
        !is_terminating_leaf(t, l, tog.kind, tog.terminating) && slice == N - 1;
    if (continuing) continue;
    if (slice <= N - 2)
      sink_slices.insert(slice);
    else
      any_terminal = true;
  }
  for (int s : sink_slices) out.graph.add_vertex({VKey::sink_at(s), kNoColour, 0});
  if (any_terminal) out.graph.add_vertex({VKey::sink(), kNoColour, 0});

  const bool has_probs = st.probs.has_value();
  for (VertexId v : t.situations()) {
    for (VertexId c : t.vertex(v).children) {
      const TreeVertex& cv = t.vertex(c);
      CGEdge e;
      e.from = out.vertex_of[v];
      e.label = cv.label;
      if (has_probs) e.prob = st.edge_prob(c);
      if (cv.kind == VertexKind::situation) {
        e.to = out.vertex_of[c];
        e.mark = t.is_entry(c) ? EdgeMark::temporal : EdgeMark::plain;
      } else if (!is_terminating_leaf(t, c, tog.kind, tog.terminating) &&
                 cv.time_slice == N - 1) {
        auto it = entry_by_sig.find(t.xi(c, N - 1));
        if (it == entry_by_sig.end())
          throw Error("continuing leaf " + std::to_string(c) +
                      " matches no entry situation; the tree is not periodic");
        e.to = out.vertex_of[it->second];
        e.mark = EdgeMark::cyclical;
      } else {
        e.to = cv.time_slice <= N - 2 ? VKey::sink_at(cv.time_slice) : VKey::sink();
        e.mark = EdgeMark::plain;
      }
      out.graph.add_edge(std::move(e));
    }
  }
  out.graph.check_invariants();
  return out;
}

NTDceg build_ntdceg(const StagedTree& st, const TogInfo& tog, int N) {
  if (N < 2) throw Error("N must be at least 2");
  st.tree.check_invariants();

  NTDceg m;
  m.N = N;
  m.eta = tog.eta();
  m.tog = tog;
  m.st = std::make_shared<StagedTree>(st);

  const int ext_horizon = 2 * N - m.eta - 1;
  auto ext = extend_staged(st, tog, N, ext_horizon);
  auto th = check_time_homogeneous(ext.st, N - 1, N - 1);
  if (!th.holds)
    throw Error("staged tree is not time-homogeneous after slice " + std::to_string(N - 1) +
                ": " + th.detail);
  m.st_ext = std::make_shared<ExtendedStagedTree>(std::move(ext));

  CStar cstar = build_c_star(st, tog, N);
  Partition p = compute_positions(cstar.graph, PositionMode::t_position(N - 1));

  // Position blocks take w-numbers in order of their least situation id;
  // sink blocks keep their sink identity.
  std::map<VKey, VKey> rename;
  int next_w = 0;
  for (const auto& block : p.blocks) {
    if (block.front().is_sink())
      rename[block.front()] = block.front();
    else
      rename[block.front()] = VKey::pos(next_w++);
  }
  m.graph = quotient_graph(cstar.graph, p, [&](const std::vector<VKey>& block) {
    return rename.at(block.front());
  });

  for (const auto& [sit, key] : cstar.vertex_of)
    m.position_of[sit] = rename.at(p.blocks[p.block_of.at(key)].front());
  for (VertexId v = 0; v < m.st_ext->st.tree.size(); ++v) {
    if (!m.st_ext->st.tree.is_situation(v)) continue;
    m.ext_position_of[v] = m.position_of.at(m.st_ext->source[v]);
  }

  for (const auto& [k, v] : m.graph.vertices()) {
    if (k.sort == VKey::Sort::sink_slice) m.slice_sinks.push_back(k);
    if (k.sort == VKey::Sort::sink_inf) m.has_terminal_sink = true;
  }
  std::set<VKey> heads, tails;
  for (const CGEdge& e : m.graph.edges()) {
    if (e.mark != EdgeMark::cyclical) continue;
    tails.insert(e.from);
    heads.insert(e.to);
  }
  m.heads.assign(heads.begin(), heads.end());
  m.tails.assign(tails.begin(), tails.end());
  if (m.heads.empty())
    throw Error("no cyclical temporal edges; the process does not recur");

  m.root = m.position_of.at(st.tree.root());
  m.stage_names = st.stages.stage_names;
  m.stage_labels = st.stages.canonical_labels;
  m.has_probs = st.probs.has_value();
  if (m.has_probs) m.stage_dists = st.probs->dist;
  m.graph.check_invariants();
  return m;
}

// ---- Subgraph algebra --------------------------------------------------

namespace {

// Tails/heads of temporal edges whose head opens slice t+1.
std::pair<std::set<VKey>, std::set<VKey>> boundary_sets(const NTDceg& m, int t) {
  std::set<VKey> tails, heads;
  for (const CGEdge& e : m.graph.edges()) {
    if (e.mark != EdgeMark::temporal || e.to.is_sink()) continue;
    if (m.graph.vertex(e.to).slice == t + 1) {
      tails.insert(e.from);
      heads.insert(e.to);
    }
  }
  return {tails, heads};
}

std::set<VKey> slice_sinks_upto(const NTDceg& m, int t) {
  std::set<VKey> s;
  for (const VKey& k : m.slice_sinks)
    if (k.base <= t) s.insert(k);
  return s;
}

ColouredGraph induced(const ColouredGraph& g, const std::set<VKey>& verts,
                      bool drop_cyclical) {
  ColouredGraph out;
  for (const VKey& k : verts) out.add_vertex(g.vertex(k));
  for (const CGEdge& e : g.edges()) {
    if (drop_cyclical && e.mark == EdgeMark::cyclical) continue;
    if (verts.count(e.from) && verts.count(e.to)) out.add_edge(e);
  }
  return out;
}

}  // namespace

ColouredGraph initial_graph(const NTDceg& m) {
  auto [tails, heads] = boundary_sets(m, m.N - 2);
  std::set<VKey> target = tails;
  for (const VKey& k : slice_sinks_upto(m, m.N - 2)) target.insert(k);
  std::set<VKey> verts = m.graph.antecedents(target, /*include_cyclical=*/false);
  verts.insert(target.begin(), target.end());
  return induced(m.graph, verts, /*drop_cyclical=*/true);
}

ColouredGraph r_link_graph(const NTDceg& m, int r) {
  if (r != 0 && r != 1) throw Error("link graph index must be 0 or 1");
  auto [tails, heads] = boundary_sets(m, m.N - 2);
  ColouredGraph out;
  const int tag_slice = (m.N - 1) * r;
  for (const VKey& k : tails) out.add_vertex(m.graph.vertex(k));
  for (const VKey& k : heads) {
    CGVertex v = m.graph.vertex(k);
    if (r == 1) {
      v.key.tag = tag_slice;
    }
    out.add_vertex(v);
  }
  for (const CGEdge& e : m.graph.edges()) {
    if (e.mark != EdgeMark::temporal) continue;
    if (!tails.count(e.from) || !heads.count(e.to)) continue;
    CGEdge ne = e;
    if (r == 1) ne.to.tag = tag_slice;
    out.add_edge(std::move(ne));
  }
  return out;
}

ColouredGraph time_homogeneous_graph(const NTDceg& m) {
  ColouredGraph d_i = initial_graph(m);
  std::set<VKey> verts;
  for (const auto& [k, v] : m.graph.vertices())
    if (!d_i.has_vertex(k)) verts.insert(k);
  // E_H = E minus (E_I and the transition edges); both live outside `verts`.
  return induced(m.graph, verts, /*drop_cyclical=*/false);
}

ColouredGraph repeating_graph(const NTDceg& m) {
  ColouredGraph d_h = time_homogeneous_graph(m);
  ColouredGraph out;
  for (const auto& [k, v] : d_h.vertices()) out.add_vertex(v);
  for (const CGEdge& e : d_h.edges())
    if (e.mark != EdgeMark::cyclical) out.add_edge(e);
  return out;
}

ColouredGraph link_graph(const NTDceg& m) {
  ColouredGraph out;
  for (const VKey& k : m.tails) out.add_vertex(m.graph.vertex(k));
  for (const VKey& k : m.heads) out.add_vertex(m.graph.vertex(k));
  for (const CGEdge& e : m.graph.edges())
    if (e.mark == EdgeMark::cyclical) out.add_edge(e);
  return out;
}

ColouredGraph relabel_slice(const ColouredGraph& g, int t, int N) {
  ColouredGraph out;
  const int shift = t - (N - 1);
  auto map_key = [&](const VKey& k) {
    if (k.is_sink()) return k;
    VKey nk = k;
    nk.tag = t;
    return nk;
  };
  for (const auto& [k, v] : g.vertices()) {
    CGVertex nv = v;
    nv.key = map_key(k);
    if (!k.is_sink()) nv.slice = v.slice + shift;
    out.add_vertex(nv);
  }
  for (const CGEdge& e : g.edges()) {
    CGEdge ne = e;
    ne.from = map_key(e.from);
    ne.to = map_key(e.to);
    out.add_edge(std::move(ne));
  }
  return out;
}

ColouredGraph link_graph_at(const NTDceg& m, int t) {
  ColouredGraph out;
  for (const VKey& k : m.tails) {
    CGVertex v = m.graph.vertex(k);
    v.key.tag = t;
    v.slice = t;
    out.add_vertex(v);
  }
  for (const VKey& k : m.heads) {
    CGVertex v = m.graph.vertex(k);
    v.key.tag = t + 1;
    v.slice = t + 1;
    out.add_vertex(v);
  }
  for (const CGEdge& e : m.graph.edges()) {
    if (e.mark != EdgeMark::cyclical) continue;
    CGEdge ne = e;
    ne.from.tag = t;
    ne.to.tag = t + 1;
    out.add_edge(std::move(ne));
  }
  return out;
}

ColouredGraph repeating_span(const NTDceg& m, int ta, int tb) {
  ColouredGraph out;
  if (tb < ta) return out;
  ColouredGraph d_r = repeating_graph(m);
  out = relabel_slice(d_r, ta, m.N);
  for (int t = ta; t < tb; ++t) {
    out = graph_union(out, link_graph_at(m, t));
    out = graph_union(out, relabel_slice(d_r, t + 1, m.N));
  }
  return out;
}

Decomposition decompose(const NTDceg& m) {
  Decomposition d;
  d.d_i = initial_graph(m);
  d.g_0 = r_link_graph(m, 0);
  d.g_1 = r_link_graph(m, 1);
  d.d_h = time_homogeneous_graph(m);
  d.d_r = repeating_graph(m);
  d.g_2 = link_graph(m);
  return d;
}

namespace {

// Merges every tagged slice-(t+1) head into the terminal sink.
ColouredGraph close_heads(const NTDceg& m, const ColouredGraph& g, int t) {
  std::set<VKey> doomed;
  for (const VKey& k : m.heads) {
    VKey tagged = k;
    tagged.tag = t + 1;
    if (g.has_vertex(tagged)) doomed.insert(tagged);
  }
  ColouredGraph out;
  out.add_vertex({VKey::sink(), kNoColour, 0});
  for (const auto& [k, v] : g.vertices()) {
    if (doomed.count(k)) {
      if (!g.out_edges(k).empty())
        throw Error("closed head " + k.str() + " still has out-edges");
      continue;
    }
    if (k != VKey::sink()) out.add_vertex(v);
  }
  for (const CGEdge& e : g.edges()) {
    CGEdge ne = e;
    if (doomed.count(ne.to)) ne.to = VKey::sink();
    out.add_edge(std::move(ne));
  }
  return out;
}

// Redirects every per-slice sink into the terminal one.
ColouredGraph gather_sinks(const ColouredGraph& g) {
  bool any = false;
  for (const auto& [k, v] : g.vertices())
    if (k.sort == VKey::Sort::sink_slice) any = true;
  if (!any) return g;
  ColouredGraph out;
  out.add_vertex({VKey::sink(), kNoColour, 0});
  for (const auto& [k, v] : g.vertices())
    if (!k.is_sink()) out.add_vertex(v);
  for (const CGEdge& e : g.edges()) {
    CGEdge ne = e;
    if (ne.to.is_sink()) ne.to = VKey::sink();
    out.add_edge(std::move(ne));
  }
  return out;
}

// Initial graph of horizon t <= N-2 with everything beyond folded into the
// terminal sink.
ColouredGraph initial_infinity(const NTDceg& m, int t) {
  auto [tails_t, heads_t] = boundary_sets(m, t);
  std::set<VKey> target = tails_t;
  for (const VKey& k : slice_sinks_upto(m, t)) target.insert(k);
  std::set<VKey> verts = m.graph.antecedents(target, false);
  verts.insert(tails_t.begin(), tails_t.end());

  std::set<VKey> redirect = slice_sinks_upto(m, t);
  redirect.insert(heads_t.begin(), heads_t.end());

  ColouredGraph out;
  for (const VKey& k : verts) out.add_vertex(m.graph.vertex(k));
  out.add_vertex({VKey::sink(), kNoColour, 0});
  for (const CGEdge& e : m.graph.edges()) {
    if (e.mark == EdgeMark::cyclical) continue;
    if (!verts.count(e.from)) continue;
    if (verts.count(e.to)) {
      out.add_edge(e);
    } else if (redirect.count(e.to)) {
      CGEdge ne = e;
      ne.to = VKey::sink();
      out.add_edge(std::move(ne));
    }
  }
  return out;
}

}  // namespace

Ceg ceg_at(const NTDceg& m, int t) {
  if (t < 0) throw Error("horizon must be nonnegative");
  const int N = m.N;
  const int eta = m.eta;
  ColouredGraph assembled;
  if (t <= N - 2) {
    assembled = initial_infinity(m, t);
  } else {
    ColouredGraph core = graph_union(initial_graph(m), r_link_graph(m, 1));
    if (t <= 2 * N - eta - 2) {
      ColouredGraph body = graph_union(repeating_span(m, N - 1, t), link_graph_at(m, t));
      assembled = graph_union(core, close_heads(m, body, t));
    } else {
      ColouredGraph spine = repeating_span(m, N - 1, t - N + eta);
      ColouredGraph closure = graph_union(repeating_span(m, t - N + 1 + eta, t),
                                          link_graph_at(m, t));
      closure = close_heads(m, closure, t);
      assembled = graph_union(graph_union(core, spine),
                              graph_union(link_graph_at(m, t - N + eta), closure));
    }
  }
  Ceg ceg;
  ceg.graph = gather_sinks(contract_phi(assembled));
  ceg.horizon = t;
  ceg.root = m.root;
  ceg.sink = VKey::sink();
  ceg.graph.check_invariants();
  if (!ceg.graph.is_acyclic()) throw Error("reconstructed graph has a cycle");
  return ceg;
}

Ceg direct_ceg(const StagedTree& st) {
  st.tree.check_invariants();
  const EventTree& t = st.tree;
  ColouredGraph g;
  for (VertexId s : t.situations())
    g.add_vertex({VKey::pos(s), st.stage_of(s), t.active_slice(s)});
  bool any_leaf = t.leaf_count() > 0;
  if (any_leaf) g.add_vertex({VKey::sink(), kNoColour, 0});
  const bool has_probs = st.probs.has_value();
  for (VertexId v : t.situations()) {
    for (VertexId c : t.vertex(v).children) {
      CGEdge e;
      e.from = VKey::pos(v);
      e.to = t.is_leaf(c) ? VKey::sink() : VKey::pos(c);
      e.label = t.vertex(c).label;
      e.mark = !t.is_leaf(c) && t.is_entry(c) ? EdgeMark::temporal : EdgeMark::plain;
      if (has_probs) e.prob = st.edge_prob(c);
      g.add_edge(std::move(e));
    }
  }

  Partition p = compute_positions(g, PositionMode::infinity_position());
  std::map<VKey, VKey> rename;
  int next_w = 0;
  for (const auto& block : p.blocks) {
    rename[block.front()] =
        block.front().is_sink() ? block.front() : VKey::pos(next_w++);
  }
  Ceg ceg;
  ceg.graph = quotient_graph(g, p, [&](const std::vector<VKey>& block) {
    return rename.at(block.front());
  });
  ceg.horizon = t.max_slice();
  ceg.root = rename.at(p.blocks[p.block_of.at(VKey::pos(t.root()))].front());
  ceg.sink = VKey::sink();
  return ceg;
}

bool graphs_equal(const ColouredGraph& a, const ColouredGraph& b) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  auto ai = a.vertices().begin();
  auto bi = b.vertices().begin();
  for (; ai != a.vertices().end(); ++ai, ++bi) {
    if (ai->first != bi->first) return false;
    if (ai->second.colour != bi->second.colour || ai->second.slice != bi->second.slice)
      return false;
  }
  for (size_t i = 0; i < a.edges().size(); ++i) {
    const CGEdge& ea = a.edges()[i];
    const CGEdge& eb = b.edges()[i];
    if (ea.from != eb.from || ea.to != eb.to || ea.label != eb.label || ea.mark != eb.mark)
      return false;
    const bool pa = ea.has_prob(), pb = eb.has_prob();
    if (pa != pb || (pa && ea.prob != eb.prob)) return false;
  }
  return true;
}

}  // namespace ntdceg
