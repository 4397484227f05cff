#include "ntdceg/staged_tree.hpp"

#include <algorithm>
#include <cmath>

namespace ntdceg {

double StageDistributions::prob(int stage, const std::string& canonical_label) const {
  const auto& d = dist.at(stage);
  auto it = d.find(canonical_label);
  if (it == d.end())
    throw Error("stage has no probability for label '" + canonical_label + "'");
  return it->second;
}

double StagedTree::edge_prob(VertexId c) const {
  if (!probs.has_value()) throw Error("staged tree carries no probability measure");
  const TreeVertex& cv = tree.vertex(c);
  if (cv.parent == kNoVertex) throw Error("root has no incoming edge");
  const int stage = stages.stage_of.at(cv.parent);
  return probs->prob(stage, stages.to_canonical(cv.parent, cv.label));
}

namespace {

std::vector<std::string> sorted_labels(const EventTree& t, VertexId s) {
  auto ls = t.floret(s).labels();
  std::sort(ls.begin(), ls.end());
  return ls;
}

}  // namespace

StagedTree assign_stages(const EventTree& tree, const std::vector<StageDecl>& decls) {
  tree.check_invariants();
  StagedTree st;
  st.tree = tree;
  st.stages.stage_of.assign(tree.size(), kNoStage);

  for (const StageDecl& d : decls) {
    if (d.members.empty()) throw Error("stage '" + d.name + "' has no members");
    const int id = st.stages.stage_count();
    VertexId canon = *std::min_element(d.members.begin(), d.members.end());
    std::vector<std::string> canon_labels = tree.floret(canon).labels();
    std::vector<std::string> canon_sorted = canon_labels;
    std::sort(canon_sorted.begin(), canon_sorted.end());

    for (VertexId m : d.members) {
      if (!tree.is_situation(m))
        throw Error("stage '" + d.name + "' lists a leaf; only situations are staged");
      if (st.stages.stage_of[m] != kNoStage)
        throw Error("situation " + std::to_string(m) + " assigned to two stages");
      st.stages.stage_of[m] = id;

      const auto member_sorted = sorted_labels(tree, m);
      if (member_sorted.size() != canon_sorted.size())
        throw Error("stage '" + d.name + "': members disagree on out-degree");
      auto mit = d.maps.find(m);
      if (mit == d.maps.end()) {
        if (member_sorted != canon_sorted)
          throw Error("stage '" + d.name + "': member " + std::to_string(m) +
                      " has labels outside the stage's label set and no declared map");
      } else {
        // Declared bijection: canonical label -> member label.
        std::set<std::string> image;
        for (const auto& [from, to] : mit->second) {
          if (std::find(canon_sorted.begin(), canon_sorted.end(), from) == canon_sorted.end())
            throw Error("stage '" + d.name + "': map source '" + from +
                        "' is not a canonical label");
          if (std::find(member_sorted.begin(), member_sorted.end(), to) == member_sorted.end())
            throw Error("stage '" + d.name + "': map target '" + to +
                        "' is not a label of member " + std::to_string(m));
          if (!image.insert(to).second)
            throw Error("stage '" + d.name + "': declared map is not injective");
          if (from != to) st.stages.bijections[{m, to}] = from;
        }
        if (image.size() != canon_sorted.size())
          throw Error("stage '" + d.name + "': declared map is not total");
        if (member_sorted == canon_sorted && image != std::set<std::string>(
                                                 canon_sorted.begin(), canon_sorted.end()))
          throw Error("stage '" + d.name + "': non-identity map between equal label sets");
      }
    }
    st.stages.stage_names.push_back(d.name);
    st.stages.canonical_labels.push_back(canon_labels);
  }

  // Uncovered situations become singleton stages.
  for (VertexId s : tree.situations()) {
    if (st.stages.stage_of[s] != kNoStage) continue;
    const int id = st.stages.stage_count();
    st.stages.stage_of[s] = id;
    st.stages.stage_names.push_back("s" + std::to_string(s));
    st.stages.canonical_labels.push_back(tree.floret(s).labels());
  }

  // Members of one stage with equal label sets must agree on the mapping,
  // otherwise colour-based position computation would be unsound.
  for (VertexId a : tree.situations()) {
    for (VertexId b : tree.situations()) {
      if (a >= b || st.stages.stage_of[a] != st.stages.stage_of[b]) continue;
      if (sorted_labels(tree, a) != sorted_labels(tree, b)) continue;
      for (const std::string& l : tree.floret(a).labels())
        if (st.stages.to_canonical(a, l) != st.stages.to_canonical(b, l))
          throw Error("stage '" + st.stages.stage_names[st.stages.stage_of[a]] +
                      "': members with equal label sets carry different label maps");
    }
  }
  return st;
}

StagedTree finest_staging(const EventTree& tree) { return assign_stages(tree, {}); }

void attach_probabilities(StagedTree& st,
                          const std::vector<std::map<std::string, double>>& by_stage) {
  if (static_cast<int>(by_stage.size()) != st.stages.stage_count())
    throw Error("expected one distribution per stage");
  for (int u = 0; u < st.stages.stage_count(); ++u) {
    const auto& d = by_stage[u];
    std::set<std::string> expect(st.stages.canonical_labels[u].begin(),
                                 st.stages.canonical_labels[u].end());
    std::set<std::string> got;
    double sum = 0;
    for (const auto& [l, p] : d) {
      if (!expect.count(l))
        throw Error("stage '" + st.stages.stage_names[u] + "': label '" + l +
                    "' is not in its label set");
      if (p < 0.0 || p > 1.0)
        throw Error("stage '" + st.stages.stage_names[u] + "': probability out of [0,1]");
      got.insert(l);
      sum += p;
    }
    if (got != expect)
      throw Error("stage '" + st.stages.stage_names[u] +
                  "': distribution must cover exactly the stage's label set");
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw Error("stage '" + st.stages.stage_names[u] + "': distribution sums to " +
                  std::to_string(sum));
  }
  StageDistributions sd;
  sd.dist = by_stage;
  st.probs = std::move(sd);
}

double path_probability(const StagedTree& st, VertexId v) {
  if (!st.probs.has_value()) throw Error("staged tree carries no probability measure");
  double p = 1.0;
  for (VertexId cur = v; st.tree.vertex(cur).parent != kNoVertex;
       cur = st.tree.vertex(cur).parent)
    p *= st.edge_prob(cur);
  return p;
}

TimeHomogeneityReport check_time_homogeneous(const StagedTree& st, int N, int T) {
  TimeHomogeneityReport rep;
  std::map<std::vector<std::string>, VertexId> seen;
  bool any_pair = false;
  for (VertexId s : st.tree.situations()) {
    if (st.tree.active_slice(s) < T) continue;
    auto sig = st.tree.xi(s, N);
    auto [it, fresh] = seen.try_emplace(std::move(sig), s);
    if (fresh) continue;
    any_pair = true;
    if (st.stage_of(it->second) != st.stage_of(s)) {
      rep.holds = false;
      rep.violation = {it->second, s};
      rep.detail = "situations " + std::to_string(it->second) + " and " + std::to_string(s) +
                   " share the last-" + std::to_string(N) +
                   "-slice history but lie in different stages";
      return rep;
    }
  }
  const int eta = st.tree.empty() || st.tree.vertex(st.tree.root()).time_slice >= 0 ? 1 : 0;
  const int needed = 2 * N - eta - 1;
  if (st.tree.max_slice() < needed && any_pair) {
    rep.certified = false;
    rep.detail = "truncation reaches slice " + std::to_string(st.tree.max_slice()) +
                 " but certifying needs " + std::to_string(needed);
  } else if (st.tree.max_slice() < needed && !any_pair) {
    rep.detail = "vacuous: no two situations share a signature in the truncation";
  }
  return rep;
}

ExtendedStagedTree extend_staged(const StagedTree& base, const TogInfo& tog, int N,
                                 int horizon) {
  if (N < 2) throw Error("N must be at least 2");
  const int base_horizon = base.tree.max_slice();
  if (base_horizon < N - 1)
    throw Error("staged tree must reach slice " + std::to_string(N - 1));

  // xi(., N-1) signature -> entry situation of slice N-1.
  std::map<std::vector<std::string>, VertexId> entry_by_sig;
  for (VertexId s : base.tree.situations()) {
    if (!base.tree.is_entry(s) || base.tree.active_slice(s) != N - 1) continue;
    auto sig = base.tree.xi(s, N - 1);
    if (!entry_by_sig.emplace(std::move(sig), s).second)
      throw Error("two slice-" + std::to_string(N - 1) +
                  " entry situations share a history signature");
  }

  ExtendedStagedTree ext;
  ext.st = base;
  ext.source.resize(base.tree.size());
  for (VertexId v = 0; v < base.tree.size(); ++v) ext.source[v] = v;

  for (int t = base_horizon; t < horizon; ++t) {
    const EventTree& cur = ext.st.tree;
    TreeBuilder b;
    std::vector<VertexId> map(cur.size(), kNoVertex);  // cur id -> builder id
    std::vector<VertexId> prov;                        // builder id -> base vertex id
    map[cur.root()] = b.add_root(cur.vertex(cur.root()).time_slice);
    prov.push_back(ext.source[cur.root()]);
    for (VertexId v = 0; v < cur.size(); ++v) {
      for (VertexId c : cur.vertex(v).children) {
        map[c] = b.add_child(map[v], cur.vertex(c).label, cur.vertex(c).time_slice);
        prov.push_back(ext.source[c]);
      }
    }

    const int shift = t + 1 - (N - 1);
    bool grafted = false;
    for (VertexId leaf : continuing_leaves(cur, tog.kind, tog.terminating)) {
      if (cur.vertex(leaf).time_slice != t) continue;
      auto it = entry_by_sig.find(cur.xi(leaf, N - 1));
      if (it == entry_by_sig.end())
        throw Error("frontier leaf " + std::to_string(leaf) +
                    " has no matching entry situation; the staged tree does not unfold "
                    "from a homogeneous template");
      const VertexId entry = it->second;
      prov[map[leaf]] = entry;  // the leaf is identified with the entry situation
      grafted = true;
      std::vector<std::pair<VertexId, VertexId>> stack = {{entry, map[leaf]}};
      while (!stack.empty()) {
        auto [src, dst] = stack.back();
        stack.pop_back();
        for (VertexId c : base.tree.vertex(src).children) {
          const TreeVertex& cv = base.tree.vertex(c);
          VertexId nc = b.add_child(dst, cv.label, cv.time_slice + shift);
          prov.push_back(c);
          stack.push_back({c, nc});
        }
      }
    }
    if (!grafted) break;  // every branch already terminated

    std::vector<VertexId> b2f;
    EventTree next = b.build(&b2f);
    std::vector<VertexId> new_source(next.size(), kNoVertex);
    for (size_t bid = 0; bid < prov.size(); ++bid) new_source[b2f[bid]] = prov[bid];

    StagedTree stepped;
    stepped.tree = std::move(next);
    stepped.stages.stage_names = base.stages.stage_names;
    stepped.stages.canonical_labels = base.stages.canonical_labels;
    stepped.stages.stage_of.assign(stepped.tree.size(), kNoStage);
    for (VertexId v = 0; v < stepped.tree.size(); ++v) {
      if (!stepped.tree.is_situation(v)) continue;
      stepped.stages.stage_of[v] = base.stages.stage_of.at(new_source[v]);
      for (const std::string& l : stepped.tree.floret(v).labels()) {
        const std::string& canon = base.stages.to_canonical(new_source[v], l);
        if (canon != l) stepped.stages.bijections[{v, l}] = canon;
      }
    }
    stepped.probs = base.probs;
    ext.st = std::move(stepped);
    ext.source = std::move(new_source);
  }
  return ext;
}

}  // namespace ntdceg
