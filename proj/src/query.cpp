#include "ntdceg/query.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

namespace ntdceg {

std::set<std::string> VariableTable::label_set(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) throw Error("undeclared variable '" + name + "'");
  return {it->second.begin(), it->second.end()};
}

std::optional<std::string> VariableTable::name_of(const std::set<std::string>& fl) const {
  for (const auto& [name, ls] : labels)
    if (std::set<std::string>(ls.begin(), ls.end()) == fl) return name;
  return std::nullopt;
}

namespace {

std::set<std::string> out_label_set(const ColouredGraph& g, const VKey& v) {
  std::set<std::string> s;
  for (const CGEdge* e : g.out_edges(v)) s.insert(e->label);
  return s;
}

int first_slice(const NTDceg& m) { return m.eta == 0 ? -1 : 0; }

}  // namespace

EventQueryResult events_to_positions(const NTDceg& m, const Context& c,
                                     const VariableTable& vars) {
  EventQueryResult out;
  out.symbolic = c.symbolic();
  for (const auto& vc : c.constraints) {
    if (vc.slice.symbolic != out.symbolic)
      throw Error("context mixes absolute and symbolic slices");
    if (!vars.has(vc.var)) throw Error("undeclared variable '" + vc.var + "'");
  }

  int t_max = out.symbolic ? -1 : first_slice(m) - 1;
  for (const auto& vc : c.constraints) t_max = std::max(t_max, vc.slice.value);
  const int target_slice = t_max + 1;
  out.anchor_slice = target_slice;

  // (slice, floret label set) -> allowed labels.
  std::map<std::pair<int, std::set<std::string>>, std::set<std::string>> allow;
  for (const auto& vc : c.constraints) {
    auto key = std::pair(vc.slice.value, vars.label_set(vc.var));
    auto [it, fresh] = allow.emplace(key, vc.allowed);
    if (!fresh) {
      std::set<std::string> inter;
      std::set_intersection(it->second.begin(), it->second.end(), vc.allowed.begin(),
                            vc.allowed.end(), std::inserter(inter, inter.begin()));
      it->second = std::move(inter);
    }
  }

  if (c.constraints.empty()) {
    // No constrained slice: the process stands at its start.
    out.positions.push_back({m.root, m.has_probs ? 1.0 : std::nan("")});
    return out;
  }
  std::vector<std::pair<VKey, int>> starts;
  if (out.symbolic) {
    for (const VKey& k : m.heads) starts.emplace_back(k, 0);
  } else {
    starts.emplace_back(m.root, first_slice(m));
  }

  std::map<VKey, double> reached;
  const bool weighted = m.has_probs;
  std::function<void(const VKey&, int, double)> walk = [&](const VKey& v, int slice,
                                                           double p) {
    if (slice >= target_slice) {
      reached[v] += p;
      return;
    }
    const auto fl = out_label_set(m.graph, v);
    auto it = allow.find({slice, fl});
    for (const CGEdge* e : m.graph.out_edges(v)) {
      if (it != allow.end() && !it->second.count(e->label)) continue;
      if (e->to.is_sink()) continue;  // terminated before the anchor slice
      const int next_slice = slice + (e->mark != EdgeMark::plain ? 1 : 0);
      walk(e->to, next_slice, weighted ? p * e->prob : p);
    }
  };
  for (auto [k, s] : starts) walk(k, s, 1.0);

  if (reached.empty()) {
    out.contradictory = true;
    return out;
  }
  double total = 0;
  for (const auto& [k, w] : reached) total += w;
  for (const auto& [k, w] : reached)
    out.positions.push_back({k, weighted ? w / total : std::nan("")});
  return out;
}

ColouredGraph prune(const NTDceg& m, const std::set<VKey>& w_e) {
  if (w_e.empty()) throw Error("cannot prune to an empty position set");
  for (const VKey& k : w_e)
    if (!m.graph.has_vertex(k)) throw Error("unknown position " + k.str());
  std::set<VKey> keep = m.graph.reachable(w_e);
  ColouredGraph out;
  for (const VKey& k : keep) out.add_vertex(m.graph.vertex(k));
  for (const CGEdge& e : m.graph.edges())
    if (keep.count(e.from) && keep.count(e.to)) out.add_edge(e);
  return out;
}

std::set<std::vector<std::string>> xi_c(const ColouredGraph& g, const VKey& root,
                                        const VKey& w, int k) {
  // invariant_prefixes[v]: the slice-(-1) label subsequences of root-to-v
  // walks (just {()} when there is no time-invariant part).
  std::map<VKey, std::set<std::vector<std::string>>> invariant_prefixes;
  {
    bool changed = true;
    invariant_prefixes[root].insert({});
    while (changed) {
      changed = false;
      for (const CGEdge& e : g.edges()) {
        auto it = invariant_prefixes.find(e.from);
        if (it == invariant_prefixes.end()) continue;
        const bool inv_edge =
            !e.from.is_sink() && g.vertex(e.from).slice == -1 && e.mark == EdgeMark::plain;
        auto& dst = invariant_prefixes[e.to];
        for (const auto& seq : it->second) {
          auto next = seq;
          if (inv_edge) next.push_back(e.label);
          if (dst.insert(std::move(next)).second) changed = true;
        }
      }
    }
  }

  std::map<std::pair<VKey, int>, std::set<std::vector<std::string>>> memo;
  std::function<const std::set<std::vector<std::string>>&(const VKey&, int)> back =
      [&](const VKey& v, int budget) -> const std::set<std::vector<std::string>>& {
    auto key = std::pair(v, budget);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::set<std::vector<std::string>> acc;
    if (v == root) acc.insert({});
    for (const CGEdge* e : g.in_edges(v)) {
      const bool crossing = e->mark != EdgeMark::plain;
      if (crossing && budget == 0) {
        // Window closed: keep only the time-invariant part of the past.
        auto pit = invariant_prefixes.find(v);
        if (pit != invariant_prefixes.end())
          for (const auto& p : pit->second) acc.insert(p);
        continue;
      }
      const auto& sub = back(e->from, crossing ? budget - 1 : budget);
      for (const auto& seq : sub) {
        auto next = seq;
        next.push_back(e->label);
        acc.insert(std::move(next));
      }
    }
    return memo.emplace(key, std::move(acc)).first->second;
  };
  return back(w, k);
}

LegendReport legend_map(const NTDceg& m, int T) {
  if (T < 2 * m.N - m.eta)
    throw Error("legend check needs horizon at least " + std::to_string(2 * m.N - m.eta));
  LegendReport rep;
  rep.horizon = T;
  Ceg c = ceg_at(m, T);
  for (int t = m.N; t <= T - m.N + m.eta; ++t) {
    for (const VKey& head : m.heads) {
      VKey at_t = head, at_base = head;
      at_t.tag = t;
      at_base.tag = m.N - 1;
      if (!c.graph.has_vertex(at_t) || !c.graph.has_vertex(at_base))
        throw Error("relabelled head " + at_t.str() + " missing from the horizon graph");
      const bool equal = xi_c(c.graph, c.root, at_t, m.N - 1) ==
                         xi_c(c.graph, c.root, at_base, m.N - 1);
      rep.entries.push_back({t, head, equal});
      if (!equal) {
        rep.holds = false;
        rep.detail = "history sets differ at slice " + std::to_string(t) + " for " +
                     head.str();
      }
    }
  }
  return rep;
}

// ---- Conditional independence -------------------------------------------

CIResult verify_ci(const NTDceg& m, const CIStatement& s, const VariableTable& vars) {
  CIResult res;
  if (!vars.has(s.target_var)) throw Error("undeclared variable '" + s.target_var + "'");
  const std::set<std::string> target_labels = vars.label_set(s.target_var);

  const bool symbolic = s.target_slice.symbolic;
  for (const auto& [v, sr] : s.claimed) {
    if (sr.symbolic != symbolic) throw Error("statement mixes absolute and symbolic slices");
    if (sr.value > s.target_slice.value)
      throw Error("claimed variable unfolds after the target");
    if (!vars.has(v)) throw Error("undeclared variable '" + v + "'");
  }
  for (const auto& vc : s.conditioning) {
    if (vc.slice.symbolic != symbolic)
      throw Error("statement mixes absolute and symbolic slices");
    if (vc.slice.value > s.target_slice.value)
      throw Error("conditioning beyond the target's slice is not supported");
    if (!vars.has(vc.var)) throw Error("undeclared variable '" + vc.var + "'");
  }

  // (slice, label set) -> allowed labels (conditioning) / claimed flag.
  std::map<std::pair<int, std::set<std::string>>, std::set<std::string>> allowed;
  std::set<std::pair<int, std::set<std::string>>> is_claimed;
  for (const auto& vc : s.conditioning) {
    auto key = std::pair(vc.slice.value, vars.label_set(vc.var));
    auto [it, fresh] = allowed.emplace(key, vc.allowed);
    if (!fresh) {
      std::set<std::string> inter;
      std::set_intersection(it->second.begin(), it->second.end(), vc.allowed.begin(),
                            vc.allowed.end(), std::inserter(inter, inter.begin()));
      it->second = std::move(inter);
    }
  }
  for (const auto& [v, sr] : s.claimed) is_claimed.insert({sr.value, vars.label_set(v)});

  const int target_offset = s.target_slice.value;
  std::vector<std::pair<VKey, int>> starts;
  if (symbolic) {
    for (const VKey& k : m.heads) starts.emplace_back(k, 0);
  } else {
    starts.emplace_back(m.root, first_slice(m));
  }

  // Group key: start plus the values of every non-claimed variable met on
  // the walk. Within a group the target florets must share one stage.
  struct Walker {
    const NTDceg& m;
    const std::set<std::string>& target_labels;
    int target_offset;
    const std::map<std::pair<int, std::set<std::string>>, std::set<std::string>>& allowed;
    const std::set<std::pair<int, std::set<std::string>>>& is_claimed;
    std::map<std::vector<std::string>, std::set<VKey>> groups;

    void walk(const VKey& v, int slice, std::vector<std::string>& key,
              std::set<std::pair<int, std::set<std::string>>>& seen) {
      if (v.is_sink()) return;
      const auto fl = out_label_set(m.graph, v);
      const auto occurrence = std::pair(slice, fl);
      if (slice == target_offset && fl == target_labels) {
        groups[key].insert(v);
        return;
      }
      if (slice > target_offset) return;
      if (!seen.insert(occurrence).second)
        throw Error("variable with labels of '" + *fl.begin() +
                    "'-floret occurs twice in slice " + std::to_string(slice) +
                    "; statement variables are ambiguous");
      auto allow_it = allowed.find(occurrence);
      const bool claimed_here = is_claimed.count(occurrence) > 0;
      for (const CGEdge* e : m.graph.out_edges(v)) {
        if (allow_it != allowed.end() && !allow_it->second.count(e->label)) continue;
        const int next = slice + (e->mark != EdgeMark::plain ? 1 : 0);
        const bool fixes_key = !claimed_here;
        if (fixes_key) key.push_back(std::to_string(slice) + "/" + e->label);
        walk(e->to, next, key, seen);
        if (fixes_key) key.pop_back();
      }
      seen.erase(occurrence);
    }
  };

  Walker walker{m, target_labels, target_offset, allowed, is_claimed, {}};
  for (auto [k, sl] : starts) {
    std::vector<std::string> key = {"start:" + k.str()};
    std::set<std::pair<int, std::set<std::string>>> seen;
    walker.walk(k, sl, key, seen);
  }

  res.holds = true;
  for (const auto& [key, florets] : walker.groups) {
    CIResult::Group grp;
    std::map<int, VKey> stages;
    for (const VKey& f : florets) {
      const int stage = m.graph.vertex(f).colour;
      grp.florets.emplace_back(f, stage);
      stages.emplace(stage, f);
    }
    res.groups.push_back(grp);
    if (stages.size() > 1 && res.holds) {
      res.holds = false;
      auto a = stages.begin();
      auto b = std::next(a);
      res.counterexample = {a->second, b->second};
      res.detail = "florets " + a->second.str() + " and " + b->second.str() +
                   " answer the same context but lie in different stages";
    }
  }
  if (walker.groups.empty()) {
    res.holds = false;
    res.detail = "no walk satisfying the context reaches the target variable";
  }
  if (res.holds && res.detail.empty())
    res.detail = "all reached target florets share a stage within every context";
  return res;
}

// ---- Parsers -------------------------------------------------------------

namespace {

struct MiniLexer {
  std::string text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool eat(const std::string& tok) {
    skip_ws();
    if (text.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  bool peek(const std::string& tok) {
    skip_ws();
    return text.compare(pos, tok.size(), tok) == 0;
  }
  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
            text[pos] == '-'))
      ++pos;
    if (start == pos) throw Error("expected a name at '" + text.substr(pos, 8) + "'");
    return text.substr(start, pos - start);
  }
  bool done() {
    skip_ws();
    return pos >= text.size();
  }
};

SliceRef parse_slice_ref(MiniLexer& lx) {
  lx.skip_ws();
  if (lx.eat("t")) {
    SliceRef r{true, 0};
    if (lx.eat("+")) {
      std::string num = lx.ident();
      r.value = std::stoi(num);
    }
    return r;
  }
  std::string num = lx.ident();
  try {
    return SliceRef{false, std::stoi(num)};
  } catch (const std::exception&) {
    throw Error("expected a slice number or t+k, got '" + num + "'");
  }
}

// Var(SLICE) with an optional =label / !=label / in {a,b} suffix.
VarConstraint parse_var_term(MiniLexer& lx, const VariableTable& vars, bool allow_op) {
  VarConstraint vc;
  vc.var = lx.ident();
  if (!lx.eat("(")) throw Error("expected '(' after variable '" + vc.var + "'");
  vc.slice = parse_slice_ref(lx);
  if (!lx.eat(")")) throw Error("expected ')' in variable reference");
  std::set<std::string> full = vars.label_set(vc.var);
  vc.allowed = full;
  if (!allow_op) return vc;
  if (lx.eat("!=")) {
    std::string l = lx.ident();
    if (!full.count(l)) throw Error("label '" + l + "' is not a value of " + vc.var);
    vc.allowed.erase(l);
  } else if (lx.eat("=")) {
    std::string l = lx.ident();
    if (!full.count(l)) throw Error("label '" + l + "' is not a value of " + vc.var);
    vc.allowed = {l};
  } else if (lx.eat("in")) {
    if (!lx.eat("{")) throw Error("expected '{' after 'in'");
    vc.allowed.clear();
    do {
      std::string l = lx.ident();
      if (!full.count(l)) throw Error("label '" + l + "' is not a value of " + vc.var);
      vc.allowed.insert(l);
    } while (lx.eat(","));
    if (!lx.eat("}")) throw Error("expected '}'");
  }
  if (vc.allowed.empty()) throw Error("constraint on " + vc.var + " admits no label");
  return vc;
}

}  // namespace

Context parse_context(const std::string& text, const VariableTable& vars) {
  Context c;
  MiniLexer lx{text};
  if (lx.done()) return c;
  do {
    c.constraints.push_back(parse_var_term(lx, vars, true));
  } while (lx.eat(",") || lx.eat(";"));
  if (!lx.done()) throw Error("trailing input in context: '" + text.substr(lx.pos) + "'");
  return c;
}

CIStatement parse_ci(const std::string& text, const VariableTable& vars) {
  CIStatement s;
  s.text = text;
  MiniLexer lx{text};
  VarConstraint target = parse_var_term(lx, vars, false);
  s.target_var = target.var;
  s.target_slice = target.slice;

  if (!lx.eat("_||_") && !lx.eat("⊥"))
    throw Error("expected '_||_' after the target variable");

  if (lx.eat("(")) {
    do {
      VarConstraint v = parse_var_term(lx, vars, false);
      s.claimed.emplace_back(v.var, v.slice);
    } while (lx.eat(","));
    if (!lx.eat(")")) throw Error("expected ')' closing the claimed variable list");
  } else {
    VarConstraint v = parse_var_term(lx, vars, false);
    s.claimed.emplace_back(v.var, v.slice);
  }

  if (lx.eat("|")) {
    if (lx.eat("(")) {
      do {
        s.conditioning.push_back(parse_var_term(lx, vars, true));
      } while (lx.eat(","));
      if (!lx.eat(")")) throw Error("expected ')' closing the conditioning list");
    } else {
      do {
        s.conditioning.push_back(parse_var_term(lx, vars, true));
      } while (lx.eat(","));
    }
  }
  if (!lx.done()) throw Error("trailing input in statement: '" + text.substr(lx.pos) + "'");
  return s;
}

}  // namespace ntdceg
