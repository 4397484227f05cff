#include "ntdceg/markov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ntdceg {

int MarkovProjection::index_of(const VKey& k) const {
  for (int i = 0; i < dim(); ++i)
    if (states[i] == k) return i;
  throw Error("not a chain state: " + k.str());
}

int MarkovProjection::index_of(const std::string& name) const {
  for (int i = 0; i < dim(); ++i)
    if (state_names[i] == name) return i;
  throw Error("not a chain state: " + name);
}

void MarkovProjection::check() const {
  if (static_cast<int>(mu.size()) != dim() || static_cast<int>(M.size()) != dim())
    throw Error("chain dimensions disagree");
  double s = 0;
  for (double x : mu) s += x;
  if (std::abs(s - 1.0) > kSumTolerance)
    throw Error("initial distribution sums to " + std::to_string(s));
  for (int i = 0; i < dim(); ++i) {
    if (static_cast<int>(M[i].size()) != dim()) throw Error("transition matrix not square");
    double r = 0;
    for (double x : M[i]) r += x;
    if (std::abs(r - 1.0) > kSumTolerance)
      throw Error("row " + std::to_string(i) + " of the transition matrix sums to " +
                  std::to_string(r));
  }
  if (!states.empty() && states[0] == VKey::sink() && M[0][0] != 1.0)
    throw Error("terminal state must be absorbing");
}

namespace {

// Sum of products of edge probabilities over the walks from `from` (an entry
// situation of slice `slice`) to each entry situation of slice+1 (grouped by
// its position) and to the leaves passed on the way.
void one_slice_walks(const NTDceg& m, const StagedTree& st,
                     const std::map<VertexId, VKey>& pos_of, VertexId from, int slice,
                     std::map<VKey, double>& into, double& terminated) {
  const EventTree& t = st.tree;
  std::function<void(VertexId, double)> dfs = [&](VertexId v, double p) {
    for (VertexId c : t.vertex(v).children) {
      const double pc = p * st.edge_prob(c);
      if (t.is_leaf(c)) {
        terminated += pc;
      } else if (t.active_slice(c) > slice) {
        into[pos_of.at(c)] += pc;
      } else {
        dfs(c, pc);
      }
    }
  };
  dfs(from, 1.0);
}

}  // namespace

MarkovProjection project(const NTDceg& m) {
  if (!m.has_probs) throw Error("model carries no probabilities");
  if (!m.st || !m.st_ext) throw Error("model lost its staged tree; rebuild from the spec");
  const StagedTree& st = *m.st;
  const StagedTree& ext = m.st_ext->st;

  MarkovProjection p;
  const bool has_sink = m.has_terminal_sink || !m.slice_sinks.empty();
  if (has_sink) p.states.push_back(VKey::sink());
  for (const VKey& k : m.heads) p.states.push_back(k);
  for (const VKey& k : p.states) p.state_names.push_back(k.str());

  // Initial distribution: path products into each head at the start of
  // slice N-1, plus the mass already terminated.
  p.mu.assign(p.dim(), 0.0);
  for (VertexId s : st.tree.situations()) {
    if (!st.tree.is_entry(s) || st.tree.active_slice(s) != m.N - 1) continue;
    p.mu[p.index_of(m.position_of.at(s))] += path_probability(st, s);
  }
  for (VertexId l : st.tree.leaves()) {
    if (st.tree.vertex(l).time_slice > m.N - 2) continue;
    if (!is_terminating_leaf(st.tree, l, m.tog.kind, m.tog.terminating)) continue;
    p.mu[0] += path_probability(st, l);
  }

  // Transition rows from one representative entry situation per head,
  // walked over the extended tree through one homogeneous slice.
  p.M.assign(p.dim(), std::vector<double>(p.dim(), 0.0));
  if (has_sink) p.M[0][0] = 1.0;
  for (const VKey& head : m.heads) {
    VertexId rep = kNoVertex;
    for (const auto& [sit, key] : m.ext_position_of) {
      if (key != head) continue;
      if (!ext.tree.is_entry(sit) || ext.tree.active_slice(sit) != m.N - 1) continue;
      rep = sit;
      break;  // map iteration is id-ascending, so this is the least id
    }
    if (rep == kNoVertex) throw Error("head position without an entry situation");
    std::map<VKey, double> into;
    double terminated = 0.0;
    one_slice_walks(m, ext, m.ext_position_of, rep, m.N - 1, into, terminated);
    const int i = p.index_of(head);
    for (const auto& [key, mass] : into) p.M[i][p.index_of(key)] += mass;
    if (terminated > 0) {
      if (!has_sink) throw Error("terminating walk in a model without a sink");
      p.M[i][0] += terminated;
    }
  }
  p.check();
  return p;
}

Classification classify(const MarkovProjection& p) {
  const int n = p.dim();
  Classification c;
  for (int i = 0; i < n; ++i)
    if (p.M[i][i] == 1.0) c.absorbing.push_back(i);

  // Strong connectivity of the support graph.
  auto reach = [&](int from, bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {from};
    seen[from] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        const double x = transpose ? p.M[w][v] : p.M[v][w];
        if (x > 0 && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  if (n > 0) {
    auto fwd = reach(0, false), bwd = reach(0, true);
    c.irreducible = true;
    for (int i = 0; i < n; ++i)
      if (!fwd[i] || !bwd[i]) c.irreducible = false;
  }

  // Aperiodicity: gcd of closed-walk lengths, per reachable class; computed
  // via BFS levels (gcd of (level(v) + 1 - level(w)) over edges v->w).
  if (c.irreducible && n > 0) {
    std::vector<int> level(n, -1);
    std::vector<int> queue = {0};
    level[0] = 0;
    size_t qi = 0;
    int g = 0;
    while (qi < queue.size()) {
      int v = queue[qi++];
      for (int w = 0; w < n; ++w) {
        if (p.M[v][w] <= 0) continue;
        if (level[w] < 0) {
          level[w] = level[v] + 1;
          queue.push_back(w);
        } else {
          g = std::gcd(g, std::abs(level[v] + 1 - level[w]));
        }
      }
    }
    c.aperiodic = g == 1;
  } else if (n == 1) {
    c.aperiodic = p.M[0][0] > 0;
  }
  c.ergodic = c.irreducible && c.aperiodic;
  return c;
}

std::vector<double> mat_vec_left(const std::vector<double>& v,
                                 const std::vector<std::vector<double>>& M) {
  if (M.empty()) return {};
  const size_t n = M.size(), m = M[0].size();
  if (v.size() != n) throw Error("occupancy dimension disagrees with the matrix");
  std::vector<double> out(m, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) out[j] += v[i] * M[i][j];
  return out;
}

StationaryResult stationary(const MarkovProjection& p,
                            const std::optional<std::vector<double>>& start) {
  const int n = p.dim();
  StationaryResult r;
  if (n == 0) return r;
  r.pi = start.value_or(std::vector<double>(n, 1.0 / n));
  constexpr double kResidual = 1e-12;
  constexpr long kMaxIters = 1000000;
  for (r.iterations = 0; r.iterations < kMaxIters; ++r.iterations) {
    auto next = mat_vec_left(r.pi, p.M);
    r.residual = 0;
    for (int i = 0; i < n; ++i) r.residual = std::max(r.residual, std::abs(next[i] - r.pi[i]));
    r.pi = std::move(next);
    if (r.residual <= kResidual) {
      r.converged = true;
      break;
    }
  }
  return r;
}

InitialTransition initial_transition(const NTDceg& m, const MarkovProjection& p, int t) {
  if (t > m.N - 2) throw Error("initial transitions exist only before slice N-1");
  InitialTransition it;
  it.from_states = m.entry_positions(t);
  if (it.from_states.empty()) throw Error("no entry positions at slice " + std::to_string(t));
  it.M_t.assign(it.from_states.size(), std::vector<double>(p.dim(), 0.0));

  std::set<VKey> head_set(m.heads.begin(), m.heads.end());
  for (size_t r = 0; r < it.from_states.size(); ++r) {
    // Walk the graph forward, multiplying edge probabilities, until the
    // start of slice N-1 (a head) or a sink.
    std::function<void(const VKey&, double)> dfs = [&](const VKey& v, double prob) {
      for (const CGEdge* e : m.graph.out_edges(v)) {
        if (e->mark == EdgeMark::cyclical) continue;
        if (!e->has_prob()) throw Error("edge without probability");
        const double q = prob * e->prob;
        if (e->to.is_sink()) {
          it.M_t[r][0] += q;
        } else if (head_set.count(e->to)) {
          it.M_t[r][p.index_of(e->to)] += q;
        } else {
          dfs(e->to, q);
        }
      }
    };
    dfs(it.from_states[r], 1.0);
  }
  return it;
}

std::vector<double> predict(const NTDceg& m, const MarkovProjection& p,
                            const std::vector<double>& occupancy, int t, int s) {
  if (s < 0) throw Error("step count must be nonnegative");
  double total = 0;
  for (double x : occupancy) total += x;
  if (std::abs(total - 1.0) > kSumTolerance)
    throw Error("occupancy must sum to one");

  if (t >= m.N - 1) {
    if (static_cast<int>(occupancy.size()) != p.dim())
      throw Error("occupancy dimension disagrees with the state list");
    std::vector<double> v = occupancy;
    for (int k = 0; k < s; ++k) v = mat_vec_left(v, p.M);
    return v;
  }

  // Initial slices: push through the slice-t entry transitions first.
  auto it = initial_transition(m, p, t);
  if (occupancy.size() != it.from_states.size())
    throw Error("occupancy dimension disagrees with the entry positions at slice " +
                std::to_string(t));
  if (s == 0) return occupancy;
  if (t + s <= m.N - 2)
    throw Error("prediction inside the initial slices needs t+s >= N-1");
  std::vector<double> v = mat_vec_left(occupancy, it.M_t);
  for (int k = 0; k < t + s - m.N + 1; ++k) v = mat_vec_left(v, p.M);
  return v;
}

}  // namespace ntdceg
