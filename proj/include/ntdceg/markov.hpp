#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ntdceg/ntdceg.hpp"

namespace ntdceg {

// Finite chain induced by the one-slice walk probabilities: states are the
// heads of the cyclical temporal edges, preceded by the terminal sink when
// any branch can terminate.
struct MarkovProjection {
  std::vector<VKey> states;  // sink first when present, then heads ascending
  std::vector<std::string> state_names;
  std::vector<double> mu;              // occupancy at the start of slice N-1
  std::vector<std::vector<double>> M;  // row-stochastic

  int dim() const { return static_cast<int>(states.size()); }
  int index_of(const VKey& k) const;
  int index_of(const std::string& name) const;
  void check() const;  // shape and row sums within tolerance
};

MarkovProjection project(const NTDceg& m);

struct Classification {
  bool irreducible = false;
  bool aperiodic = false;
  bool ergodic = false;
  std::vector<int> absorbing;  // state indices with self-probability 1
};

Classification classify(const MarkovProjection& p);

struct StationaryResult {
  bool converged = false;
  std::vector<double> pi;
  double residual = 0.0;
  long iterations = 0;
};

// Power iteration to a 1e-12 residual (at most 1e6 iterations).
StationaryResult stationary(const MarkovProjection& p,
                            const std::optional<std::vector<double>>& start = std::nullopt);

// Occupancy-to-occupancy transition matrix over the initial slices: rows are
// the entry positions at slice t (t <= N-2), columns the chain states.
struct InitialTransition {
  std::vector<VKey> from_states;
  std::vector<std::vector<double>> M_t;
};
InitialTransition initial_transition(const NTDceg& m, const MarkovProjection& p, int t);

// s-step-ahead occupancy. For t >= N-1 the vector ranges over the chain
// states; for earlier t it ranges over entry_positions(t) and is pushed
// through the initial-slice transitions first.
std::vector<double> predict(const NTDceg& m, const MarkovProjection& p,
                            const std::vector<double>& occupancy, int t, int s);

std::vector<double> mat_vec_left(const std::vector<double>& v,
                                 const std::vector<std::vector<double>>& M);

}  // namespace ntdceg
