#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tdmr/grain.hpp"

namespace tdmr {

// Pair of subgrain labels in one column of the two-row detection window:
// s0 at row m, s1 at row m+1.
struct GrainState {
  Subgrain s0;
  Subgrain s1;

  bool operator==(const GrainState&) const = default;
};

std::string state_name(GrainState s);

// Connectivity restrictions: which labels may sit directly below / directly
// right of a given label.
const std::vector<Subgrain>& allowed_below(Subgrain s);
const std::vector<Subgrain>& allowed_right(Subgrain s);

// All valid (s0, s1) pairs in lexicographic order; exactly 39.
const std::vector<GrainState>& enumerate_states();
constexpr int kNumStates = 39;

// Index of a state in enumerate_states(), -1 if invalid.
int state_index(GrainState s);

// Soft grain-type estimate of the feedback pixel X: the already-detected
// cell directly above the next-state column.
struct FeedbackProbs {
  double pB = 0;
  double pF = 0;
  double neither() const { return 1.0 - pB - pF; }
};

// Feedback factor attached to a transition.
enum class FbFactor : uint8_t { One, PB, PF, PNeither };

// Symbolic transition factor: product of up to two grain probabilities, one
// feedback factor, and (for rows whose second-row successor is forced
// sideways) a normalization over the feasible fresh grain types at row m.
struct TransitionFactor {
  bool zero = true;
  int8_t freshTop = -1;     // grain type starting at (m, n+1), -1 if none
  int8_t freshBottom = -1;  // grain type starting at (m+1, n+1), -1 if none
  FbFactor fb = FbFactor::One;
  bool renormTop = false;  // divide the fresh-top probability by p1 + p3

  double eval(const GrainDistribution& dist, const FeedbackProbs& f) const;
  std::string symbol() const;  // e.g. "P4*P3*P(~B,~F)"
};

// The full 39x39 table of symbolic factors.
class TransitionTable {
 public:
  TransitionTable();

  const TransitionFactor& factor(int fromState, int toState) const {
    return entries_[fromState][toState];
  }
  double probability(int fromState, int toState, const GrainDistribution& d,
                     const FeedbackProbs& f) const {
    return entries_[fromState][toState].eval(d, f);
  }

  // Nonzero successors of a state, for sparse forward/backward loops.
  const std::vector<int>& successors(int fromState) const {
    return successors_[fromState];
  }
  const std::vector<int>& predecessors(int toState) const {
    return predecessors_[toState];
  }

  std::string dump() const;  // text table for golden-file comparison

 private:
  std::array<std::array<TransitionFactor, kNumStates>, kNumStates> entries_;
  std::array<std::vector<int>, kNumStates> successors_;
  std::array<std::vector<int>, kNumStates> predecessors_;
};

double transition_probability(GrainState from, GrainState to,
                              const GrainDistribution& dist,
                              const FeedbackProbs& fb);

// Conditional probability of the four readback bits y = (y0, y1, y2, y3) at
// (m,n), (m+1,n), (m,n+1), (m+1,n+1), given the state at column n and the
// two input bits u = (u0, u1) at (m,n), (m+1,n). All entries lie in
// {0, 0.125, 0.25, 0.5}.
class OutputProbTable {
 public:
  OutputProbTable();

  // y and u packed little-endian: bit i set means +1 at position i.
  double prob(int y, int u, int stateIdx) const {
    return table_[(static_cast<size_t>(stateIdx) * 4 + u) * 16 + y];
  }

  std::string dump() const;

 private:
  std::vector<double> table_;  // 39 * 4 * 16
};

double output_probability(int y, int u, GrainState sPrev);

}  // namespace tdmr
