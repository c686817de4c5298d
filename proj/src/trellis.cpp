#include "tdmr/trellis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tdmr {

namespace {

using S = Subgrain;

// Grain type started by a label when it begins a new grain, -1 otherwise.
int fresh_type(S l) {
  switch (l) {
    case S::A: return 0;
    case S::B: return 1;
    case S::D: return 2;
    case S::F: return 3;
    default: return -1;
  }
}

// Label forced at (m, n+1) by horizontal continuation, or A-as-none.
bool forces_right(S l) { return l == S::D || l == S::F || l == S::G; }
S forced_right(S l) {
  switch (l) {
    case S::D: return S::E;
    case S::F: return S::H;
    default: return S::I;  // G
  }
}

// Label forced at (m+1, n+1) below a label at (m, n+1).
bool forces_below(S l) { return l == S::B || l == S::F || l == S::H; }
S forced_below(S l) {
  switch (l) {
    case S::B: return S::C;
    case S::F: return S::G;
    default: return S::I;  // H
  }
}

}  // namespace

std::string state_name(GrainState s) {
  return std::string{subgrain_char(s.s0), subgrain_char(s.s1)};
}

const std::vector<Subgrain>& allowed_below(Subgrain s) {
  static const std::vector<Subgrain> open = {S::A, S::B, S::D,
                                             S::E, S::F, S::H};
  static const std::vector<Subgrain> belowB = {S::C};
  static const std::vector<Subgrain> belowF = {S::G};
  static const std::vector<Subgrain> belowH = {S::I};
  switch (s) {
    case S::B: return belowB;
    case S::F: return belowF;
    case S::H: return belowH;
    default: return open;
  }
}

const std::vector<Subgrain>& allowed_right(Subgrain s) {
  static const std::vector<Subgrain> open = {S::A, S::B, S::C,
                                             S::D, S::F, S::G};
  static const std::vector<Subgrain> rightD = {S::E};
  static const std::vector<Subgrain> rightF = {S::H};
  static const std::vector<Subgrain> rightG = {S::I};
  switch (s) {
    case S::D: return rightD;
    case S::F: return rightF;
    case S::G: return rightG;
    default: return open;
  }
}

const std::vector<GrainState>& enumerate_states() {
  static const std::vector<GrainState> states = [] {
    std::vector<GrainState> v;
    for (int a = 0; a < kNumSubgrains; ++a)
      for (S b : allowed_below(static_cast<S>(a)))
        v.push_back({static_cast<S>(a), b});
    return v;
  }();
  return states;
}

int state_index(GrainState s) {
  const auto& states = enumerate_states();
  auto it = std::find(states.begin(), states.end(), s);
  return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

double TransitionFactor::eval(const GrainDistribution& dist,
                              const FeedbackProbs& f) const {
  if (zero) return 0.0;
  double v = 1.0;
  if (freshTop >= 0) v *= dist.prob(freshTop);
  if (renormTop) v /= (dist.p1 + dist.p3);
  if (freshBottom >= 0) v *= dist.prob(freshBottom);
  switch (fb) {
    case FbFactor::One: break;
    case FbFactor::PB: v *= f.pB; break;
    case FbFactor::PF: v *= f.pF; break;
    case FbFactor::PNeither: v *= f.neither(); break;
  }
  return v;
}

std::string TransitionFactor::symbol() const {
  if (zero) return "0";
  std::vector<std::string> parts;
  auto pname = [](int t) {
    return std::string("P") + static_cast<char>('1' + t);
  };
  if (freshTop >= 0) {
    std::string p = pname(freshTop);
    if (renormTop) p += "/(P1+P3)";
    parts.push_back(p);
  }
  if (freshBottom >= 0) parts.push_back(pname(freshBottom));
  switch (fb) {
    case FbFactor::One: break;
    case FbFactor::PB: parts.push_back("P(B)"); break;
    case FbFactor::PF: parts.push_back("P(F)"); break;
    case FbFactor::PNeither: parts.push_back("P(~B,~F)"); break;
  }
  if (parts.empty()) return "1";
  std::string out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out += "*" + parts[i];
  return out;
}

namespace {

TransitionFactor make_factor(GrainState from, GrainState to) {
  TransitionFactor f;
  f.zero = false;
  const S a0 = from.s0, a1 = from.s1, b0 = to.s0, b1 = to.s1;

  // Row m: either a horizontal continuation, a continuation of the feedback
  // pixel X (C below an X = B, G below-right of an X = F), or a fresh grain.
  bool topForced = false;
  if (forces_right(a0)) {
    if (b0 != forced_right(a0)) return TransitionFactor{};
    topForced = true;
  } else if (b0 == S::C) {
    f.fb = FbFactor::PB;
  } else if (b0 == S::G) {
    f.fb = FbFactor::PF;
  } else {
    const int t = fresh_type(b0);
    if (t < 0) return TransitionFactor{};
    f.freshTop = static_cast<int8_t>(t);
    f.fb = FbFactor::PNeither;
  }

  // Row m+1: forced sideways by a1, forced downward by b0, or fresh.
  bool haveReq = false;
  S req = S::A;
  if (forces_right(a1)) {
    req = forced_right(a1);
    haveReq = true;
  }
  if (forces_below(b0)) {
    const S req2 = forced_below(b0);
    if (haveReq && req != req2) return TransitionFactor{};
    req = req2;
    haveReq = true;
  }
  if (haveReq) {
    if (b1 != req) return TransitionFactor{};
  } else {
    const int t = fresh_type(b1);
    if (t < 0) return TransitionFactor{};
    f.freshBottom = static_cast<int8_t>(t);
  }

  // When the second row's successor is forced sideways, a fresh grain at
  // row m cannot be a B or F (their lower half would collide), so the fresh
  // choice is conditioned on the feasible types {A, D}.
  if (!topForced && forces_right(a1) && f.freshTop >= 0)
    f.renormTop = true;

  return f;
}

}  // namespace

TransitionTable::TransitionTable() {
  const auto& states = enumerate_states();
  for (int i = 0; i < kNumStates; ++i)
    for (int j = 0; j < kNumStates; ++j) {
      entries_[i][j] = make_factor(states[i], states[j]);
      if (!entries_[i][j].zero) {
        successors_[i].push_back(j);
        predecessors_[j].push_back(i);
      }
    }
}

std::string TransitionTable::dump() const {
  const auto& states = enumerate_states();
  std::ostringstream os;
  for (int i = 0; i < kNumStates; ++i)
    for (int j = 0; j < kNumStates; ++j) {
      const auto& f = entries_[i][j];
      if (f.zero) continue;
      os << state_name(states[i]) << " -> " << state_name(states[j]) << " : "
         << f.symbol() << "\n";
    }
  return os.str();
}

double transition_probability(GrainState from, GrainState to,
                              const GrainDistribution& dist,
                              const FeedbackProbs& fb) {
  const int i = state_index(from), j = state_index(to);
  if (i < 0 || j < 0) throw std::invalid_argument("invalid grain state");
  static const TransitionTable table;
  return table.probability(i, j, dist, fb);
}

namespace {

// Source of one readback bit in the 2x2 output window: the input bit that
// determines it. U0/U1 are the currently estimated inputs; the rest are
// input locations outside the estimated pair, marginalized uniformly.
enum class Src : uint8_t {
  U0,
  U1,
  ExtTopRight,      // input at (m, n+1)
  ExtBottomRight,   // input at (m+1, n+1)
  ExtBelow,         // input at (m+2, n)
  ExtBelowRight,    // input at (m+2, n+1)
};

// y0..y3 sources for a given state, from the grain geometry of (s0', s1')
// and its forced continuations.
std::array<Src, 4> cell_sources(GrainState s) {
  std::array<Src, 4> src;
  switch (s.s0) {  // y0 at (m, n)
    case S::A: case S::C: case S::E: case S::I: src[0] = Src::U0; break;
    case S::B: case S::H: src[0] = Src::U1; break;
    case S::D: case S::G: src[0] = Src::ExtTopRight; break;
    case S::F: src[0] = Src::ExtBottomRight; break;
  }
  switch (s.s1) {  // y1 at (m+1, n)
    case S::A: case S::C: case S::E: case S::I: src[1] = Src::U1; break;
    case S::B: src[1] = Src::ExtBelow; break;
    case S::D: src[1] = Src::ExtBottomRight; break;
    case S::F: src[1] = Src::ExtBelowRight; break;
    case S::G: src[1] = Src::ExtBottomRight; break;  // state FG
    case S::H: src[1] = Src::ExtBelow; break;
  }
  // y2 at (m, n+1): tied when the first row continues rightward.
  src[2] = (s.s0 == S::F) ? Src::ExtBottomRight : Src::ExtTopRight;
  // y3 at (m+1, n+1): tied when the second row continues rightward.
  src[3] = (s.s1 == S::F) ? Src::ExtBelowRight : Src::ExtBottomRight;
  return src;
}

}  // namespace

OutputProbTable::OutputProbTable() : table_(kNumStates * 4 * 16, 0.0) {
  const auto& states = enumerate_states();
  for (int si = 0; si < kNumStates; ++si) {
    const auto src = cell_sources(states[si]);
    // Count the distinct marginalized inputs feeding the window.
    bool seen[6] = {};
    int unknowns = 0;
    for (Src s : src)
      if (s != Src::U0 && s != Src::U1 && !seen[static_cast<int>(s)]) {
        seen[static_cast<int>(s)] = true;
        ++unknowns;
      }
    const double p = std::ldexp(1.0, -unknowns);  // (1/2)^unknowns
    for (int u = 0; u < 4; ++u) {
      for (int y = 0; y < 16; ++y) {
        // Consistency: cells fed by u must match it; cells sharing one
        // marginalized input must agree among themselves.
        int extVal[6] = {-1, -1, -1, -1, -1, -1};
        bool ok = true;
        for (int cell = 0; cell < 4 && ok; ++cell) {
          const int bit = (y >> cell) & 1;
          if (src[cell] == Src::U0) {
            ok = bit == (u & 1);
          } else if (src[cell] == Src::U1) {
            ok = bit == ((u >> 1) & 1);
          } else {
            int& v = extVal[static_cast<int>(src[cell])];
            if (v < 0)
              v = bit;
            else
              ok = v == bit;
          }
        }
        table_[(static_cast<size_t>(si) * 4 + u) * 16 + y] = ok ? p : 0.0;
      }
    }
  }
}

std::string OutputProbTable::dump() const {
  const auto& states = enumerate_states();
  std::ostringstream os;
  for (int si = 0; si < kNumStates; ++si)
    for (int u = 0; u < 4; ++u) {
      os << state_name(states[si]) << " u=" << (u & 1) << ((u >> 1) & 1)
         << " :";
      for (int y = 0; y < 16; ++y) os << ' ' << prob(y, u, si);
      os << '\n';
    }
  return os.str();
}

double output_probability(int y, int u, GrainState sPrev) {
  const int si = state_index(sPrev);
  if (si < 0 || y < 0 || y > 15 || u < 0 || u > 3)
    throw std::invalid_argument("output_probability: bad arguments");
  static const OutputProbTable table;
  return table.prob(y, u, si);
}

}  // namespace tdmr
