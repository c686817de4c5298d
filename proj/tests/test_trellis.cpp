#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "tdmr/trellis.hpp"

using namespace tdmr;

namespace {

GrainState st(const char* s) {
  return {subgrain_from_char(s[0]), subgrain_from_char(s[1])};
}

// Order-independent form of a symbolic factor: factors sorted within the
// product, so "P3*P1*X" and "P1*P3*X" compare equal.
std::string canonical(std::string sym) {
  std::vector<std::string> parts;
  std::stringstream ss(sym);
  std::string p;
  while (std::getline(ss, p, '*')) parts.push_back(p);
  std::sort(parts.begin(), parts.end());
  std::string out = parts.empty() ? std::string() : parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out += "*" + parts[i];
  return out;
}

}  // namespace

TEST_CASE("connectivity restrictions") {
  auto set_of = [](const std::vector<Subgrain>& v) {
    return std::vector<Subgrain>(v);
  };
  using S = Subgrain;
  CHECK(set_of(allowed_below(S::A)) ==
        std::vector<S>{S::A, S::B, S::D, S::E, S::F, S::H});
  CHECK(set_of(allowed_below(S::B)) == std::vector<S>{S::C});
  CHECK(set_of(allowed_below(S::F)) == std::vector<S>{S::G});
  CHECK(set_of(allowed_below(S::H)) == std::vector<S>{S::I});
  CHECK(set_of(allowed_right(S::A)) ==
        std::vector<S>{S::A, S::B, S::C, S::D, S::F, S::G});
  CHECK(set_of(allowed_right(S::D)) == std::vector<S>{S::E});
  CHECK(set_of(allowed_right(S::F)) == std::vector<S>{S::H});
  CHECK(set_of(allowed_right(S::G)) == std::vector<S>{S::I});
}

TEST_CASE("state enumeration: 39 states, lexicographic, indexable") {
  const auto& states = enumerate_states();
  REQUIRE(static_cast<int>(states.size()) == kNumStates);
  CHECK(states.front() == st("AA"));
  for (size_t i = 1; i < states.size(); ++i) {
    const auto& a = states[i - 1];
    const auto& b = states[i];
    CHECK((a.s0 < b.s0 || (a.s0 == b.s0 && a.s1 < b.s1)));
  }
  for (int i = 0; i < kNumStates; ++i) {
    CHECK(state_index(states[i]) == i);
    CHECK(std::find(allowed_below(states[i].s0).begin(),
                    allowed_below(states[i].s0).end(),
                    states[i].s1) != allowed_below(states[i].s0).end());
  }
  CHECK(state_index(st("BC")) >= 0);
  CHECK(state_index(st("FG")) >= 0);
  CHECK(state_index(st("DD")) >= 0);
  CHECK(state_index(st("AC")) == -1);  // C requires a B above
  CHECK(state_index(st("FH")) == -1);  // below F is G
}

TEST_CASE("transition factors for selected pairs") {
  const GrainDistribution d = solve_grain_distribution(0.2);
  const FeedbackProbs fb{0.3, 0.1};
  CHECK(transition_probability(st("AA"), st("DF"), d, fb) ==
        doctest::Approx(d.p4 * d.p3 * fb.neither()).epsilon(1e-14));
  CHECK(transition_probability(st("AA"), st("CA"), d, fb) ==
        doctest::Approx(d.p1 * fb.pB).epsilon(1e-14));
  CHECK(transition_probability(st("AA"), st("EA"), d, fb) == 0.0);
  CHECK(transition_probability(st("AA"), st("AA"), d, fb) ==
        doctest::Approx(d.p1 * d.p1 * fb.neither()).epsilon(1e-14));
  // Fully forced successor: both rows continue horizontally.
  CHECK(transition_probability(st("DD"), st("EE"), d, fb) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("generated AA row matches the hand-derived reference row symbolically") {
  const std::map<std::string, std::string> expected = {
      {"AA", "P1*P1*P(~B,~F)"}, {"AB", "P1*P2*P(~B,~F)"},
      {"AD", "P1*P3*P(~B,~F)"}, {"AE", "0"},
      {"AF", "P1*P4*P(~B,~F)"}, {"AH", "0"},
      {"BC", "P2*P(~B,~F)"},    {"CA", "P1*P(B)"},
      {"CB", "P2*P(B)"},        {"CD", "P3*P(B)"},
      {"CE", "0"},              {"CF", "P4*P(B)"},
      {"CH", "0"},              {"DA", "P1*P3*P(~B,~F)"},
      {"DB", "P2*P3*P(~B,~F)"}, {"DD", "P3*P3*P(~B,~F)"},
      {"DE", "0"},              {"DF", "P3*P4*P(~B,~F)"},
      {"DH", "0"},              {"EA", "0"},
      {"EB", "0"},              {"ED", "0"},
      {"EE", "0"},              {"EF", "0"},
      {"EH", "0"},              {"FG", "P4*P(~B,~F)"},
      {"GA", "P1*P(F)"},        {"GB", "P2*P(F)"},
      {"GD", "P3*P(F)"},        {"GE", "0"},
      {"GF", "P4*P(F)"},        {"GH", "0"},
      {"HI", "0"},              {"IA", "0"},
      {"IB", "0"},              {"ID", "0"},
      {"IE", "0"},              {"IF", "0"},
      {"IH", "0"}};
  const TransitionTable table;
  const int from = state_index(st("AA"));
  const auto& states = enumerate_states();
  int nonzero = 0;
  for (int to = 0; to < kNumStates; ++to) {
    const std::string name = state_name(states[to]);
    REQUIRE(expected.count(name) == 1);
    CHECK_MESSAGE(canonical(table.factor(from, to).symbol()) ==
                      canonical(expected.at(name)),
                  "AA -> " << name);
    if (expected.at(name) != "0") ++nonzero;
  }
  CHECK(nonzero == 18);
  CHECK(static_cast<int>(table.successors(from).size()) == 18);
}

TEST_CASE("every transition row sums to one") {
  const TransitionTable table;
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<GrainDistribution, FeedbackProbs>> draws;
  // Corner cases first.
  for (double p2 : {0.0, 0.25, 0.5})
    for (auto fb : {FeedbackProbs{0, 0}, FeedbackProbs{1, 0},
                    FeedbackProbs{0, 1}, FeedbackProbs{0.5, 0.5}})
      draws.push_back({solve_grain_distribution(p2), fb});
  while (draws.size() < 100) {
    const double pB = u(rng);
    draws.push_back(
        {solve_grain_distribution(0.5 * u(rng)),
         FeedbackProbs{pB, (1.0 - pB) * u(rng)}});
  }
  for (const auto& [dist, fb] : draws)
    for (int from = 0; from < kNumStates; ++from) {
      double sum = 0;
      for (int to = 0; to < kNumStates; ++to)
        sum += table.probability(from, to, dist, fb);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("nonzero transitions respect connectivity") {
  const TransitionTable table;
  const auto& states = enumerate_states();
  const GrainDistribution d = solve_grain_distribution(0.2);
  const FeedbackProbs fb{0.4, 0.3};
  for (int from = 0; from < kNumStates; ++from)
    for (int to = 0; to < kNumStates; ++to) {
      if (table.probability(from, to, d, fb) <= 0) continue;
      auto in = [](Subgrain x, const std::vector<Subgrain>& v) {
        return std::find(v.begin(), v.end(), x) != v.end();
      };
      CHECK(in(states[to].s0, allowed_right(states[from].s0)));
      CHECK(in(states[to].s1, allowed_right(states[from].s1)));
      CHECK(in(states[to].s1, allowed_below(states[to].s0)));
    }
}

TEST_CASE("output probabilities: domain, normalization, worked cases") {
  const OutputProbTable table;
  int entries = 0;
  for (int s = 0; s < kNumStates; ++s)
    for (int u = 0; u < 4; ++u) {
      double sum = 0;
      for (int y = 0; y < 16; ++y) {
        const double p = table.prob(y, u, s);
        const bool inDomain =
            p == 0.0 || p == 0.125 || p == 0.25 || p == 0.5;
        CHECK(inDomain);
        sum += p;
        ++entries;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
  CHECK(entries == 2496);

  // Window bit order: y0=(m,n), y1=(m+1,n), y2=(m,n+1), y3=(m+1,n+1).
  auto pack = [](int y0, int y1, int y2, int y3) {
    return y0 | (y1 << 1) | (y2 << 2) | (y3 << 3);
  };
  for (int u = 0; u < 4; ++u)
    for (int y = 0; y < 16; ++y) {
      // FG: one 2x2 grain fills the window; all-equal outputs only.
      const double pFG = output_probability(y, u, st("FG"));
      CHECK(pFG == ((y == 0 || y == 15) ? 0.5 : 0.0));
      // AA: inputs written directly at the first column, lookahead free.
      const int u0 = u & 1, u1 = (u >> 1) & 1;
      const double pAA = output_probability(y, u, st("AA"));
      CHECK(pAA == (((y & 1) == u0 && ((y >> 1) & 1) == u1) ? 0.25 : 0.0));
      // DD: two horizontal grains; each row equal across the window.
      const double pDD = output_probability(y, u, st("DD"));
      CHECK(pDD ==
            (((y & 1) == ((y >> 2) & 1) && ((y >> 1) & 1) == ((y >> 3) & 1))
                 ? 0.25
                 : 0.0));
      // DB: horizontal grain in the top row ties y0 to y2.
      const double pDB = output_probability(y, u, st("DB"));
      CHECK(pDB == (((y & 1) == ((y >> 2) & 1)) ? 0.125 : 0.0));
    }
  (void)pack;
}

TEST_CASE("table dumps are stable and non-empty") {
  const TransitionTable t;
  const OutputProbTable o;
  CHECK(t.dump() == t.dump());
  CHECK_FALSE(t.dump().empty());
  CHECK_FALSE(o.dump().empty());
}
