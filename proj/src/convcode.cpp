#include "tdmr/convcode.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tdmr/detector.hpp"  // clip_llr / kLlrCap

namespace tdmr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Exact Jacobian logarithm: log(e^a + e^b).
inline double max_star(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace

ConvCode::ConvCode(ConvKind kind) : kind_(kind) {
  for (int s = 0; s < kStates; ++s)
    for (int u = 0; u < 2; ++u) {
      const int d1 = s & 1, d3 = (s >> 2) & 1;
      Step st;
      if (kind == ConvKind::OuterNrcc) {
        // State = last three input bits, d1 most recent.
        st.c0 = static_cast<uint8_t>(u ^ d1);
        st.c1 = static_cast<uint8_t>(u ^ d1 ^ d3);
        st.next = static_cast<uint8_t>(((s << 1) | u) & 7);
      } else {
        // State = last three feedback-register bits a, with a = u ^ a_prev.
        const int a = u ^ d1;
        st.c0 = static_cast<uint8_t>(u);  // systematic
        st.c1 = static_cast<uint8_t>(a ^ d1 ^ d3);
        st.next = static_cast<uint8_t>(((s << 1) | a) & 7);
      }
      steps_[s][u] = st;
    }
}

std::vector<uint8_t> ConvCode::encode(const std::vector<uint8_t>& input) const {
  std::vector<uint8_t> out(input.size() * 2);
  int s = 0;
  for (size_t k = 0; k < input.size(); ++k) {
    const Step& st = steps_[s][input[k] & 1];
    out[2 * k] = st.c0;
    out[2 * k + 1] = st.c1;
    s = st.next;
  }
  return out;
}

ConvCode::SisoResult ConvCode::map_decode(
    const std::vector<double>& codeLlr,
    const std::vector<double>& aprioriLlr) const {
  if (codeLlr.size() % 2 != 0)
    throw std::invalid_argument("map_decode: odd code LLR length");
  const size_t n = codeLlr.size() / 2;
  if (!aprioriLlr.empty() && aprioriLlr.size() != n)
    throw std::invalid_argument("map_decode: a-priori length mismatch");

  auto la = [&](size_t k) { return aprioriLlr.empty() ? 0.0 : aprioriLlr[k]; };

  std::vector<double> alpha((n + 1) * kStates, kNegInf);
  std::vector<double> beta((n + 1) * kStates, 0.0);  // free final state
  alpha[0] = 0.0;

  // Branch metric in the log domain, exp(bit * LLR) convention.
  auto metric = [&](size_t k, int s, int u) {
    const Step& st = steps_[s][u];
    double g = u ? la(k) : 0.0;
    if (st.c0) g += codeLlr[2 * k];
    if (st.c1) g += codeLlr[2 * k + 1];
    return g;
  };

  for (size_t k = 0; k < n; ++k) {
    double* cur = &alpha[k * kStates];
    double* nxt = &alpha[(k + 1) * kStates];
    for (int s = 0; s < kStates; ++s) nxt[s] = kNegInf;
    double peak = kNegInf;
    for (int s = 0; s < kStates; ++s) {
      if (cur[s] == kNegInf) continue;
      for (int u = 0; u < 2; ++u) {
        const int t = steps_[s][u].next;
        nxt[t] = max_star(nxt[t], cur[s] + metric(k, s, u));
      }
    }
    for (int s = 0; s < kStates; ++s) peak = peak > nxt[s] ? peak : nxt[s];
    for (int s = 0; s < kStates; ++s) nxt[s] -= peak;
  }

  for (size_t k = n; k-- > 0;) {
    double* cur = &beta[k * kStates];
    const double* nxt = &beta[(k + 1) * kStates];
    double peak = kNegInf;
    for (int s = 0; s < kStates; ++s) {
      double acc = kNegInf;
      for (int u = 0; u < 2; ++u)
        acc = max_star(acc, metric(k, s, u) + nxt[steps_[s][u].next]);
      cur[s] = acc;
      peak = peak > acc ? peak : acc;
    }
    for (int s = 0; s < kStates; ++s) cur[s] -= peak;
  }

  SisoResult res;
  res.inputPosterior.resize(n);
  res.inputExtrinsic.resize(n);
  res.codeExtrinsic.resize(2 * n);
  for (size_t k = 0; k < n; ++k) {
    const double* a = &alpha[k * kStates];
    const double* b = &beta[(k + 1) * kStates];
    double lu[2] = {kNegInf, kNegInf};
    double lc0[2] = {kNegInf, kNegInf};
    double lc1[2] = {kNegInf, kNegInf};
    for (int s = 0; s < kStates; ++s) {
      if (a[s] == kNegInf) continue;
      for (int u = 0; u < 2; ++u) {
        const Step& st = steps_[s][u];
        const double m = a[s] + metric(k, s, u) + b[st.next];
        lu[u] = max_star(lu[u], m);
        lc0[st.c0] = max_star(lc0[st.c0], m);
        lc1[st.c1] = max_star(lc1[st.c1], m);
      }
    }
    const double postU = lu[1] - lu[0];
    res.inputPosterior[k] = clip_llr(postU);
    res.inputExtrinsic[k] = clip_llr(postU - la(k));
    res.codeExtrinsic[2 * k] = clip_llr(lc0[1] - lc0[0] - codeLlr[2 * k]);
    res.codeExtrinsic[2 * k + 1] =
        clip_llr(lc1[1] - lc1[0] - codeLlr[2 * k + 1]);
  }
  return res;
}

}  // namespace tdmr
