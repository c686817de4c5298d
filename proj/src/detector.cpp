#include "tdmr/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace tdmr {

double sigmoid(double llr) { return 1.0 / (1.0 + std::exp(-llr)); }

FeedbackProbs compute_feedback(std::span<const double, kNumStates> marginal) {
  const auto& states = enumerate_states();
  double massB = 0, massF = 0, total = 0;
  for (int s = 0; s < kNumStates; ++s) {
    total += marginal[s];
    if (states[s].s1 == Subgrain::B) massB += marginal[s];
    if (states[s].s1 == Subgrain::F) massF += marginal[s];
  }
  if (total <= 0) throw std::invalid_argument("empty state marginal");
  auto to_prob = [&](double mass) {
    const double rest = total - mass;
    double llr;
    if (mass <= 0)
      llr = -kLlrCap;
    else if (rest <= 0)
      llr = kLlrCap;
    else
      llr = clip_llr(std::log(mass / rest));
    return std::exp(llr) / (1.0 + std::exp(llr));
  };
  FeedbackProbs fb;
  fb.pB = to_prob(massB);
  fb.pF = to_prob(massF);
  return fb;
}

TdmrDetector::TdmrDetector(const GrainDistribution& dist) : dist_(dist) {
  if (!dist.valid(1e-9))
    throw std::invalid_argument("invalid grain distribution");
  for (int i = 0; i < kNumStates; ++i)
    for (int j : trans_.successors(i)) {
      const auto& f = trans_.factor(i, j);
      double base = 1.0;
      if (f.freshTop >= 0) base *= dist.prob(f.freshTop);
      if (f.renormTop) base /= (dist.p1 + dist.p3);
      if (f.freshBottom >= 0) base *= dist.prob(f.freshBottom);
      if (base > 0) edges_[i].push_back({j, base, f.fb});
    }
  // Boundary-compatibility masks. The image is framed by fixed 1x1 A grains,
  // so no grain may continue past the right edge (both subgrains must not
  // force a rightward neighbour) or past the bottom edge (the bottom subgrain
  // must not continue downward). The frame is fixed rather than sampled, so
  // these are structural indicators with no grain-probability factor.
  const auto& states = enumerate_states();
  auto crosses_right = [](Subgrain g) {
    return g == Subgrain::D || g == Subgrain::F || g == Subgrain::G;
  };
  auto crosses_down = [](Subgrain g) {
    return g == Subgrain::B || g == Subgrain::F || g == Subgrain::H;
  };
  for (int i = 0; i < kNumStates; ++i) {
    rightFrameOk_[i] =
        !crosses_right(states[i].s0) && !crosses_right(states[i].s1);
    bottomFrameOk_[i] = !crosses_down(states[i].s1);
  }
}

namespace {

double fb_value(FbFactor f, const FeedbackProbs& fb) {
  switch (f) {
    case FbFactor::One: return 1.0;
    case FbFactor::PB: return fb.pB;
    case FbFactor::PF: return fb.pF;
    case FbFactor::PNeither: return fb.neither();
  }
  return 1.0;
}

constexpr int kStateAA = 0;  // lexicographically first

}  // namespace

TdmrDetector::PassResult TdmrDetector::detector_pass(
    const WrittenImage& written, int rowTop, std::span<const double> apriori0,
    std::span<const double> apriori1, std::span<const FeedbackProbs> feedbackIn,
    bool lastRowPair) const {
  const int cols = written.cols();
  if (static_cast<int>(apriori0.size()) != cols ||
      static_cast<int>(apriori1.size()) != cols ||
      static_cast<int>(feedbackIn.size()) != cols)
    throw std::invalid_argument("detector_pass: size mismatch");

  // Branches n = -1 .. cols-1 step from the state at column n to the state
  // at column n+1; columns -1 and cols are the boundary (state AA, bits -1).
  const int nBranches = cols + 1;
  const int nCols = cols + 2;  // state columns -1 .. cols, offset by 1

  // Per-branch cached quantities.
  std::vector<int> yPat(nBranches);
  std::vector<double> pu0p(nBranches), pu1p(nBranches);  // P(u = +1)
  for (int n = -1; n < cols; ++n) {
    const int b = n + 1;
    const int y0 = written.value(rowTop, n) > 0;
    const int y1 = written.value(rowTop + 1, n) > 0;
    const int y2 = written.value(rowTop, n + 1) > 0;
    const int y3 = written.value(rowTop + 1, n + 1) > 0;
    yPat[b] = y0 | (y1 << 1) | (y2 << 2) | (y3 << 3);
    if (n < 0) {  // boundary column written to -1
      pu0p[b] = 0.0;
      pu1p[b] = 0.0;
    } else {
      pu0p[b] = sigmoid(apriori0[n]);
      pu1p[b] = sigmoid(apriori1[n]);
    }
  }
  auto branch_fb = [&](int n) {
    // Feedback pixel X sits at (rowTop-1, n+1); beyond the right edge the
    // boundary frame guarantees an A subgrain there.
    return n + 1 < cols ? feedbackIn[n + 1] : FeedbackProbs{0.0, 0.0};
  };

  // e(s') = sum_i P(u = i) * P(y | i, s'), shared by alpha/beta recursions.
  auto emission = [&](int b, int sp) {
    const double p0 = pu0p[b], p1 = pu1p[b];
    const int y = yPat[b];
    double e = 0;
    e += (1 - p0) * (1 - p1) * out_.prob(y, 0, sp);
    e += p0 * (1 - p1) * out_.prob(y, 1, sp);
    e += (1 - p0) * p1 * out_.prob(y, 2, sp);
    e += p0 * p1 * out_.prob(y, 3, sp);
    return e;
  };

  auto normalize = [](std::vector<double>& v, size_t off) {
    double s = 0;
    for (int i = 0; i < kNumStates; ++i) s += v[off + i];
    if (s <= 0) return false;
    const double inv = 1.0 / s;
    for (int i = 0; i < kNumStates; ++i) v[off + i] *= inv;
    return true;
  };
  // Against the bottom frame no grain may continue downward.
  auto apply_bottom_mask = [&](std::vector<double>& v, size_t off) {
    if (!lastRowPair) return;
    for (int i = 0; i < kNumStates; ++i)
      if (!bottomFrameOk_[i]) v[off + i] = 0.0;
  };
  // Summed transition weight from sp into the next column, folded with the
  // backward metric there. The terminal branch enters the fixed right frame:
  // a structural indicator with no grain-probability factor.
  const int termBranch = nBranches - 1;
  auto edge_sum = [&](int b, int sp, const FeedbackProbs& fb,
                      const double* betaNxt) {
    if (b == termBranch) return rightFrameOk_[sp] ? betaNxt[kStateAA] : 0.0;
    double acc = 0;
    for (const Edge& e : edges_[sp])
      acc += e.base * fb_value(e.fb, fb) * betaNxt[e.to];
    return acc;
  };

  std::vector<double> alpha(static_cast<size_t>(nCols) * kNumStates, 0.0);
  std::vector<double> beta(static_cast<size_t>(nCols) * kNumStates, 0.0);
  alpha[kStateAA] = 1.0;
  beta[static_cast<size_t>(nCols - 1) * kNumStates + kStateAA] = 1.0;

  // Forward.
  for (int n = -1; n < cols; ++n) {
    const int b = n + 1;
    const FeedbackProbs fb = branch_fb(n);
    const size_t cur = static_cast<size_t>(b) * kNumStates;
    const size_t nxt = cur + kNumStates;
    for (int sp = 0; sp < kNumStates; ++sp) {
      const double a = alpha[cur + sp];
      if (a == 0) continue;
      const double ae = a * emission(b, sp);
      if (ae == 0) continue;
      if (b == termBranch) {
        if (rightFrameOk_[sp]) alpha[nxt + kStateAA] += ae;
      } else {
        for (const Edge& e : edges_[sp])
          alpha[nxt + e.to] += ae * e.base * fb_value(e.fb, fb);
      }
    }
    apply_bottom_mask(alpha, nxt);
    if (!normalize(alpha, nxt))
      throw std::runtime_error("detector_pass: inconsistent written image");
  }

  // Backward.
  for (int n = cols - 1; n >= -1; --n) {
    const int b = n + 1;
    const FeedbackProbs fb = branch_fb(n);
    const size_t cur = static_cast<size_t>(b) * kNumStates;
    const size_t nxt = cur + kNumStates;
    for (int sp = 0; sp < kNumStates; ++sp)
      beta[cur + sp] = edge_sum(b, sp, fb, &beta[nxt]) * emission(b, sp);
    apply_bottom_mask(beta, cur);
    if (!normalize(beta, cur))
      throw std::runtime_error("detector_pass: inconsistent written image");
  }

  PassResult res;
  res.llr.resize(2 * static_cast<size_t>(cols));
  res.feedback.resize(cols);

  // Bit posteriors per interior branch; extrinsic = posterior - a-priori.
  for (int n = 0; n < cols; ++n) {
    const int b = n + 1;
    const FeedbackProbs fb = branch_fb(n);
    const size_t cur = static_cast<size_t>(b) * kNumStates;
    const size_t nxt = cur + kNumStates;
    const int y = yPat[b];
    const double p0 = pu0p[b], p1 = pu1p[b];
    double sum[4] = {0, 0, 0, 0};
    for (int sp = 0; sp < kNumStates; ++sp) {
      const double a = alpha[cur + sp];
      if (a == 0) continue;
      const double atb = a * edge_sum(b, sp, fb, &beta[nxt]);
      if (atb == 0) continue;
      sum[0] += atb * (1 - p0) * (1 - p1) * out_.prob(y, 0, sp);
      sum[1] += atb * p0 * (1 - p1) * out_.prob(y, 1, sp);
      sum[2] += atb * (1 - p0) * p1 * out_.prob(y, 2, sp);
      sum[3] += atb * p0 * p1 * out_.prob(y, 3, sp);
    }
    auto post_llr = [](double plus, double minus) {
      if (plus <= 0) return -kLlrCap;
      if (minus <= 0) return kLlrCap;
      return clip_llr(std::log(plus / minus));
    };
    const double post0 = post_llr(sum[1] + sum[3], sum[0] + sum[2]);
    const double post1 = post_llr(sum[2] + sum[3], sum[0] + sum[1]);
    res.llr[n] = clip_llr(post0 - (n >= 0 ? apriori0[n] : 0.0));
    res.llr[cols + n] = clip_llr(post1 - apriori1[n]);
  }

  // Grain-state feedback for the next pass, from the state marginal at each
  // interior column.
  std::array<double, kNumStates> marginal;
  for (int c = 0; c < cols; ++c) {
    const size_t off = static_cast<size_t>(c + 1) * kNumStates;
    for (int s = 0; s < kNumStates; ++s)
      marginal[s] = alpha[off + s] * beta[off + s];
    res.feedback[c] = compute_feedback(marginal);
  }
  return res;
}

LlrFrame TdmrDetector::detect_image(const WrittenImage& written,
                                    const LlrFrame& apriori) const {
  const int rows = written.rows(), cols = written.cols();
  if (rows % 2 != 0)
    throw std::invalid_argument("detect_image: row count must be even");
  const size_t n = static_cast<size_t>(rows) * cols;
  if (!apriori.values.empty() && apriori.values.size() != n)
    throw std::invalid_argument("detect_image: a-priori size mismatch");
  const std::vector<double> zerosRow(cols, 0.0);

  LlrFrame out = LlrFrame::zeros(n);
  std::vector<FeedbackProbs> feedback(cols);  // all-A boundary row above
  for (int rowTop = 0; rowTop < rows; rowTop += 2) {
    std::span<const double> a0 =
        apriori.values.empty()
            ? std::span<const double>(zerosRow)
            : std::span<const double>(apriori.values)
                  .subspan(static_cast<size_t>(rowTop) * cols, cols);
    std::span<const double> a1 =
        apriori.values.empty()
            ? std::span<const double>(zerosRow)
            : std::span<const double>(apriori.values)
                  .subspan(static_cast<size_t>(rowTop + 1) * cols, cols);
    PassResult pass =
        detector_pass(written, rowTop, a0, a1, feedback, rowTop + 2 == rows);
    for (int c = 0; c < cols; ++c) {
      out.values[static_cast<size_t>(rowTop) * cols + c] = pass.llr[c];
      out.values[static_cast<size_t>(rowTop + 1) * cols + c] =
          pass.llr[cols + c];
    }
    feedback = std::move(pass.feedback);
  }
  return out;
}

}  // namespace tdmr
