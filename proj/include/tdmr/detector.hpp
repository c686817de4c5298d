#pragma once

#include <span>
#include <vector>

#include "tdmr/grain.hpp"
#include "tdmr/trellis.hpp"

namespace tdmr {

// LLR saturation used throughout the detector/decoder loop.
constexpr double kLlrCap = 100.0;

inline double clip_llr(double v) {
  if (v > kLlrCap) return kLlrCap;
  if (v < -kLlrCap) return -kLlrCap;
  return v;
}

// Per-coded-bit log-likelihood ratios, raster-ordered, log P(+1)/P(-1).
struct LlrFrame {
  std::vector<double> values;
  double saturation = kLlrCap;

  static LlrFrame zeros(size_t n) { return LlrFrame{std::vector<double>(n)}; }
};

double sigmoid(double llr);

// Grain-type feedback probabilities from the normalized
// state marginal at one column. pB sums states whose bottom subgrain is a B
// (a vertical grain extending into the next row pair), pF likewise for F.
FeedbackProbs compute_feedback(std::span<const double, kNumStates> marginal);

// Two-row forward-backward detector over a written image. Tables are built
// once per grain distribution and shared read-only across passes.
class TdmrDetector {
 public:
  explicit TdmrDetector(const GrainDistribution& dist);

  struct PassResult {
    std::vector<double> llr;                // extrinsic LLRs, rows m then m+1
    std::vector<FeedbackProbs> feedback;    // per column, for the next pass
  };

  // One pass over rows (rowTop, rowTop+1). apriori0/apriori1 hold per-column
  // a-priori LLRs for the two rows; feedbackIn holds per-column grain-state
  // feedback from the previous pass (pB = pF = 0 against the top boundary).
  // lastRowPair marks the pass touching the bottom A-grain frame, which no
  // grain may cross: states whose bottom subgrain continues downward are
  // excluded there.
  PassResult detector_pass(const WrittenImage& written, int rowTop,
                           std::span<const double> apriori0,
                           std::span<const double> apriori1,
                           std::span<const FeedbackProbs> feedbackIn,
                           bool lastRowPair) const;

  // Full image scan, threading feedback between row pairs.
  LlrFrame detect_image(const WrittenImage& written,
                        const LlrFrame& apriori) const;

  const TransitionTable& transitions() const { return trans_; }
  const OutputProbTable& outputs() const { return out_; }

 private:
  GrainDistribution dist_;
  TransitionTable trans_;
  OutputProbTable out_;

  // Flattened sparse successor lists with the distribution folded in.
  struct Edge {
    int to;
    double base;    // grain-probability part of the factor
    FbFactor fb;
  };
  std::array<std::vector<Edge>, kNumStates> edges_;

  // States compatible with the fixed A-grain frame at the right/bottom edge.
  std::array<bool, kNumStates> rightFrameOk_{};
  std::array<bool, kNumStates> bottomFrameOk_{};
};

}  // namespace tdmr
