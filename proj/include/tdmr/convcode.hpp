#pragma once

#include <cstdint>
#include <vector>

namespace tdmr {

// Memory-3, rate-1/2 binary convolutional codes used by the serial
// concatenation: a non-recursive outer code with generators (1+X, 1+X+X^3)
// and a recursive systematic inner code with generators (1, (1+X+X^3)/(1+X)).
enum class ConvKind { OuterNrcc, InnerRsc };

struct ConvCode {
  static constexpr int kStates = 8;

  explicit ConvCode(ConvKind kind);

  ConvKind kind() const { return kind_; }

  // One trellis step: input bit u from state s gives (nextState, c0, c1).
  struct Step {
    uint8_t next;
    uint8_t c0;
    uint8_t c1;
  };
  const Step& step(int state, int u) const { return steps_[state][u]; }

  // Streaming encode, starting and ending wherever the data leads (the
  // trellis is left unterminated). Output is c0, c1 interleaved per step.
  std::vector<uint8_t> encode(const std::vector<uint8_t>& input) const;

  // Log-MAP (BCJR) soft-in soft-out decode with exact max* recursions.
  // All LLRs are log P(bit = 1) / P(bit = 0), clipped to the global cap.
  // codeLlr has 2 entries per step; aprioriLlr one per step (empty = zero).
  // Initial state is 0 (encoder starts cleared); final state is free.
  struct SisoResult {
    std::vector<double> inputPosterior;   // full posterior of input bits
    std::vector<double> inputExtrinsic;   // posterior minus a-priori
    std::vector<double> codeExtrinsic;    // code-bit posterior minus codeLlr
  };
  SisoResult map_decode(const std::vector<double>& codeLlr,
                        const std::vector<double>& aprioriLlr = {}) const;

 private:
  ConvKind kind_;
  Step steps_[kStates][2];
};

}  // namespace tdmr
