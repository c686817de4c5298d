#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tdmr/convcode.hpp"

namespace tdmr {

// Fixed random permutation of {0..n-1}.
class Interleaver {
 public:
  Interleaver(size_t n, uint64_t seed);

  size_t size() const { return perm_.size(); }

  // out[perm[i]] = in[i].
  template <typename T>
  std::vector<T> interleave(const std::vector<T>& in) const {
    std::vector<T> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[perm_[i]] = in[i];
    return out;
  }
  template <typename T>
  std::vector<T> deinterleave(const std::vector<T>& in) const {
    std::vector<T> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[i] = in[perm_[i]];
    return out;
  }

 private:
  std::vector<uint32_t> perm_;
};

// Random puncturing (target < input) or repetition (target > input) to a
// fixed output length. Puncture positions are drawn without replacement;
// repetition counts differ by at most one across positions.
class RateAdapter {
 public:
  RateAdapter(size_t inputLen, size_t outputLen, uint64_t seed);

  size_t input_size() const { return inputLen_; }
  size_t output_size() const { return src_.size(); }

  // Gathers input values into the adapted stream (bits or LLRs).
  template <typename T>
  std::vector<T> adapt(const std::vector<T>& in) const {
    std::vector<T> out(src_.size());
    for (size_t i = 0; i < src_.size(); ++i) out[i] = in[src_[i]];
    return out;
  }

  // LLR adjoint: punctured positions get 0, repeated copies sum.
  std::vector<double> de_adapt(const std::vector<double>& llr) const;

 private:
  size_t inputLen_;
  std::vector<uint32_t> src_;  // source input index per output position
};

// Decoder iteration counts. Non-iterative runs: one detector pass set and
// 30 decoder-loop iterations; iterative: 8 decoder-loop iterations per
// detector exchange, at most 30 exchanges.
struct DecoderSchedule {
  int innerIters = 30;
  int outerIters = 1;

  static DecoderSchedule non_iterative() { return {30, 1}; }
  static DecoderSchedule iterative(int maxOuter = 30) { return {8, maxOuter}; }
};

// Rate-1/4 serially concatenated code (outer non-recursive + inner
// recursive systematic, both memory 3) with random interleavers and rate
// adaptation. Instances are immutable after construction.
class ScccCodec {
 public:
  static constexpr size_t kUserBits = 32768;

  // outputLen is the adapted codeword length (rows * 512 in the harness).
  ScccCodec(size_t outputLen, uint64_t seed);

  size_t output_size() const { return adapter_.output_size(); }
  const RateAdapter& adapter() const { return adapter_; }
  const ConvCode& outer() const { return outer_; }
  const ConvCode& inner() const { return inner_; }

  std::vector<uint8_t> encode(const std::vector<uint8_t>& user) const;

  struct DecodeResult {
    std::vector<uint8_t> bits;     // hard decisions, kUserBits
    int itersUsed = 0;             // decoder-loop iterations actually run
    bool matchedKnown = false;
    std::vector<double> codeLlr;   // extrinsic a-priori for the detector,
                                   // one per adapted output position
  };

  // channelLlr: one LLR per adapted output position. knownData enables the
  // genie stopping rule. outerState carries the outer decoder's extrinsic
  // across detector exchanges; pass the same vector back in on the next
  // call (empty on the first).
  DecodeResult decode(const std::vector<double>& channelLlr,
                      const DecoderSchedule& schedule,
                      const std::vector<uint8_t>* knownData = nullptr,
                      std::vector<double>* outerState = nullptr) const;

 private:
  ConvCode outer_;
  ConvCode inner_;
  Interleaver pi1_;
  Interleaver pi2_;
  RateAdapter adapter_;
};

}  // namespace tdmr
