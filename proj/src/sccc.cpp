#include "tdmr/sccc.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "tdmr/detector.hpp"  // clip_llr
#include "tdmr/grain.hpp"     // splitmix64

namespace tdmr {

Interleaver::Interleaver(size_t n, uint64_t seed) : perm_(n) {
  std::iota(perm_.begin(), perm_.end(), 0u);
  std::mt19937_64 rng(splitmix64(seed));
  std::shuffle(perm_.begin(), perm_.end(), rng);
}

RateAdapter::RateAdapter(size_t inputLen, size_t outputLen, uint64_t seed)
    : inputLen_(inputLen) {
  if (inputLen == 0 || outputLen == 0)
    throw std::invalid_argument("rate adapter: empty stream");
  std::mt19937_64 rng(splitmix64(seed));
  src_.reserve(outputLen);
  if (outputLen <= inputLen) {
    // Puncture inputLen - outputLen randomly chosen positions.
    std::vector<uint32_t> keep(inputLen);
    std::iota(keep.begin(), keep.end(), 0u);
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(outputLen);
    std::sort(keep.begin(), keep.end());
    src_ = std::move(keep);
  } else {
    // Repeat every position floor(out/in) times, plus one extra copy at
    // out mod in randomly chosen positions.
    const size_t base = outputLen / inputLen;
    const size_t rem = outputLen % inputLen;
    std::vector<uint8_t> extra(inputLen, 0);
    std::vector<uint32_t> order(inputLen);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i = 0; i < rem; ++i) extra[order[i]] = 1;
    for (size_t i = 0; i < inputLen; ++i)
      for (size_t c = 0; c < base + extra[i]; ++c)
        src_.push_back(static_cast<uint32_t>(i));
  }
}

std::vector<double> RateAdapter::de_adapt(const std::vector<double>& llr) const {
  if (llr.size() != src_.size())
    throw std::invalid_argument("de_adapt: length mismatch");
  std::vector<double> out(inputLen_, 0.0);
  for (size_t i = 0; i < src_.size(); ++i) out[src_[i]] += llr[i];
  for (double& v : out) v = clip_llr(v);
  return out;
}

ScccCodec::ScccCodec(size_t outputLen, uint64_t seed)
    : outer_(ConvKind::OuterNrcc),
      inner_(ConvKind::InnerRsc),
      pi1_(2 * kUserBits, splitmix64(seed ^ 0x1111)),
      pi2_(4 * kUserBits, splitmix64(seed ^ 0x2222)),
      adapter_(4 * kUserBits, outputLen, splitmix64(seed ^ 0x3333)) {}

std::vector<uint8_t> ScccCodec::encode(const std::vector<uint8_t>& user) const {
  if (user.size() != kUserBits)
    throw std::invalid_argument("encode: user block must be 32768 bits");
  const auto outerOut = outer_.encode(user);
  const auto innerIn = pi1_.interleave(outerOut);
  const auto innerOut = inner_.encode(innerIn);
  return adapter_.adapt(pi2_.interleave(innerOut));
}

ScccCodec::DecodeResult ScccCodec::decode(
    const std::vector<double>& channelLlr, const DecoderSchedule& schedule,
    const std::vector<uint8_t>* knownData,
    std::vector<double>* outerState) const {
  if (channelLlr.size() != adapter_.output_size())
    throw std::invalid_argument("decode: channel LLR length mismatch");
  const std::vector<double> innerCodeLlr =
      pi2_.deinterleave(adapter_.de_adapt(channelLlr));

  std::vector<double> outerCodeExtr;  // inner a-priori, outer-output order
  if (outerState && !outerState->empty()) {
    if (outerState->size() != 2 * kUserBits)
      throw std::invalid_argument("decode: bad outer state size");
    outerCodeExtr = *outerState;
  } else {
    outerCodeExtr.assign(2 * kUserBits, 0.0);
  }

  DecodeResult res;
  for (int it = 0; it < schedule.innerIters; ++it) {
    const auto innerRes =
        inner_.map_decode(innerCodeLlr, pi1_.interleave(outerCodeExtr));
    res.codeLlr = innerRes.codeExtrinsic;  // kept from the latest pass
    const auto outerRes =
        outer_.map_decode(pi1_.deinterleave(innerRes.inputExtrinsic));
    outerCodeExtr = outerRes.codeExtrinsic;
    res.bits.resize(kUserBits);
    for (size_t k = 0; k < kUserBits; ++k)
      res.bits[k] = outerRes.inputPosterior[k] > 0 ? 1 : 0;
    res.itersUsed = it + 1;
    if (knownData && res.bits == *knownData) {
      res.matchedKnown = true;
      break;
    }
  }
  if (outerState) *outerState = outerCodeExtr;
  res.codeLlr = adapter_.adapt(pi2_.interleave(res.codeLlr));
  return res;
}

}  // namespace tdmr
