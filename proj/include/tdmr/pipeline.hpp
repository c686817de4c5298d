#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdmr/detector.hpp"
#include "tdmr/grain.hpp"
#include "tdmr/sccc.hpp"

namespace tdmr {

// Gaussian model of the detector-LLR distribution used as the conditional
// channel PDF between detector and decoder.
struct LlrGaussianModel {
  double mean = 1.0;
  double variance = 1.69;
};

// Maps a detector LLR to a channel LLR for the inner MAP decoder:
// 2*mean*llr/variance, clipped; saturated inputs stay saturated.
double llr_to_channel(double detectorLlr, const LlrGaussianModel& model);

enum class SimMode { NonIterative, Iterative };

std::string to_string(SimMode mode);
SimMode sim_mode_from_string(const std::string& s);

struct SimConfig {
  double p2 = 0.0;
  double rate = 0.25;
  SimMode mode = SimMode::Iterative;
  int blocks = 20;
  uint64_t seed = 1;
  double berTarget = 1e-5;
  LlrGaussianModel gauss;
  bool genieStopping = true;
  int maxOuterIters = 30;
  int threads = 0;  // 0 = hardware concurrency

  DecoderSchedule schedule() const {
    return mode == SimMode::NonIterative ? DecoderSchedule::non_iterative()
                                         : DecoderSchedule::iterative(maxOuterIters);
  }
};

constexpr int kImageCols = 512;

// Image rows for a code rate: round((32768/r)/512), snapped to the nearest
// even count (the two-row detector consumes rows in pairs).
int rows_for_rate(double rate);

struct BlockResult {
  int64_t bitErrors = 0;
  int outerIters = 0;
};

// Full transmit/receive chain for one block: encode, write onto a fresh
// grain image, then detector/decoder exchanges per the schedule.
BlockResult run_block(const SimConfig& cfg, const ScccCodec& codec,
                      const TdmrDetector& detector, int blockIndex);

struct PointResult {
  double p2 = 0;
  double rate = 0;
  std::string mode;
  int blocks = 0;
  int64_t bitErrors = 0;
  double ber = 0;
  double avgOuterIters = 0;
  int maxOuterIters = 0;
  uint64_t seed = 0;
  double wallSecs = 0;
};

// Runs cfg.blocks blocks (in parallel worker threads) at one (p2, rate)
// point. stopOnError aborts outstanding work once any bit error is seen
// (used by the rate search, where a single error already fails the point).
PointResult run_point(const SimConfig& cfg, bool stopOnError = false);

struct RateSearchResult {
  double bestRate = 0;  // 0 when no rate on the grid passes
  std::vector<PointResult> points;
};

struct RateGrid {
  double min = 0.05;
  double max = 0.50;
  double step = 0.01;
};

// Highest rate on the grid decoding all budget blocks without bit errors
// (valid when berTarget * 32768 * blocks < 1). Scans downward and stops at
// the first passing rate.
RateSearchResult rate_search(const SimConfig& base, const RateGrid& grid);

// CSV emission; header:
// p2,rate,user_bits_per_grain,mode,blocks,bit_errors,ber,avg_outer_iters,
// max_outer_iters,seed,wall_secs
std::string csv_header();
std::string csv_row(const PointResult& p);
void write_csv(const std::string& path, const std::vector<PointResult>& rows);

// JSON manifest of every config value, written next to the CSV.
void write_manifest(const std::string& path, const SimConfig& cfg,
                    const RateGrid* grid = nullptr);

// Flat key=value config file ('#' comments). Unknown keys are an error.
SimConfig parse_config_text(const std::string& text, SimConfig base = {});
SimConfig load_config_file(const std::string& path, SimConfig base = {});

}  // namespace tdmr
