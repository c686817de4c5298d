#include "tdmr/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace tdmr {

double llr_to_channel(double detectorLlr, const LlrGaussianModel& model) {
  if (detectorLlr >= kLlrCap) return kLlrCap;
  if (detectorLlr <= -kLlrCap) return -kLlrCap;
  return clip_llr(2.0 * model.mean * detectorLlr / model.variance);
}

std::string to_string(SimMode mode) {
  return mode == SimMode::NonIterative ? "non-iterative" : "iterative";
}

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "non-iterative" || s == "noniterative") return SimMode::NonIterative;
  if (s == "iterative") return SimMode::Iterative;
  throw std::invalid_argument("unknown mode: " + s);
}

int rows_for_rate(double rate) {
  if (!(rate > 0 && rate <= 1))
    throw std::invalid_argument("rate must lie in (0, 1]");
  const double rows = (ScccCodec::kUserBits / rate) / kImageCols;
  int even = 2 * static_cast<int>(std::llround(rows / 2.0));
  if (even < 2) even = 2;
  return even;
}

BlockResult run_block(const SimConfig& cfg, const ScccCodec& codec,
                      const TdmrDetector& detector, int blockIndex) {
  const uint64_t blockSeed =
      splitmix64(cfg.seed ^ static_cast<uint64_t>(blockIndex));
  std::mt19937_64 rng(blockSeed);

  std::vector<uint8_t> user(ScccCodec::kUserBits);
  for (auto& b : user) b = static_cast<uint8_t>(rng() & 1);
  const std::vector<uint8_t> coded = codec.encode(user);

  const int rows = static_cast<int>(coded.size()) / kImageCols;
  const GrainImage image = generate_grain_image(
      solve_grain_distribution(cfg.p2), rows, kImageCols, rng());
  std::vector<int8_t> polar(coded.size());
  for (size_t i = 0; i < coded.size(); ++i) polar[i] = coded[i] ? 1 : -1;
  const WrittenImage written = write_bits(image, polar);

  const DecoderSchedule schedule = cfg.schedule();
  LlrFrame apriori;  // empty = zero on the first exchange
  std::vector<double> outerState;
  BlockResult res;
  for (int t = 0; t < schedule.outerIters; ++t) {
    const LlrFrame extrinsic = detector.detect_image(written, apriori);
    std::vector<double> channel(extrinsic.values.size());
    for (size_t i = 0; i < channel.size(); ++i)
      channel[i] = llr_to_channel(extrinsic.values[i], cfg.gauss);
    const auto dec = codec.decode(
        channel, schedule, cfg.genieStopping ? &user : nullptr, &outerState);
    res.outerIters = t + 1;
    res.bitErrors = 0;
    for (size_t k = 0; k < user.size(); ++k)
      if (dec.bits[k] != user[k]) ++res.bitErrors;
    if (cfg.genieStopping && dec.matchedKnown) break;
    apriori.values = dec.codeLlr;
  }
  return res;
}

PointResult run_point(const SimConfig& cfg, bool stopOnError) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScccCodec codec(
      static_cast<size_t>(rows_for_rate(cfg.rate)) * kImageCols,
      splitmix64(cfg.seed ^ 0xC0DEC0DEull));
  const TdmrDetector detector(solve_grain_distribution(cfg.p2));

  int nThreads = cfg.threads > 0
                     ? cfg.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  if (nThreads < 1) nThreads = 1;
  if (nThreads > cfg.blocks) nThreads = cfg.blocks;

  std::atomic<int> nextBlock{0};
  std::atomic<int64_t> errors{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  int64_t outerSum = 0;
  int outerMax = 0;
  int blocksRun = 0;

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const int b = nextBlock.fetch_add(1);
      if (b >= cfg.blocks) return;
      const BlockResult r = run_block(cfg, codec, detector, b);
      errors += r.bitErrors;
      {
        std::lock_guard<std::mutex> lock(mu);
        outerSum += r.outerIters;
        outerMax = std::max(outerMax, r.outerIters);
        ++blocksRun;
      }
      if (stopOnError && r.bitErrors > 0) abort = true;
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < nThreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  PointResult p;
  p.p2 = cfg.p2;
  p.rate = cfg.rate;
  p.mode = to_string(cfg.mode);
  p.blocks = blocksRun;
  p.bitErrors = errors.load();
  p.ber = static_cast<double>(p.bitErrors) /
          (static_cast<double>(ScccCodec::kUserBits) * blocksRun);
  p.avgOuterIters = static_cast<double>(outerSum) / blocksRun;
  p.maxOuterIters = outerMax;
  p.seed = cfg.seed;
  p.wallSecs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return p;
}

RateSearchResult rate_search(const SimConfig& base, const RateGrid& grid) {
  if (!(grid.step > 0 && grid.min > 0 && grid.max >= grid.min))
    throw std::invalid_argument("bad rate grid");
  RateSearchResult res;
  const int steps =
      static_cast<int>(std::floor((grid.max - grid.min) / grid.step + 1e-9));
  for (int i = steps; i >= 0; --i) {
    SimConfig cfg = base;
    cfg.rate = grid.min + i * grid.step;
    PointResult p = run_point(cfg, /*stopOnError=*/true);
    res.points.push_back(p);
    if (p.bitErrors == 0 && p.blocks == cfg.blocks) {
      res.bestRate = cfg.rate;
      break;
    }
  }
  return res;
}

std::string csv_header() {
  return "p2,rate,user_bits_per_grain,mode,blocks,bit_errors,ber,"
         "avg_outer_iters,max_outer_iters,seed,wall_secs";
}

std::string csv_row(const PointResult& p) {
  std::ostringstream os;
  os.precision(10);
  os << p.p2 << ',' << p.rate << ',' << 2.0 * p.rate << ',' << p.mode << ','
     << p.blocks << ',' << p.bitErrors << ',' << p.ber << ','
     << p.avgOuterIters << ',' << p.maxOuterIters << ',' << p.seed << ','
     << p.wallSecs;
  return os.str();
}

void write_csv(const std::string& path, const std::vector<PointResult>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << csv_header() << '\n';
  for (const auto& r : rows) f << csv_row(r) << '\n';
}

void write_manifest(const std::string& path, const SimConfig& cfg,
                    const RateGrid* grid) {
  nlohmann::json j;
  j["p2"] = cfg.p2;
  j["rate"] = cfg.rate;
  j["mode"] = to_string(cfg.mode);
  j["blocks"] = cfg.blocks;
  j["seed"] = cfg.seed;
  j["ber_target"] = cfg.berTarget;
  j["gauss_mean"] = cfg.gauss.mean;
  j["gauss_var"] = cfg.gauss.variance;
  j["genie"] = cfg.genieStopping;
  j["max_outer_iters"] = cfg.maxOuterIters;
  j["threads"] = cfg.threads;
  j["image_cols"] = kImageCols;
  j["image_rows"] = rows_for_rate(cfg.rate);
  j["user_bits"] = ScccCodec::kUserBits;
  if (grid) {
    j["rate_grid"] = {{"min", grid->min}, {"max", grid->max},
                      {"step", grid->step}};
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << j.dump(2) << '\n';
}

SimConfig parse_config_text(const std::string& text, SimConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineNo) +
                                  ": expected key=value");
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t\r");
      const size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "p2")
      base.p2 = std::stod(val);
    else if (key == "rate")
      base.rate = std::stod(val);
    else if (key == "mode")
      base.mode = sim_mode_from_string(val);
    else if (key == "blocks")
      base.blocks = std::stoi(val);
    else if (key == "seed")
      base.seed = std::stoull(val);
    else if (key == "ber_target")
      base.berTarget = std::stod(val);
    else if (key == "gauss_mean")
      base.gauss.mean = std::stod(val);
    else if (key == "gauss_var")
      base.gauss.variance = std::stod(val);
    else if (key == "genie")
      base.genieStopping = (val == "1" || val == "true" || val == "on");
    else if (key == "max_outer_iters")
      base.maxOuterIters = std::stoi(val);
    else if (key == "threads")
      base.threads = std::stoi(val);
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return base;
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config_text(os.str(), base);
}

}  // namespace tdmr
