#include "tdmr/grain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tdmr {

namespace {

constexpr const char* kLabelChars = "ABCDEFGHI";

// Retry budget for region regeneration before a hard error. Dense mixes can
// push the per-attempt success rate of greedy raster placement on small
// blocks to a few percent, so the budget is generous; attempts are cheap.
constexpr int kRetryBudget = 20000;

constexpr int kSubImageDim = 16;
constexpr int kSubImagePool = 1024;

// p2 above which large images are assembled from 16x16 sub-images.
constexpr double kSubImageThreshold = 0.36;

}  // namespace

char subgrain_char(Subgrain s) { return kLabelChars[static_cast<int>(s)]; }

Subgrain subgrain_from_char(char c) {
  const char* p = std::find(kLabelChars, kLabelChars + kNumSubgrains, c);
  if (p == kLabelChars + kNumSubgrains)
    throw std::invalid_argument("bad subgrain label");
  return static_cast<Subgrain>(p - kLabelChars);
}

int grain_cells(int type) {
  static constexpr int kCells[4] = {1, 2, 2, 4};
  return kCells[type];
}

bool GrainDistribution::valid(double tol) const {
  if (p1 < -tol || p2 < -tol || p3 < -tol || p4 < -tol) return false;
  if (std::abs(p1 + p2 + p3 + p4 - 1.0) > tol) return false;
  if (std::abs(p2 - p3) > tol) return false;
  if (std::abs(p1 + 2 * p2 + 2 * p3 + 4 * p4 - 2.0) > tol) return false;
  return true;
}

GrainDistribution solve_grain_distribution(double p2) {
  if (!(p2 >= 0.0 && p2 <= 0.5))
    throw std::invalid_argument("p2 must lie in [0, 0.5]");
  GrainDistribution d;
  d.p2 = p2;
  d.p3 = p2;
  d.p4 = (1.0 - 2.0 * p2) / 3.0;
  d.p1 = 2.0 * (1.0 - 2.0 * p2) / 3.0;
  return d;
}

GrainImage::GrainImage(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      cells_(static_cast<size_t>(rows) * cols, Subgrain::A) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("image dimensions must be positive");
}

WrittenImage::WrittenImage(int rows, int cols)
    : rows_(rows), cols_(cols),
      values_(static_cast<size_t>(rows) * cols, int8_t{-1}) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("image dimensions must be positive");
}

namespace {

// Places the 2x2 block anchored at (r, c).
void place_quad(GrainImage& img, int r, int c) {
  img.set(r, c, Subgrain::F);
  img.set(r + 1, c, Subgrain::G);
  img.set(r, c + 1, Subgrain::H);
  img.set(r + 1, c + 1, Subgrain::I);
}

// Like target_counts but with unbiased stochastic rounding, so repeated
// attempts explore neighbouring count mixes (a fixed rounding can be
// geometrically infeasible, e.g. by row parity on two-row images).
std::array<int64_t, 4> sampled_counts(const GrainDistribution& dist,
                                      int64_t area, std::mt19937_64& rng) {
  const double grains = static_cast<double>(area) / 2.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto round_rand = [&](double x) {
    const double fl = std::floor(x);
    return static_cast<int64_t>(fl) + (u(rng) < x - fl ? 1 : 0);
  };
  std::array<int64_t, 4> n{};
  n[3] = round_rand(dist.p4 * grains);
  n[1] = round_rand(dist.p2 * grains);
  n[2] = n[1];
  auto used = [&] { return 2 * n[1] + 2 * n[2] + 4 * n[3]; };
  while (used() > area) {
    if (n[3] > 0 && dist.p4 > 0)
      --n[3];
    else if (n[1] > 0) {
      --n[1];
      --n[2];
    } else {
      --n[3];
    }
  }
  n[0] = area - used();
  return n;
}

// One raster-scan greedy attempt; returns false on a dead end.
bool try_raster_tiling(const GrainDistribution& dist, int rows, int cols,
                       std::mt19937_64& rng, GrainImage& out) {
  std::vector<uint8_t> used(static_cast<size_t>(rows) * cols, 0);
  auto free_at = [&](int r, int c) {
    return r < rows && c < cols && !used[static_cast<size_t>(r) * cols + c];
  };
  auto mark = [&](int r, int c) { used[static_cast<size_t>(r) * cols + c] = 1; };

  std::array<int64_t, 4> remaining =
      sampled_counts(dist, static_cast<int64_t>(rows) * cols, rng);
  GrainImage img(rows, cols);

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!free_at(r, c)) continue;
      double w[4] = {0, 0, 0, 0};
      if (remaining[0] > 0) w[0] = static_cast<double>(remaining[0]);
      if (remaining[1] > 0 && free_at(r + 1, c))
        w[1] = static_cast<double>(remaining[1]);
      if (remaining[2] > 0 && free_at(r, c + 1))
        w[2] = static_cast<double>(remaining[2]);
      if (remaining[3] > 0 && free_at(r + 1, c) && free_at(r, c + 1) &&
          free_at(r + 1, c + 1))
        w[3] = static_cast<double>(remaining[3]);
      const double total = w[0] + w[1] + w[2] + w[3];
      if (total <= 0) return false;
      double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
      int type = 0;
      for (; type < 3; ++type) {
        if (pick < w[type]) break;
        pick -= w[type];
      }
      --remaining[type];
      mark(r, c);
      switch (type) {
        case 0:
          img.set(r, c, Subgrain::A);
          break;
        case 1:
          img.set(r, c, Subgrain::B);
          img.set(r + 1, c, Subgrain::C);
          mark(r + 1, c);
          break;
        case 2:
          img.set(r, c, Subgrain::D);
          img.set(r, c + 1, Subgrain::E);
          mark(r, c + 1);
          break;
        default:
          place_quad(img, r, c);
          mark(r + 1, c);
          mark(r, c + 1);
          mark(r + 1, c + 1);
          break;
      }
    }
  }
  out = std::move(img);
  return true;
}

// One largest-first attempt: 2x2 grains by random sequential placement,
// then both domino orientations interleaved, then 1x1 fill.
bool try_largest_first(const GrainDistribution& dist, int rows, int cols,
                       std::mt19937_64& rng, GrainImage& out) {
  const int64_t area = static_cast<int64_t>(rows) * cols;
  std::array<int64_t, 4> counts = sampled_counts(dist, area, rng);
  std::vector<uint8_t> used(static_cast<size_t>(area), 0);
  auto idx = [&](int r, int c) { return static_cast<size_t>(r) * cols + c; };
  GrainImage img(rows, cols);

  // 2x2 grains.
  if (counts[3] > 0) {
    std::vector<int32_t> anchors;
    anchors.reserve(static_cast<size_t>(rows - 1) * (cols - 1));
    for (int r = 0; r + 1 < rows; ++r)
      for (int c = 0; c + 1 < cols; ++c)
        anchors.push_back(r * cols + c);
    std::shuffle(anchors.begin(), anchors.end(), rng);
    int64_t placed = 0;
    for (int32_t a : anchors) {
      if (placed == counts[3]) break;
      const int r = a / cols, c = a % cols;
      if (used[idx(r, c)] || used[idx(r + 1, c)] || used[idx(r, c + 1)] ||
          used[idx(r + 1, c + 1)])
        continue;
      used[idx(r, c)] = used[idx(r + 1, c)] = used[idx(r, c + 1)] =
          used[idx(r + 1, c + 1)] = 1;
      place_quad(img, r, c);
      ++placed;
    }
    if (placed != counts[3]) return false;
  }

  // Vertical and horizontal dominoes, one shuffled candidate stream.
  if (counts[1] > 0 || counts[2] > 0) {
    std::vector<int32_t> cand;  // encoded as 2*(r*cols+c) + orientation
    cand.reserve(2 * static_cast<size_t>(area));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (r + 1 < rows) cand.push_back(2 * (r * cols + c));
        if (c + 1 < cols) cand.push_back(2 * (r * cols + c) + 1);
      }
    std::shuffle(cand.begin(), cand.end(), rng);
    int64_t needV = counts[1], needH = counts[2];
    for (int32_t e : cand) {
      if (needV == 0 && needH == 0) break;
      const bool horizontal = e & 1;
      const int cell = e >> 1;
      const int r = cell / cols, c = cell % cols;
      if (used[idx(r, c)]) continue;
      if (horizontal) {
        if (needH == 0 || used[idx(r, c + 1)]) continue;
        used[idx(r, c)] = used[idx(r, c + 1)] = 1;
        img.set(r, c, Subgrain::D);
        img.set(r, c + 1, Subgrain::E);
        --needH;
      } else {
        if (needV == 0 || used[idx(r + 1, c)]) continue;
        used[idx(r, c)] = used[idx(r + 1, c)] = 1;
        img.set(r, c, Subgrain::B);
        img.set(r + 1, c, Subgrain::C);
        --needV;
      }
    }
    if (needV != 0 || needH != 0) return false;
  }

  // Remaining holes become 1x1 grains (already labelled A by default).
  out = std::move(img);
  return true;
}

}  // namespace

GrainImage random_tiling(const GrainDistribution& dist, int rows, int cols,
                         std::mt19937_64& rng) {
  GrainImage img(rows, cols);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt)
    if (try_raster_tiling(dist, rows, cols, rng, img)) return img;
  throw std::runtime_error("random_tiling: retry budget exhausted");
}

GrainImage generate_grain_image(const GrainDistribution& dist, int rows,
                                int cols, uint64_t seed) {
  if (rows < 2 || cols < 2 || rows % 2 != 0 || cols % 2 != 0)
    throw std::invalid_argument("rows and cols must be even and >= 2");
  if (!dist.valid(1e-9))
    throw std::invalid_argument("invalid grain distribution");
  std::mt19937_64 rng(splitmix64(seed));

  if (dist.p2 > kSubImageThreshold) {
    // High-p2 path: assemble from pools of independent sub-images, at most
    // 16x16 each; dimensions not divisible by 16 get a final strip of
    // residual (even) size. Grains never cross sub-image seams; this mirrors
    // the generation workaround for dense domino packings.
    auto chunk = [](int n) {
      std::vector<int> sizes(n / kSubImageDim, kSubImageDim);
      if (n % kSubImageDim != 0) sizes.push_back(n % kSubImageDim);
      return sizes;
    };
    const std::vector<int> rowSizes = chunk(rows), colSizes = chunk(cols);
    std::map<std::pair<int, int>, std::vector<GrainImage>> pools;
    for (int h : rowSizes)
      for (int w : colSizes) {
        auto& pool = pools[{h, w}];
        if (!pool.empty()) continue;
        pool.reserve(kSubImagePool);
        for (int i = 0; i < kSubImagePool; ++i)
          pool.push_back(random_tiling(dist, h, w, rng));
      }
    GrainImage img(rows, cols);
    std::uniform_int_distribution<int> pick(0, kSubImagePool - 1);
    int br = 0;
    for (int h : rowSizes) {
      int bc = 0;
      for (int w : colSizes) {
        const GrainImage& sub = pools[{h, w}][pick(rng)];
        for (int r = 0; r < h; ++r)
          for (int c = 0; c < w; ++c) img.set(br + r, bc + c, sub.at(r, c));
        bc += w;
      }
      br += h;
    }
    return img;
  }

  GrainImage img(rows, cols);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt)
    if (try_largest_first(dist, rows, cols, rng, img)) return img;
  throw std::runtime_error("generate_grain_image: retry budget exhausted");
}

std::pair<int, int> last_written_cell(const GrainImage& image, int r, int c) {
  switch (image.at(r, c)) {
    case Subgrain::A: return {r, c};
    case Subgrain::B: return {r + 1, c};
    case Subgrain::C: return {r, c};
    case Subgrain::D: return {r, c + 1};
    case Subgrain::E: return {r, c};
    case Subgrain::F: return {r + 1, c + 1};
    case Subgrain::G: return {r, c + 1};
    case Subgrain::H: return {r + 1, c};
    default: return {r, c};  // I
  }
}

WrittenImage write_bits(const GrainImage& image,
                        const std::vector<int8_t>& bits) {
  const int rows = image.rows(), cols = image.cols();
  if (bits.size() != static_cast<size_t>(rows) * cols)
    throw std::invalid_argument("write_bits: bit count != rows*cols");
  WrittenImage w(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      auto [lr, lc] = last_written_cell(image, r, c);
      w.set(r, c, bits[static_cast<size_t>(lr) * cols + lc]);
    }
  return w;
}

bool validate_grain_image(const GrainImage& image, std::string* why) {
  const int rows = image.rows(), cols = image.cols();
  auto fail = [&](int r, int c, const char* msg) {
    if (why) {
      std::ostringstream os;
      os << "cell (" << r << "," << c << "): " << msg;
      *why = os.str();
    }
    return false;
  };
  // The boundary accessor returns A outside, so partner checks against
  // out-of-range coordinates also catch grains crossing the boundary.
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const bool last_row = r + 1 >= rows, last_col = c + 1 >= cols;
      switch (image.at(r, c)) {
        case Subgrain::A:
          break;
        case Subgrain::B:
          if (last_row || image.at(r + 1, c) != Subgrain::C)
            return fail(r, c, "B without C below");
          break;
        case Subgrain::C:
          if (r == 0 || image.at(r - 1, c) != Subgrain::B)
            return fail(r, c, "C without B above");
          break;
        case Subgrain::D:
          if (last_col || image.at(r, c + 1) != Subgrain::E)
            return fail(r, c, "D without E right");
          break;
        case Subgrain::E:
          if (c == 0 || image.at(r, c - 1) != Subgrain::D)
            return fail(r, c, "E without D left");
          break;
        case Subgrain::F:
          if (last_row || last_col || image.at(r + 1, c) != Subgrain::G ||
              image.at(r, c + 1) != Subgrain::H ||
              image.at(r + 1, c + 1) != Subgrain::I)
            return fail(r, c, "incomplete FGHI block");
          break;
        case Subgrain::G:
          if (r == 0 || image.at(r - 1, c) != Subgrain::F)
            return fail(r, c, "G without F above");
          break;
        case Subgrain::H:
          if (c == 0 || image.at(r, c - 1) != Subgrain::F)
            return fail(r, c, "H without F left");
          break;
        case Subgrain::I:
          if (r == 0 || c == 0 || image.at(r - 1, c - 1) != Subgrain::F)
            return fail(r, c, "I without F diagonal");
          break;
      }
    }
  return true;
}

std::array<int64_t, 4> count_grains(const GrainImage& image) {
  std::array<int64_t, 4> n{};
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < image.cols(); ++c)
      switch (image.at(r, c)) {
        case Subgrain::A: ++n[0]; break;
        case Subgrain::B: ++n[1]; break;
        case Subgrain::D: ++n[2]; break;
        case Subgrain::F: ++n[3]; break;
        default: break;
      }
  return n;
}

std::string to_text(const GrainImage& image) {
  std::string out;
  out.reserve(static_cast<size_t>(image.rows()) * (image.cols() + 1));
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c)
      out.push_back(subgrain_char(image.at(r, c)));
    out.push_back('\n');
  }
  return out;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) lines.push_back(line);
  if (lines.empty()) throw std::invalid_argument("empty image text");
  for (const auto& l : lines)
    if (l.size() != lines[0].size())
      throw std::invalid_argument("ragged image text");
  return lines;
}

}  // namespace

GrainImage grain_image_from_text(const std::string& text) {
  auto lines = split_lines(text);
  GrainImage img(static_cast<int>(lines.size()),
                 static_cast<int>(lines[0].size()));
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c)
      img.set(r, c, subgrain_from_char(lines[r][c]));
  return img;
}

std::string to_text(const WrittenImage& image) {
  std::string out;
  out.reserve(static_cast<size_t>(image.rows()) * (image.cols() + 1));
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c)
      out.push_back(image.value(r, c) > 0 ? '+' : '-');
    out.push_back('\n');
  }
  return out;
}

WrittenImage written_image_from_text(const std::string& text) {
  auto lines = split_lines(text);
  WrittenImage img(static_cast<int>(lines.size()),
                   static_cast<int>(lines[0].size()));
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c) {
      const char ch = lines[r][c];
      if (ch != '+' && ch != '-')
        throw std::invalid_argument("bad written-image character");
      img.set(r, c, ch == '+' ? 1 : -1);
    }
  return img;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace tdmr
