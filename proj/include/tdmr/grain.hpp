#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tdmr {

// Subgrain labels. A is the 1x1 grain; B/C are top/bottom of the vertical
// 2x1 grain; D/E are left/right of the horizontal 1x2 grain; F,G,H,I tile
// the 2x2 grain (F top-left, G below F, H right of F, I below H).
enum class Subgrain : uint8_t { A = 0, B, C, D, E, F, G, H, I };

constexpr int kNumSubgrains = 9;

char subgrain_char(Subgrain s);
Subgrain subgrain_from_char(char c);

// Grain type indices: 0 = 1x1, 1 = vertical 2x1, 2 = horizontal 1x2, 3 = 2x2.
constexpr int kNumGrainTypes = 4;

// Cell footprint of each grain type.
int grain_cells(int type);

// Probabilities of the four grain types under the two-coded-bits-per-grain
// density constraint p1 + 2*p2 + 2*p3 + 4*p4 = 2 with p2 = p3.
struct GrainDistribution {
  double p1 = 0;
  double p2 = 0;
  double p3 = 0;
  double p4 = 0;

  double prob(int type) const {
    switch (type) {
      case 0: return p1;
      case 1: return p2;
      case 2: return p3;
      default: return p4;
    }
  }
  bool valid(double tol = 1e-12) const;
};

// Unique distribution with the given p2 = p3. Throws std::invalid_argument
// outside [0, 0.5].
GrainDistribution solve_grain_distribution(double p2);

// Rectangular lattice of subgrain labels with an implicit one-cell frame of
// A subgrains around it. Immutable for callers once generated.
class GrainImage {
 public:
  GrainImage(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  // Returns A outside the interior (the boundary frame).
  Subgrain at(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) return Subgrain::A;
    return cells_[static_cast<size_t>(r) * cols_ + c];
  }
  void set(int r, int c, Subgrain s) {
    cells_[static_cast<size_t>(r) * cols_ + c] = s;
  }

 private:
  int rows_;
  int cols_;
  std::vector<Subgrain> cells_;
};

// Written polarities +1/-1, with the implicit boundary frame written to -1.
class WrittenImage {
 public:
  WrittenImage(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  int value(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) return -1;
    return values_[static_cast<size_t>(r) * cols_ + c];
  }
  void set(int r, int c, int v) {
    values_[static_cast<size_t>(r) * cols_ + c] = static_cast<int8_t>(v);
  }

 private:
  int rows_;
  int cols_;
  std::vector<int8_t> values_;
};

// Random tiling by raster-scan greedy fill with remaining-count weighting.
// Works at any (even) size and any density; used for 16x16 sub-images and
// small test instances. Retries internally; throws std::runtime_error when
// the retry budget is exhausted.
GrainImage random_tiling(const GrainDistribution& dist, int rows, int cols,
                         std::mt19937_64& rng);

// Random grain image: largest-grains-first placement, holes filled with 1x1
// grains. Above p2 = 0.36 (and when dimensions allow) the image is assembled
// from a pool of independently generated 16x16 sub-images. Deterministic
// given the seed.
GrainImage generate_grain_image(const GrainDistribution& dist, int rows,
                                int cols, uint64_t seed);

// Writes raster-ordered coded bits (+1/-1, length rows*cols) onto the image.
// Each grain takes the bit of its last raster-order cell.
WrittenImage write_bits(const GrainImage& image,
                        const std::vector<int8_t>& bits);

// Index (raster) of the cell that is written last within the grain covering
// (r, c). Used by write_bits and by the overwrite-idempotence check.
std::pair<int, int> last_written_cell(const GrainImage& image, int r, int c);

// Every cell labelled consistently and every multi-cell grain complete and
// inside the image. On failure, an explanation is written to *why.
bool validate_grain_image(const GrainImage& image, std::string* why = nullptr);

// Grain counts per type (A anchors, B anchors, D anchors, F anchors).
std::array<int64_t, 4> count_grains(const GrainImage& image);

// Plain-text serialization: one row per line, characters A-I ('+'/'-' for
// written images).
std::string to_text(const GrainImage& image);
GrainImage grain_image_from_text(const std::string& text);
std::string to_text(const WrittenImage& image);
WrittenImage written_image_from_text(const std::string& text);

// splitmix64 step; used to derive independent seed streams.
uint64_t splitmix64(uint64_t x);

}  // namespace tdmr
