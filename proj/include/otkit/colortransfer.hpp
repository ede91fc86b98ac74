#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "otkit/core.hpp"
#include "otkit/image.hpp"
#include "otkit/solvers.hpp"

namespace otkit {

using Rgb = std::array<double, 3>;  // coordinates in [0, 1]

// Quantized color palette: centroids, per-pixel assignments and the induced
// color histogram (pixel counts / total, strictly positive by construction).
struct Palette {
  std::vector<Rgb> centroids;
  std::vector<int> assignments;
  Histogram histogram;

  int size() const { return static_cast<int>(centroids.size()); }
};

// k-means color quantization: k-means++ seeding from `seed`, Lloyd iterations
// until the largest centroid move is <= 1e-6 or 300 iterations, empty
// clusters re-seeded from the farthest pixel. Deterministic for a fixed seed.
Palette quantize(const Image& image, int k, std::uint64_t seed);

// C_ij = ||x_i - y_j||^2 in RGB.
CostMatrix build_cost(const Palette& p, const Palette& q);

struct BarycentricResult {
  std::vector<Rgb> centroids;
  std::vector<int> empty_rows;  // rows with vanishing mass keep their original color
};

// x_i -> sum_j T_ij y_j / sum_j T_ij, clamped to [0,1]. Rows whose sum is
// below 1e-15 (possible for relaxed plans) fall back to the source centroid
// and are flagged.
BarycentricResult barycentric_project(const TransportPlan& T, const std::vector<Rgb>& p_centroids,
                                      const std::vector<Rgb>& q_centroids);

// Replace every pixel with the new centroid of its assigned cluster; alpha is
// copied through.
Image recolor(const Image& image, const Palette& palette, const std::vector<Rgb>& new_centroids);

struct TransferOptions {
  int k = 32;
  std::uint64_t seed = 0;
  Formulation formulation = Formulation::semidual;
  RegParams reg = RegParams::squared_l2(1.0);
  RelaxationParams rel{1.0};
  SolveOptions solve;
};

struct TransferResult {
  Image output;
  Palette source_palette;
  Palette target_palette;
  TransportPlan plan;
  SolveReport report;
  std::vector<int> empty_rows;
};

// Full pipeline: quantize both images, solve the chosen formulation on the
// palette histograms, barycentrically project the source centroids, recolor.
TransferResult color_transfer(const Image& source, const Image& target,
                              const TransferOptions& opts);

}  // namespace otkit
