#include "otkit/colortransfer.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace otkit {

namespace {

// Deterministic across platforms, unlike <random> distributions.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

double dist2(const Rgb& x, const Rgb& y) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    double d = x[static_cast<size_t>(c)] - y[static_cast<size_t>(c)];
    s += d * d;
  }
  return s;
}

std::vector<Rgb> image_points(const Image& image) {
  std::vector<Rgb> pts(image.pixel_count());
  for (size_t p = 0; p < pts.size(); ++p) {
    const std::uint8_t* px = image.pixels.data() + p * image.channels;
    pts[p] = {px[0] / 255.0, px[1] / 255.0, px[2] / 255.0};
  }
  return pts;
}

size_t count_distinct_colors(const Image& image) {
  std::unordered_set<std::uint32_t> seen;
  for (size_t p = 0; p < image.pixel_count(); ++p) {
    const std::uint8_t* px = image.pixels.data() + p * image.channels;
    seen.insert((std::uint32_t(px[0]) << 16) | (std::uint32_t(px[1]) << 8) | px[2]);
  }
  return seen.size();
}

std::vector<Rgb> kmeanspp_init(const std::vector<Rgb>& pts, int k, SplitMix64& rng) {
  std::vector<Rgb> centroids;
  centroids.reserve(static_cast<size_t>(k));
  centroids.push_back(pts[rng.next() % pts.size()]);
  std::vector<double> d2(pts.size());
  for (size_t p = 0; p < pts.size(); ++p) d2[p] = dist2(pts[p], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    double r = rng.uniform01() * total;
    size_t chosen = pts.size() - 1;
    double acc = 0.0;
    for (size_t p = 0; p < pts.size(); ++p) {
      acc += d2[p];
      if (acc >= r) {
        chosen = p;
        break;
      }
    }
    centroids.push_back(pts[chosen]);
    for (size_t p = 0; p < pts.size(); ++p) d2[p] = std::min(d2[p], dist2(pts[p], centroids.back()));
  }
  return centroids;
}

}  // namespace

Palette quantize(const Image& image, int k, std::uint64_t seed) {
  if (image.pixel_count() == 0) throw OtError(Errc::invalid_argument, "empty image");
  if (k <= 0) throw OtError(Errc::invalid_argument, "k must be positive");
  if (count_distinct_colors(image) < static_cast<size_t>(k))
    throw OtError(Errc::too_few_colors, "image has fewer distinct colors than k");

  std::vector<Rgb> pts = image_points(image);
  SplitMix64 rng(seed);
  std::vector<Rgb> centroids = kmeanspp_init(pts, k, rng);
  std::vector<int> assign(pts.size(), 0);
  std::vector<long> counts(static_cast<size_t>(k), 0);

  constexpr int kMaxLloyd = 300;
  constexpr double kMoveTol = 1e-6;
  for (int it = 0; it < kMaxLloyd; ++it) {
    // Assignment step; ties go to the smallest centroid index.
    for (size_t p = 0; p < pts.size(); ++p) {
      int best = 0;
      double bd = dist2(pts[p], centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = dist2(pts[p], centroids[static_cast<size_t>(c)]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      assign[p] = best;
    }

    std::vector<Rgb> next(static_cast<size_t>(k), Rgb{0.0, 0.0, 0.0});
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t p = 0; p < pts.size(); ++p) {
      for (int c = 0; c < 3; ++c) next[static_cast<size_t>(assign[p])][static_cast<size_t>(c)] += pts[p][static_cast<size_t>(c)];
      ++counts[static_cast<size_t>(assign[p])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) {
        for (int d = 0; d < 3; ++d)
          next[static_cast<size_t>(c)][static_cast<size_t>(d)] /= static_cast<double>(counts[static_cast<size_t>(c)]);
      } else {
        // Re-seed an empty cluster from the farthest point.
        size_t far = 0;
        double fd = -1.0;
        for (size_t p = 0; p < pts.size(); ++p) {
          double d = dist2(pts[p], centroids[static_cast<size_t>(assign[p])]);
          if (d > fd) {
            fd = d;
            far = p;
          }
        }
        next[static_cast<size_t>(c)] = pts[far];
      }
    }

    double moved = 0.0;
    for (int c = 0; c < k; ++c)
      moved = std::max(moved, std::sqrt(dist2(centroids[static_cast<size_t>(c)], next[static_cast<size_t>(c)])));
    centroids = std::move(next);
    if (moved <= kMoveTol) break;
  }

  // Final assignment against the converged centroids.
  std::fill(counts.begin(), counts.end(), 0);
  for (size_t p = 0; p < pts.size(); ++p) {
    int best = 0;
    double bd = dist2(pts[p], centroids[0]);
    for (int c = 1; c < k; ++c) {
      double d = dist2(pts[p], centroids[static_cast<size_t>(c)]);
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    assign[p] = best;
    ++counts[static_cast<size_t>(best)];
  }
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<size_t>(c)] == 0)
      throw OtError(Errc::too_few_colors, "k-means produced an empty cluster");

  std::vector<double> mass(counts.begin(), counts.end());
  return Palette{std::move(centroids), std::move(assign), Histogram::normalized(std::move(mass))};
}

CostMatrix build_cost(const Palette& p, const Palette& q) {
  Matrix C(p.size(), q.size());
  for (int i = 0; i < p.size(); ++i)
    for (int j = 0; j < q.size(); ++j)
      C(i, j) = dist2(p.centroids[static_cast<size_t>(i)], q.centroids[static_cast<size_t>(j)]);
  return CostMatrix::make(std::move(C));
}

BarycentricResult barycentric_project(const TransportPlan& T, const std::vector<Rgb>& p_centroids,
                                      const std::vector<Rgb>& q_centroids) {
  const int m = T.entries.rows(), n = T.entries.cols();
  if (static_cast<int>(p_centroids.size()) != m || static_cast<int>(q_centroids.size()) != n)
    throw OtError(Errc::dimension_mismatch, "centroid counts do not match plan shape");

  BarycentricResult out;
  out.centroids.resize(static_cast<size_t>(m));
  constexpr double kEmptyRow = 1e-15;
  for (int i = 0; i < m; ++i) {
    double row_sum = 0.0;
    Rgb acc{0.0, 0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      double t = T.entries(i, j);
      row_sum += t;
      for (int c = 0; c < 3; ++c) acc[static_cast<size_t>(c)] += t * q_centroids[static_cast<size_t>(j)][static_cast<size_t>(c)];
    }
    if (row_sum < kEmptyRow) {
      out.centroids[static_cast<size_t>(i)] = p_centroids[static_cast<size_t>(i)];
      out.empty_rows.push_back(i);
      continue;
    }
    for (int c = 0; c < 3; ++c)
      out.centroids[static_cast<size_t>(i)][static_cast<size_t>(c)] =
          std::clamp(acc[static_cast<size_t>(c)] / row_sum, 0.0, 1.0);
  }
  return out;
}

Image recolor(const Image& image, const Palette& palette, const std::vector<Rgb>& new_centroids) {
  if (new_centroids.size() != palette.centroids.size())
    throw OtError(Errc::dimension_mismatch, "centroid count does not match palette");
  if (palette.assignments.size() != image.pixel_count())
    throw OtError(Errc::dimension_mismatch, "palette does not belong to this image");

  Image out = image;
  for (size_t p = 0; p < image.pixel_count(); ++p) {
    const Rgb& c = new_centroids[static_cast<size_t>(palette.assignments[p])];
    std::uint8_t* px = out.pixels.data() + p * out.channels;
    for (int d = 0; d < 3; ++d)
      px[d] = static_cast<std::uint8_t>(
          std::clamp(std::lround(c[static_cast<size_t>(d)] * 255.0), 0L, 255L));
  }
  return out;
}

TransferResult color_transfer(const Image& source, const Image& target,
                              const TransferOptions& opts) {
  Palette p = quantize(source, opts.k, opts.seed);
  Palette q = quantize(target, opts.k, opts.seed + 1);
  CostMatrix C = build_cost(p, q);

  TransportPlan plan;
  SolveReport report;
  switch (opts.formulation) {
    case Formulation::dual: {
      DualSolution s = solve_dual(p.histogram, q.histogram, C, opts.reg, opts.solve);
      plan = std::move(s.plan);
      report = std::move(s.report);
      break;
    }
    case Formulation::semidual: {
      DualSolution s = solve_semidual(p.histogram, q.histogram, C, opts.reg, opts.solve);
      plan = std::move(s.plan);
      report = std::move(s.report);
      break;
    }
    case Formulation::relaxed: {
      PrimalSolution s = solve_relaxed_primal(p.histogram, q.histogram, C, opts.rel, opts.solve);
      plan = std::move(s.plan);
      report = std::move(s.report);
      break;
    }
    case Formulation::semirelaxed: {
      PrimalSolution s =
          solve_semi_relaxed_primal(p.histogram, q.histogram, C, opts.rel, opts.solve);
      plan = std::move(s.plan);
      report = std::move(s.report);
      break;
    }
  }

  BarycentricResult proj = barycentric_project(plan, p.centroids, q.centroids);
  TransferResult result{recolor(source, p, proj.centroids),
                        std::move(p),
                        std::move(q),
                        std::move(plan),
                        std::move(report),
                        std::move(proj.empty_rows)};
  return result;
}

}  // namespace otkit
