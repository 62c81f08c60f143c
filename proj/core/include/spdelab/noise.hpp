#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spdelab/grid.hpp"

namespace spdelab {

/// Identifies one independent noise stream. (master_seed, path_index) maps to
/// the generator state through std::seed_seq on the four 32-bit halves, so
/// streams are addressable in any order.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;

  bool operator==(const SeedSpec&) const = default;
};

/// Standard normal draws xi(n, i), n < nt, interior i. The Brownian-sheet
/// rectangle increment over cell (n, i) is sqrt(dt dx) xi(n, i).
class NoiseRealization {
 public:
  NoiseRealization(GridSpec grid, SeedSpec seed, std::vector<double> xi, unsigned generation = 0);

  const GridSpec& grid() const noexcept { return grid_; }
  const SeedSpec& seed() const noexcept { return seed_; }
  unsigned generation() const noexcept { return generation_; }

  std::span<const double> level(std::size_t n) const noexcept {
    return {xi_.data() + n * grid_.nx(), grid_.nx()};
  }
  std::span<const double> raw() const noexcept { return xi_; }

  double increment(std::size_t n, std::size_t i) const;

  bool operator==(const NoiseRealization& o) const { return grid_ == o.grid_ && xi_ == o.xi_; }

 private:
  GridSpec grid_;
  SeedSpec seed_;
  unsigned generation_;
  std::vector<double> xi_;
};

/// Draws are rounded to multiples of 2^-34 so that block sums are exact.
NoiseRealization sample_sheet(const SeedSpec& seed, const GridSpec& grid);

/// Realization with every entry zero on `grid`.
NoiseRealization zero_sheet(const GridSpec& grid);

/// Grid obtained by refining `coarse` by `factor` in time and space:
/// nt' = factor nt, nx' + 1 = factor (nx + 1).
GridSpec refined_grid(const GridSpec& coarse, unsigned factor);

/// Conditional (Brownian-bridge) refinement: each coarse cell (n, i) is split
/// into factor^2 fine cells (fine steps factor n .. factor n + factor - 1,
/// fine nodes factor i - factor/2 + 1 .. factor i + factor/2). Fine draws are
/// i.i.d. N(0,1) marginally and aggregate() recovers the coarse matrix
/// bitwise. Fine nodes outside every block are drawn independently.
/// Throws ConfigError unless factor is a power of two >= 2, ContractViolation
/// if the input was not produced by sample_sheet or refine.
NoiseRealization refine(const NoiseRealization& noise, unsigned factor);

/// Inverse of refine: xi_coarse(n, i) = (sum over the block) / factor, the
/// block summed time-major in a fixed order.
NoiseRealization aggregate(const NoiseRealization& fine, unsigned factor);

}  // namespace spdelab
