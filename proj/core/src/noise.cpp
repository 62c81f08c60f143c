#include "spdelab/noise.hpp"

#include <cmath>
#include <random>

#include "spdelab/errors.hpp"

namespace spdelab {

namespace {

constexpr std::uint32_t kSheetTag = 0x53484545u;   // "SHEE"
constexpr std::uint32_t kRefineTag = 0x52454649u;  // "REFI"

std::mt19937_64 make_engine(const SeedSpec& seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.master_seed), static_cast<std::uint32_t>(seed.master_seed >> 32),
                    static_cast<std::uint32_t>(seed.path_index), static_cast<std::uint32_t>(seed.path_index >> 32),
                    tag};
  return std::mt19937_64(seq);
}

void require_factor(unsigned factor) {
  if (factor < 2 || (factor & (factor - 1)) != 0)
    throw ConfigError("factor", "refinement factor must be a power of two >= 2, got " + std::to_string(factor));
}

// Every draw is rounded to a multiple of 2^-34 (a relative change below 1e-10
// for |xi| >= 1e-1). Sums of a few thousand such values below 2^18 are exact
// in double precision, so block sums do not depend on the summation order and
// refine/aggregate can be exact inverses.
constexpr double kQuantum = 0x1p-34;

double quantize(double v) { return std::nearbyint(v / kQuantum) * kQuantum; }

// Sum of one fine block in the canonical order used by aggregate().
double block_sum(const std::vector<double>& xi, std::size_t nx_fine, std::size_t n0, std::size_t j0, unsigned f) {
  double s = 0.0;
  for (unsigned a = 0; a < f; ++a)
    for (unsigned b = 0; b < f; ++b) s += xi[(n0 + a) * nx_fine + (j0 + b)];
  return s;
}

}  // namespace

NoiseRealization::NoiseRealization(GridSpec grid, SeedSpec seed, std::vector<double> xi, unsigned generation)
    : grid_(grid), seed_(seed), generation_(generation), xi_(std::move(xi)) {
  if (xi_.size() != grid_.nt() * grid_.nx()) throw ContractViolation("NoiseRealization: size mismatch");
}

double NoiseRealization::increment(std::size_t n, std::size_t i) const {
  return std::sqrt(grid_.dt() * grid_.dx()) * xi_[n * grid_.nx() + i];
}

NoiseRealization sample_sheet(const SeedSpec& seed, const GridSpec& grid) {
  auto engine = make_engine(seed, kSheetTag);
  std::normal_distribution<double> normal;
  std::vector<double> xi(grid.nt() * grid.nx());
  for (double& v : xi) v = quantize(normal(engine));
  return NoiseRealization(grid, seed, std::move(xi));
}

NoiseRealization zero_sheet(const GridSpec& grid) {
  return NoiseRealization(grid, SeedSpec{}, std::vector<double>(grid.nt() * grid.nx(), 0.0));
}

GridSpec refined_grid(const GridSpec& coarse, unsigned factor) {
  require_factor(factor);
  return GridSpec(factor * (coarse.nx() + 1) - 1, factor * coarse.nt(), coarse.horizon());
}

NoiseRealization refine(const NoiseRealization& noise, unsigned factor) {
  require_factor(factor);
  const GridSpec& cg = noise.grid();
  const GridSpec fg = refined_grid(cg, factor);
  const std::size_t fnx = fg.nx();
  const std::size_t block = static_cast<std::size_t>(factor) * factor;
  const double f = static_cast<double>(factor);

  auto engine = make_engine(noise.seed(), kRefineTag + noise.generation());
  std::normal_distribution<double> normal;
  std::vector<double> xi(fg.nt() * fnx);
  for (double& v : xi) v = normal(engine);

  for (std::size_t n = 0; n < cg.nt(); ++n) {
    for (std::size_t i = 0; i < cg.nx(); ++i) {
      const std::size_t n0 = n * factor;
      const std::size_t j0 = (i + 1) * factor - factor / 2;  // zero-based fine index of the block start
      const double target = noise.level(n)[i];
      if (quantize(target) != target)
        throw ContractViolation("refine: coarse values must come from sample_sheet or refine");
      // z - mean(z) + target / f has i.i.d. N(0,1) entries and block sum f * target.
      double mean = 0.0;
      for (unsigned a = 0; a < factor; ++a)
        for (unsigned b = 0; b < factor; ++b) mean += xi[(n0 + a) * fnx + (j0 + b)];
      mean /= static_cast<double>(block);
      double others = 0.0;
      for (unsigned a = 0; a < factor; ++a)
        for (unsigned b = 0; b < factor; ++b) {
          if (a == factor - 1 && b == factor - 1) continue;
          double& v = xi[(n0 + a) * fnx + (j0 + b)];
          v = quantize(v - mean + target / f);
          others += v;
        }
      // On the lattice this difference, and every later block sum, is exact.
      xi[(n0 + factor - 1) * fnx + (j0 + factor - 1)] = target * f - others;
    }
  }
  // Fine nodes outside every block.
  for (double& v : xi) v = quantize(v);
  return NoiseRealization(fg, noise.seed(), std::move(xi), noise.generation() + 1);
}

NoiseRealization aggregate(const NoiseRealization& fine, unsigned factor) {
  require_factor(factor);
  const GridSpec& fg = fine.grid();
  if ((fg.nx() + 1) % factor != 0 || fg.nt() % factor != 0)
    throw ContractViolation("aggregate: grid is not a refinement by this factor");
  const GridSpec cg((fg.nx() + 1) / factor - 1, fg.nt() / factor, fg.horizon());
  std::vector<double> fine_xi(fine.raw().begin(), fine.raw().end());
  std::vector<double> xi(cg.nt() * cg.nx());
  for (std::size_t n = 0; n < cg.nt(); ++n)
    for (std::size_t i = 0; i < cg.nx(); ++i)
      xi[n * cg.nx() + i] =
          block_sum(fine_xi, fg.nx(), n * factor, (i + 1) * factor - factor / 2, factor) / static_cast<double>(factor);
  return NoiseRealization(cg, fine.seed(), std::move(xi), fine.generation() == 0 ? 0 : fine.generation() - 1);
}

}  // namespace spdelab
