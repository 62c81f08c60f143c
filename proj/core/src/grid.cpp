#include "spdelab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdelab/errors.hpp"

namespace spdelab {

namespace {

void require_same(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ContractViolation(std::string(what) + ": grid mismatch");
}

}  // namespace

GridSpec::GridSpec(std::size_t nx, std::size_t nt, double horizon)
    : nx_(nx), nt_(nt), horizon_(horizon) {
  if (nx == 0) throw ContractViolation("GridSpec: nx must be positive");
  if (nt == 0) throw ContractViolation("GridSpec: nt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ContractViolation("GridSpec: horizon must be positive and finite");
}

SpaceField::SpaceField(std::size_t nx) : values_(nx + 2, 0.0) {
  if (nx == 0) throw ContractViolation("SpaceField: nx must be positive");
}

SpaceField::SpaceField(const GridSpec& grid, const std::function<double(double)>& profile)
    : SpaceField(grid.nx()) {
  for (std::size_t i = 1; i <= grid.nx(); ++i) values_[i] = profile(grid.x(i));
}

PathField::PathField(const GridSpec& grid)
    : grid_(grid), data_((grid.nt() + 1) * (grid.nx() + 2), 0.0) {}

SpaceField PathField::frame_field(std::size_t n) const {
  SpaceField f(grid_.nx());
  auto src = interior(n);
  std::copy(src.begin(), src.end(), f.interior().begin());
  return f;
}

void PathField::set_frame(std::size_t n, const SpaceField& f) {
  if (f.nx() != grid_.nx()) throw ContractViolation("PathField::set_frame: dimension mismatch");
  auto src = f.interior();
  std::copy(src.begin(), src.end(), interior(n).begin());
}

PathField& PathField::operator+=(const PathField& other) {
  require_same(grid_, other.grid_, "PathField +=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

PathField& PathField::operator-=(const PathField& other) {
  require_same(grid_, other.grid_, "PathField -=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

PathField& PathField::operator*=(double c) {
  // Boundary entries stay +0 regardless of the sign of c.
  for (std::size_t n = 0; n < frames(); ++n)
    for (double& v : interior(n)) v *= c;
  return *this;
}

PathField operator+(PathField a, const PathField& b) { return a += b; }
PathField operator-(PathField a, const PathField& b) { return a -= b; }
PathField operator*(double c, PathField a) { return a *= c; }

Control::Control(const GridSpec& grid) : grid_(grid), data_(grid.nt() * grid.nx(), 0.0) {}

Control& Control::operator+=(const Control& other) {
  require_same(grid_, other.grid_, "Control +=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Control& Control::operator*=(double c) {
  for (double& v : data_) v *= c;
  return *this;
}

Control operator+(Control a, const Control& b) { return a += b; }
Control operator*(double c, Control a) { return a *= c; }

double l2_norm(std::span<const double> frame, const GridSpec& grid) {
  std::span<const double> in = frame;
  if (frame.size() == grid.nx() + 2) {
    in = frame.subspan(1, grid.nx());
  } else if (frame.size() != grid.nx()) {
    throw ContractViolation("l2_norm: dimension mismatch");
  }
  double s = 0.0;
  for (double v : in) s += v * v;
  return std::sqrt(grid.dx() * s);
}

double l2_norm(const SpaceField& u, const GridSpec& grid) {
  if (u.nx() != grid.nx()) throw ContractViolation("l2_norm: dimension mismatch");
  return l2_norm(u.interior(), grid);
}

double l1_norm(std::span<const double> frame, const GridSpec& grid) {
  std::span<const double> in = frame;
  if (frame.size() == grid.nx() + 2) {
    in = frame.subspan(1, grid.nx());
  } else if (frame.size() != grid.nx()) {
    throw ContractViolation("l1_norm: dimension mismatch");
  }
  double s = 0.0;
  for (double v : in) s += std::abs(v);
  return grid.dx() * s;
}

double sup_l2_norm(const PathField& p, const GridSpec& grid) {
  require_same(p.grid(), grid, "sup_l2_norm");
  if (p.frames() == 0) throw ContractViolation("sup_l2_norm: empty path");
  double best = 0.0;
  for (std::size_t n = 0; n < p.frames(); ++n) best = std::max(best, l2_norm(p.interior(n), grid));
  return best;
}

double sup_l2_distance(const PathField& a, const PathField& b) {
  require_same(a.grid(), b.grid(), "sup_l2_distance");
  const GridSpec& g = a.grid();
  double best = 0.0;
  for (std::size_t n = 0; n < a.frames(); ++n) {
    auto u = a.interior(n);
    auto v = b.interior(n);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    best = std::max(best, std::sqrt(g.dx() * s));
  }
  return best;
}

double h_norm_sq(const Control& h, const GridSpec& grid) {
  require_same(h.grid(), grid, "h_norm_sq");
  double s = 0.0;
  for (double v : h.raw()) s += v * v;
  return grid.dt() * grid.dx() * s;
}

double path_inner(const PathField& a, const PathField& b) {
  require_same(a.grid(), b.grid(), "path_inner");
  double s = 0.0;
  auto x = a.raw();
  auto y = b.raw();
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return a.grid().dt() * a.grid().dx() * s;
}

double control_inner(const Control& a, const Control& b) {
  require_same(a.grid(), b.grid(), "control_inner");
  double s = 0.0;
  auto x = a.raw();
  auto y = b.raw();
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return a.grid().dt() * a.grid().dx() * s;
}

bool in_ball(const Control& h, double radius) {
  return h_norm_sq(h, h.grid()) <= radius * radius;
}

}  // namespace spdelab
