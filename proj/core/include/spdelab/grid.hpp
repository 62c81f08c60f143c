#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spdelab {

/// Uniform lattice on [0,T] x [0,1]. `nx` counts interior nodes; nodes 0 and
/// nx+1 are the Dirichlet boundary.
class GridSpec {
 public:
  GridSpec(std::size_t nx, std::size_t nt, double horizon);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nt() const noexcept { return nt_; }
  double horizon() const noexcept { return horizon_; }
  double dx() const noexcept { return 1.0 / static_cast<double>(nx_ + 1); }
  double dt() const noexcept { return horizon_ / static_cast<double>(nt_); }
  double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx(); }
  double t(std::size_t n) const noexcept { return static_cast<double>(n) * dt(); }

  bool operator==(const GridSpec&) const = default;

 private:
  std::size_t nx_;
  std::size_t nt_;
  double horizon_;
};

/// Values at the nx+2 nodes of one time level. Boundary entries are zero and
/// cannot be written.
class SpaceField {
 public:
  explicit SpaceField(std::size_t nx);
  SpaceField(const GridSpec& grid, const std::function<double(double)>& profile);

  std::size_t nx() const noexcept { return values_.size() - 2; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> interior() noexcept { return {values_.data() + 1, nx()}; }
  std::span<const double> interior() const noexcept { return {values_.data() + 1, nx()}; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool operator==(const SpaceField&) const = default;

 private:
  std::vector<double> values_;
};

/// Trajectory of nt+1 frames, stored contiguously frame-major.
class PathField {
 public:
  explicit PathField(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t frames() const noexcept { return grid_.nt() + 1; }
  std::size_t stride() const noexcept { return grid_.nx() + 2; }

  std::span<const double> frame(std::size_t n) const noexcept {
    return {data_.data() + n * stride(), stride()};
  }
  std::span<double> interior(std::size_t n) noexcept {
    return {data_.data() + n * stride() + 1, grid_.nx()};
  }
  std::span<const double> interior(std::size_t n) const noexcept {
    return {data_.data() + n * stride() + 1, grid_.nx()};
  }
  SpaceField frame_field(std::size_t n) const;
  void set_frame(std::size_t n, const SpaceField& f);

  std::span<const double> raw() const noexcept { return data_; }

  PathField& operator+=(const PathField& other);
  PathField& operator-=(const PathField& other);
  PathField& operator*=(double c);

  bool operator==(const PathField&) const = default;

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

PathField operator+(PathField a, const PathField& b);
PathField operator-(PathField a, const PathField& b);
PathField operator*(double c, PathField a);

/// Discretized control density hdot(t_n, x_i), n < nt, interior i.
class Control {
 public:
  explicit Control(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<double> level(std::size_t n) noexcept {
    return {data_.data() + n * grid_.nx(), grid_.nx()};
  }
  std::span<const double> level(std::size_t n) const noexcept {
    return {data_.data() + n * grid_.nx(), grid_.nx()};
  }
  std::span<double> raw() noexcept { return data_; }
  std::span<const double> raw() const noexcept { return data_; }

  Control& operator+=(const Control& other);
  Control& operator*=(double c);

  bool operator==(const Control&) const = default;

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

Control operator+(Control a, const Control& b);
Control operator*(double c, Control a);

// Norms. Space: interior sum times dx. Time: left-endpoint rectangles.
double l2_norm(const SpaceField& u, const GridSpec& grid);
double l2_norm(std::span<const double> frame, const GridSpec& grid);
double l1_norm(std::span<const double> frame, const GridSpec& grid);
double sup_l2_norm(const PathField& p, const GridSpec& grid);
double sup_l2_distance(const PathField& a, const PathField& b);
double h_norm_sq(const Control& h, const GridSpec& grid);

/// dt*dx weighted dot product over every frame, frame 0 included.
double path_inner(const PathField& a, const PathField& b);
double control_inner(const Control& a, const Control& b);

/// S_N membership: ||h||_H <= N.
bool in_ball(const Control& h, double radius);

}  // namespace spdelab
