#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace porelab {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed (non-finite values, inconsistent sizes in files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// The solver produced a non-finite or non-positive density.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  std::int64_t iteration() const noexcept { return iteration_; }

 private:
  std::int64_t iteration_;
};

/// Tortuosity requested for a field with zero streamwise momentum.
class UndefinedTortuosityError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Square periodic arrays
// ---------------------------------------------------------------------------

/// L x L array stored row-major; row index is y, column index is x.
/// Both axes are periodic wherever neighbours are taken.
template <typename T>
class Field2D {
 public:
  Field2D() = default;
  explicit Field2D(std::size_t size, T fill = T{}) : size_(size), data_(size * size, fill) {}

  std::size_t size() const noexcept { return size_; }
  std::size_t cells() const noexcept { return data_.size(); }

  T& operator()(std::size_t x, std::size_t y) { return data_[y * size_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data_[y * size_ + x]; }

  T& operator[](std::size_t index) { return data_[index]; }
  const T& operator[](std::size_t index) const { return data_[index]; }

  /// Periodic access with signed coordinates.
  const T& wrapped(std::ptrdiff_t x, std::ptrdiff_t y) const {
    return (*this)(wrap(x), wrap(y));
  }

  std::size_t wrap(std::ptrdiff_t c) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(size_);
    return static_cast<std::size_t>(((c % n) + n) % n);
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool operator==(const Field2D&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<T> data_;
};

/// Periodic translation: the value at (x, y) moves to (x + tx, y + ty).
template <typename T>
Field2D<T> translate(const Field2D<T>& in, std::ptrdiff_t tx, std::ptrdiff_t ty) {
  Field2D<T> out(in.size());
  const std::size_t n = in.size();
  for (std::size_t y = 0; y < n; ++y) {
    const std::size_t dy = in.wrap(static_cast<std::ptrdiff_t>(y) + ty);
    for (std::size_t x = 0; x < n; ++x) {
      out(in.wrap(static_cast<std::ptrdiff_t>(x) + tx), dy) = in(x, y);
    }
  }
  return out;
}

/// Rows reversed (mirror across the horizontal midline).
template <typename T>
Field2D<T> flip_rows(const Field2D<T>& in) {
  Field2D<T> out(in.size());
  const std::size_t n = in.size();
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) out(x, n - 1 - y) = in(x, y);
  return out;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Binary sample geometry on a torus: true marks a solid pixel.
class StructureGrid {
 public:
  StructureGrid() = default;
  explicit StructureGrid(std::size_t size) : solid_(size, 0) {}
  explicit StructureGrid(Field2D<std::uint8_t> solid) : solid_(std::move(solid)) {
    for (auto& v : solid_.values()) v = v ? 1 : 0;
  }

  std::size_t size() const noexcept { return solid_.size(); }
  std::size_t cells() const noexcept { return solid_.cells(); }

  bool solid(std::size_t x, std::size_t y) const { return solid_(x, y) != 0; }
  bool solid(std::size_t index) const { return solid_[index] != 0; }
  bool pore(std::size_t x, std::size_t y) const { return solid_(x, y) == 0; }
  bool pore(std::size_t index) const { return solid_[index] == 0; }

  void set_solid(std::size_t x, std::size_t y, bool value = true) { solid_(x, y) = value ? 1 : 0; }
  void set_solid(std::size_t index, bool value = true) { solid_[index] = value ? 1 : 0; }

  std::size_t pore_count() const {
    return static_cast<std::size_t>(std::count(solid_.values().begin(), solid_.values().end(), 0));
  }
  std::size_t solid_count() const { return cells() - pore_count(); }

  /// Pore pixels over all pixels.
  double porosity() const {
    return cells() == 0 ? 0.0 : static_cast<double>(pore_count()) / static_cast<double>(cells());
  }

  const Field2D<std::uint8_t>& occupancy() const noexcept { return solid_; }

  bool operator==(const StructureGrid&) const = default;

 private:
  Field2D<std::uint8_t> solid_;
};

/// Two-component velocity in lattice units.
struct VelocityField {
  Field2D<double> ux;
  Field2D<double> uy;

  VelocityField() = default;
  explicit VelocityField(std::size_t size) : ux(size, 0.0), uy(size, 0.0) {}

  std::size_t size() const noexcept { return ux.size(); }
  std::size_t cells() const noexcept { return ux.cells(); }

  double speed(std::size_t index) const { return std::hypot(ux[index], uy[index]); }

  bool all_finite() const {
    for (std::size_t i = 0; i < cells(); ++i)
      if (!std::isfinite(ux[i]) || !std::isfinite(uy[i])) return false;
    return true;
  }

  bool operator==(const VelocityField&) const = default;
};

inline StructureGrid translate(const StructureGrid& g, std::ptrdiff_t tx, std::ptrdiff_t ty) {
  return StructureGrid(translate(g.occupancy(), tx, ty));
}

inline VelocityField translate(const VelocityField& f, std::ptrdiff_t tx, std::ptrdiff_t ty) {
  VelocityField out;
  out.ux = translate(f.ux, tx, ty);
  out.uy = translate(f.uy, tx, ty);
  return out;
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ParameterError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

}  // namespace porelab
