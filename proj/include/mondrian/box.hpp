#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mondrian {

/// Axis-aligned box in R^D. Sides may have zero length (degenerate slices
/// are legal); lower[d] <= upper[d] must hold for every d.
struct BoundedBox {
  std::vector<double> lower;
  std::vector<double> upper;

  BoundedBox() = default;
  BoundedBox(std::vector<double> lo, std::vector<double> up)
      : lower(std::move(lo)), upper(std::move(up)) {
    validate();
  }

  std::size_t dims() const { return lower.size(); }

  double side(std::size_t d) const { return upper[d] - lower[d]; }

  bool contains(std::span<const double> point) const {
    if (point.size() != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d)
      if (point[d] < lower[d] || point[d] > upper[d]) return false;
    return true;
  }

  bool contains(const BoundedBox& other) const {
    if (other.dims() != dims()) return false;
    for (std::size_t d = 0; d < dims(); ++d)
      if (other.lower[d] < lower[d] || other.upper[d] > upper[d]) return false;
    return true;
  }

  /// The two halves obtained by cutting at `loc` along `dim`.
  std::pair<BoundedBox, BoundedBox> split(std::size_t dim, double loc) const {
    BoundedBox left = *this;
    BoundedBox right = *this;
    left.upper[dim] = loc;
    right.lower[dim] = loc;
    return {std::move(left), std::move(right)};
  }

  void validate() const {
    if (lower.size() != upper.size())
      throw std::invalid_argument("BoundedBox: lower/upper size mismatch");
    if (lower.empty()) throw std::invalid_argument("BoundedBox: zero dimensions");
    for (std::size_t d = 0; d < lower.size(); ++d)
      if (!(lower[d] <= upper[d]))
        throw std::invalid_argument("BoundedBox: lower > upper");
  }
};

/// Sum of side lengths; the rate governing first-cut times.
inline double linear_dimension(const BoundedBox& box) {
  double ld = 0.0;
  for (std::size_t d = 0; d < box.dims(); ++d) ld += box.side(d);
  return ld;
}

/// Clamp a point coordinate-wise into the box. Returns the number of
/// coordinates that had to move.
inline int clamp_to_box(const BoundedBox& box, std::span<double> point) {
  int moved = 0;
  for (std::size_t d = 0; d < box.dims(); ++d) {
    if (point[d] < box.lower[d]) {
      point[d] = box.lower[d];
      ++moved;
    } else if (point[d] > box.upper[d]) {
      point[d] = box.upper[d];
      ++moved;
    }
  }
  return moved;
}

}  // namespace mondrian
