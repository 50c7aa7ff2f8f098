#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace chainrec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SpaceKind { torus, box };

/// The phase space: either the flat unit torus T^d (coordinates taken mod 1)
/// or a product of closed intervals. Each axis is cut into `extent(i)` cells
/// at depth 0.
class Ambient {
 public:
  static Ambient torus(int dim);
  static Ambient box(Vec lower, Vec upper, std::vector<int> extents = {});

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  SpaceKind kind() const noexcept { return kind_; }
  bool is_torus() const noexcept { return kind_ == SpaceKind::torus; }
  const Vec& lower() const noexcept { return lower_; }
  const Vec& upper() const noexcept { return upper_; }
  int extent(int axis) const { return extents_.at(static_cast<std::size_t>(axis)); }
  const std::vector<int>& extents() const noexcept { return extents_; }

  /// Torus: reduce every coordinate to [0,1). Box: throws a domain error when
  /// the point lies outside the bounds.
  Vec canonicalize(const Vec& p) const;
  bool contains(const Vec& p) const;

  /// Shortest displacement `to - from`; on the torus each component lies in
  /// [-1/2, 1/2).
  Vec displacement(const Vec& from, const Vec& to) const;
  double distance(const Vec& a, const Vec& b) const;
  double diameter() const;

  friend bool operator==(const Ambient& a, const Ambient& b);

 private:
  Ambient(SpaceKind kind, Vec lower, Vec upper, std::vector<int> extents);

  SpaceKind kind_;
  Vec lower_;
  Vec upper_;
  std::vector<int> extents_;
};

/// Wrap a real number into [-1/2, 1/2).
double wrap_half(double x) noexcept;

using BoxId = std::uint64_t;
using MultiIndex = std::vector<std::int64_t>;

struct Box {
  int depth = 0;
  MultiIndex index;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Uniform dyadic grid over an Ambient. Box ids are the row-major rank of the
/// multi-index with axis 0 most significant, so id order is lexicographic
/// multi-index order.
class BoxGrid {
 public:
  static constexpr int kDefaultMaxDepth = 30;

  BoxGrid(Ambient ambient, int depth, int max_depth = kDefaultMaxDepth);

  const Ambient& ambient() const noexcept { return ambient_; }
  int dim() const noexcept { return ambient_.dim(); }
  int depth() const noexcept { return depth_; }
  int max_depth() const noexcept { return max_depth_; }
  std::uint64_t box_count() const noexcept { return count_; }
  std::int64_t cells(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }

  BoxGrid subdivide() const;

  Box box(BoxId id) const;
  BoxId id(const Box& b) const;
  bool valid(BoxId id) const noexcept { return id < count_; }

  Box box_of(const Vec& p) const;
  BoxId id_of(const Vec& p) const;

  /// Per-axis side length and half side length.
  Vec side() const;
  Vec radius() const { return 0.5 * side(); }
  Vec lower_corner(BoxId id) const;
  Vec center(BoxId id) const;
  /// Euclidean diameter of one box.
  double box_diameter() const { return side().norm(); }

  /// Closed box extent test, on the torus modulo 1.
  bool closure_contains(BoxId id, const Vec& p, double tol = 1e-12) const;

  /// Child ids in the grid at depth+1 (2^d of them, sorted).
  std::vector<BoxId> children(BoxId id) const;
  /// Parent id in the grid at depth-1.
  BoxId parent(BoxId id) const;

  /// All boxes meeting the closed axis-aligned cube centered at `c` with
  /// per-axis half widths `r` (torus: wraps around). Appends to `out`
  /// without duplicates within one call; wrapped ids are not sorted.
  void boxes_meeting(const Vec& c, const Vec& r, std::vector<BoxId>& out) const;

 private:
  Ambient ambient_;
  int depth_;
  int max_depth_;
  std::vector<std::int64_t> cells_;
  std::uint64_t count_;
};

/// Sorted duplicate-free set of box ids of one grid.
class BoxSet {
 public:
  BoxSet() = default;
  /// Sorts and removes duplicates; throws a domain error on ids outside the grid.
  BoxSet(std::vector<BoxId> ids, const BoxGrid& grid);
  static BoxSet from_sorted(std::vector<BoxId> ids) {
    BoxSet s;
    s.ids_ = std::move(ids);
    return s;
  }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(BoxId id) const;
  const std::vector<BoxId>& ids() const noexcept { return ids_; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }

  friend bool operator==(const BoxSet&, const BoxSet&) = default;

 private:
  std::vector<BoxId> ids_;
};

/// Standard two-sided Hausdorff distance between finite point sets. When
/// exactly one set is empty the ambient diameter is returned; both empty
/// throws.
double hausdorff_distance(const Ambient& ambient, std::span<const Vec> a,
                          std::span<const Vec> b);

/// sup_{x in a} inf_{y in b} d(x, y).
double directed_hausdorff(const Ambient& ambient, std::span<const Vec> a,
                          std::span<const Vec> b);

}  // namespace chainrec
